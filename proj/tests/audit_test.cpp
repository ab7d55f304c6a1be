#include "opforge/audit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "opforge/gen.hpp"
#include "opforge/noise.hpp"
#include "opforge/rng.hpp"
#include "opforge/templates.hpp"

namespace opforge {
namespace {

TEST(Cosine, KnownValuesAndEdgeCases) {
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {-1, 0}), -1.0);
  EXPECT_NEAR(cosine_similarity({1, 1}, {1, 0}), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(cosine_similarity({0, 0}, {1, 2}), 0.0) << "zero vector has no direction";
}

TEST(HashEmbedding, DeterministicNormalizedAndShaped) {
  auto client = make_hash_embedding_client(64);
  const std::vector<std::string> texts = {"Jefferson Circus has 4 parrots.",
                                          "The sky is blue today."};
  const auto a = client->embed(texts);
  const auto b = client->embed(texts);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
  for (const auto& v : a) {
    ASSERT_EQ(v.size(), 64u);
    double norm = 0;
    for (double x : v) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-9);
  }
  EXPECT_GT(cosine_similarity(a[0], a[0]), 0.999);
  EXPECT_LT(cosine_similarity(a[0], a[1]), 0.5) << "unrelated sentences should not align";
}

TEST(HashEmbedding, SharedVocabularyScoresHigherThanDisjoint) {
  auto client = make_hash_embedding_client();
  const auto vecs = client->embed({
      "The number of parrots in Jefferson Circus equals 4.",
      "The number of parrots in Hamilton Farm equals 9.",
      "Quarterly revenue guidance remained unchanged.",
  });
  EXPECT_GT(cosine_similarity(vecs[0], vecs[1]), cosine_similarity(vecs[0], vecs[2]));
}

// On-template distractors should be statistically invisible: the probability
// that a core statement embeds closer to the question than a distractor
// should sit near chance.
TEST(Separability, OnTemplateNoiseIsNearChance) {
  std::vector<Problem> problems;
  GenSpec spec;
  spec.target_ops = 5;
  spec.context_target = 2000;
  spec.seed = 31;
  for (int i = 0; i < 12; ++i) problems.push_back(generate_problem(spec, i));

  auto embeddings = make_hash_embedding_client();
  const SeparabilityReport report = noise_separability(problems, *embeddings);
  EXPECT_EQ(report.problems, 12);
  EXPECT_GT(report.core_statements, 0);
  EXPECT_GT(report.noise_statements, 0);
  EXPECT_GT(report.probability_core_closer, 0.35);
  EXPECT_LT(report.probability_core_closer, 0.65);
}

// Filler from a disjoint vocabulary is the opposite: trivially separable.
// The audit must flag it, which is exactly why graph noise is the default.
TEST(Separability, OffTopicFillerIsObvious) {
  std::vector<Problem> problems;
  GenSpec spec;
  spec.target_ops = 5;
  spec.context_target = 2000;
  spec.noise_kind = NoiseKind::kFiller;
  spec.seed = 31;
  for (int i = 0; i < 12; ++i) problems.push_back(generate_problem(spec, i));

  auto embeddings = make_hash_embedding_client();
  const SeparabilityReport report = noise_separability(problems, *embeddings);
  EXPECT_GT(report.noise_statements, 0);
  EXPECT_GT(report.probability_core_closer, 0.8);
}

TEST(Separability, ProblemsWithoutAMaskAreSkipped) {
  std::vector<Problem> problems;
  GenSpec spec;
  spec.target_ops = 4;
  spec.seed = 3;
  problems.push_back(generate_problem(spec, 0));  // clean: every statement is core
  Problem unmasked = generate_problem(spec, 1);
  unmasked.core_statement_indices.clear();  // mask lives in a sidecar we did not load
  problems.push_back(unmasked);

  auto embeddings = make_hash_embedding_client();
  const SeparabilityReport report = noise_separability(problems, *embeddings);
  EXPECT_EQ(report.problems, 0);
  EXPECT_EQ(report.core_statements, 0);
  EXPECT_EQ(report.noise_statements, 0);
  EXPECT_DOUBLE_EQ(report.probability_core_closer, 0.5);
}

}  // namespace
}  // namespace opforge
