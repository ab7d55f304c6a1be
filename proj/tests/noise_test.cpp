#include "opforge/noise.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>

#include "opforge/gen.hpp"
#include "opforge/graph.hpp"
#include "opforge/rng.hpp"
#include "opforge/solver.hpp"
#include "opforge/templates.hpp"

namespace opforge {
namespace {

ValuedGraph make_core(Subtask subtask, int ops, std::uint64_t seed) {
  GenSpec spec;
  spec.subtask = subtask;
  spec.target_ops = ops;
  spec.seed = seed;
  return generate_problem(spec, 0).valued;
}

TEST(Noise, ZeroBudgetIsIdentity) {
  const ValuedGraph core = make_core(Subtask::kMedium, 6, 5);
  Rng rng(9);
  const NoisyRender out = inject_noise(core, find_template("animal-zoo"), NoisePlan{}, rng);
  EXPECT_TRUE(structural_equal(out.valued.graph, core.graph));
  EXPECT_EQ(out.report.noise_nodes, 0);
  EXPECT_EQ(out.report.noise_statements, 0);
}

TEST(Noise, CoreSurvivesInjectionUntouched) {
  for (int budget : {2000, 8000}) {
    const ValuedGraph core = make_core(Subtask::kHard, 8, 11);
    NoisePlan plan;
    plan.token_budget = budget;
    Rng rng(17);
    const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);

    EXPECT_TRUE(structural_equal(core_subgraph(out.valued.graph), core.graph));
    EXPECT_EQ(op_count(out.valued.graph), op_count(core.graph));
    EXPECT_EQ(evaluate(out.valued.graph, out.valued.graph.query),
              evaluate(core.graph, core.graph.query));

    // Spider shape: nothing flows from a distractor back into the core.
    std::set<std::string> noisy;
    for (const auto& n : out.valued.graph.nodes()) {
      if (n.noise) noisy.insert(n.id);
    }
    EXPECT_GT(noisy.size(), 0u);
    for (const auto& e : out.valued.graph.edges()) {
      if (noisy.count(e.target)) continue;
      for (const auto& s : e.sources) {
        EXPECT_FALSE(noisy.count(s)) << "noise source " << s << " feeds core " << e.target;
      }
    }
  }
}

TEST(Noise, LandsInsideBudgetWindow) {
  const ValuedGraph core = make_core(Subtask::kMedium, 4, 23);
  for (int budget : {1500, 4000, 12000}) {
    NoisePlan plan;
    plan.token_budget = budget;
    Rng rng(31);
    const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
    const int estimate = heuristic_token_estimate(out.rendered.question);
    EXPECT_GE(estimate, static_cast<int>(budget * (1.0 - plan.tolerance))) << budget;
    EXPECT_LE(estimate, static_cast<int>(budget * (1.0 + plan.tolerance))) << budget;
    EXPECT_EQ(out.report.estimated_tokens, estimate);
  }
}

TEST(Noise, DeterministicGivenSeed) {
  const ValuedGraph core = make_core(Subtask::kMedium, 5, 3);
  NoisePlan plan;
  plan.token_budget = 3000;
  Rng a(42);
  Rng b(42);
  const NoisyRender first = inject_noise(core, find_template("animal-zoo"), plan, a);
  const NoisyRender second = inject_noise(core, find_template("animal-zoo"), plan, b);
  EXPECT_EQ(first.rendered.question, second.rendered.question);
  EXPECT_EQ(first.rendered.core_indices, second.rendered.core_indices);
}

TEST(Noise, CoreIndicesPointAtCoreStatements) {
  const ValuedGraph core = make_core(Subtask::kMedium, 5, 3);
  Rng clean_rng(42);
  const RenderedProblem clean =
      render_problem(core.graph, find_template("animal-zoo"), clean_rng);
  NoisePlan plan;
  plan.token_budget = 3000;
  Rng rng(42);
  const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
  ASSERT_EQ(out.rendered.core_indices.size(), clean.statements.size());
  std::multiset<std::string> from_noisy;
  for (int idx : out.rendered.core_indices) {
    ASSERT_GE(idx, 0);
    ASSERT_LT(idx, static_cast<int>(out.rendered.statements.size()));
    from_noisy.insert(out.rendered.statements[idx]);
  }
  EXPECT_EQ(from_noisy,
            std::multiset<std::string>(clean.statements.begin(), clean.statements.end()));
}

TEST(Noise, SpiderFractionFloorsCoreAttachment) {
  // The fraction is a floor on the share of sourced distractor relations that
  // touch at least one core operand. At 1.0 every such relation must attach.
  for (std::uint64_t seed : {8ull, 29ull, 64ull}) {
    const ValuedGraph core = make_core(Subtask::kMedium, 6, seed);
    for (double fraction : {0.5, 1.0}) {
      NoisePlan plan;
      plan.token_budget = 2500;
      plan.spider_fraction = fraction;
      Rng rng(seed);
      const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
      int sourced = 0;
      int touching = 0;
      for (const auto& e : out.valued.graph.edges()) {
        if (!out.valued.graph.node(e.target).noise || e.sources.empty()) continue;
        ++sourced;
        for (const auto& s : e.sources) {
          if (!out.valued.graph.node(s).noise) {
            ++touching;
            break;
          }
        }
      }
      ASSERT_GT(sourced, 0);
      EXPECT_GE(static_cast<double>(touching), fraction * sourced)
          << "seed " << seed << " fraction " << fraction;
    }
  }
}

TEST(Noise, FrozenContainersAdmitNoDistractorCounts) {
  // A container whose total head count is part of the core would change value
  // if a distractor count joined it, because that total sums every count the
  // text mentions for the container. Rates are membership-neutral and stay
  // legal everywhere.
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const ValuedGraph core = make_core(Subtask::kHard, 10, seed);
    std::set<std::string> frozen;
    for (const auto& n : core.graph.nodes()) {
      if (n.kind == NodeKind::kAbstract && n.path.segments.size() == 2) {
        frozen.insert(n.path.segments.back().name);
      }
    }
    NoisePlan plan;
    plan.token_budget = 4000;
    Rng rng(seed);
    const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
    for (const auto& n : out.valued.graph.nodes()) {
      if (!n.noise) continue;
      EXPECT_NE(n.kind, NodeKind::kAbstract) << n.id;
      const auto& segs = n.path.segments;
      if (segs.size() == 2 && segs[0].role == SegmentRole::kCategoryInstance) {
        EXPECT_FALSE(frozen.count(segs.back().name))
            << "distractor count " << n.id << " joined frozen container "
            << segs.back().name;
      }
    }
  }
}

TEST(Noise, SymbolicDistractorsNeverHitTheTarget) {
  const ValuedGraph core = make_core(Subtask::kSymbolic, 6, 13);
  const std::int64_t target = core.graph.find_all_target.value();
  NoisePlan plan;
  plan.token_budget = 3000;
  Rng rng(5);
  const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
  int noisy_seen = 0;
  for (const auto& n : out.valued.graph.nodes()) {
    if (!n.noise) continue;
    ++noisy_seen;
    EXPECT_NE(out.valued.values.at(n.id), target) << n.id;
  }
  EXPECT_GT(noisy_seen, 0);
  EXPECT_EQ(solve_find_all(out.valued.graph, target), solve_find_all(core.graph, target));
}

TEST(Noise, StrictValuesStayInStatementRange) {
  const ValuedGraph core = make_core(Subtask::kMedium, 5, 37);
  NoisePlan plan;
  plan.token_budget = 6000;
  plan.strict_values = true;
  Rng rng(2);
  const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
  for (const auto& n : out.valued.graph.nodes()) {
    if (!n.noise) continue;
    EXPECT_GE(out.valued.values.at(n.id), 1) << n.id;
    EXPECT_LE(out.valued.values.at(n.id), 999) << n.id;
  }
}

TEST(Noise, FillerKeepsEveryStatementAndRemapsTheMask) {
  const ValuedGraph core = make_core(Subtask::kMedium, 4, 7);
  const Template t = find_template("animal-zoo");
  Rng clean_rng(7);
  const RenderedProblem clean = render_problem(core.graph, t, clean_rng);
  NoisePlan plan;
  plan.token_budget = 2000;
  Rng rng(3);
  const RenderedProblem padded = inject_filler(core.graph, t, clean, plan, rng);

  ASSERT_EQ(padded.core_indices.size(), clean.statements.size());
  for (std::size_t i = 0; i < clean.statements.size(); ++i) {
    EXPECT_EQ(padded.statements[padded.core_indices[i]], clean.statements[i])
        << "originals keep their order under the remapped mask";
  }
  for (int i = 0; i < static_cast<int>(padded.statements.size()); ++i) {
    const bool is_core =
        std::find(padded.core_indices.begin(), padded.core_indices.end(), i) !=
        padded.core_indices.end();
    const auto& pool = filler_pool();
    const bool is_filler =
        std::find(pool.begin(), pool.end(), padded.statements[i]) != pool.end();
    EXPECT_NE(is_core, is_filler) << padded.statements[i];
    EXPECT_NE(padded.question.find(padded.statements[i]), std::string::npos);
  }
  const int estimate = heuristic_token_estimate(padded.question);
  EXPECT_GE(estimate, static_cast<int>(plan.token_budget * 0.9));
  EXPECT_LE(estimate, static_cast<int>(plan.token_budget * 1.1));
}

TEST(Noise, FillerPoolDisjointFromTemplateVocabulary) {
  for (const auto& t :
       {find_template("animal-zoo"), find_template("teacher-school"),
        find_template("movie-festival")}) {
    const auto vocab = t.vocabulary_terms();
    for (const auto& sentence : filler_pool()) {
      for (const auto& term : vocab) {
        EXPECT_EQ(sentence.find(term), std::string::npos)
            << "filler reuses template term '" << term << "'";
      }
    }
  }
}

TEST(Noise, TokenEstimatorOverrideIsHonored) {
  const ValuedGraph core = make_core(Subtask::kMedium, 4, 7);
  NoisePlan plan;
  plan.token_budget = 1200;
  // Twice the default token density; the budget loop must converge on it.
  plan.estimator = [](std::string_view text) {
    return static_cast<int>(text.size()) / 2;
  };
  Rng rng(3);
  const NoisyRender out = inject_noise(core, find_template("animal-zoo"), plan, rng);
  const int doubled = static_cast<int>(out.rendered.question.size()) / 2;
  EXPECT_GE(doubled, static_cast<int>(plan.token_budget * 0.9));
  EXPECT_LE(doubled, static_cast<int>(plan.token_budget * 1.1));
}

}  // namespace
}  // namespace opforge
