#include "opforge/io.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "opforge/errors.hpp"
#include "opforge/gen.hpp"

namespace opforge {
namespace {

std::string temp_path(const std::string& stem) {
  const auto path = std::filesystem::path(::testing::TempDir()) / stem;
  std::filesystem::remove(path);
  return path.string();
}

Problem make_problem(Subtask subtask, Mode mode, int ops, std::uint64_t index) {
  GenSpec spec;
  spec.subtask = subtask;
  spec.mode = mode;
  spec.target_ops = ops;
  spec.seed = 99;
  return generate_problem(spec, index);
}

void expect_same_surface(const Problem& a, const Problem& b) {
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.subtask, b.subtask);
  EXPECT_EQ(a.mode, b.mode);
  EXPECT_EQ(a.template_id, b.template_id);
  EXPECT_EQ(a.op, b.op);
  EXPECT_EQ(a.context_target, b.context_target);
  EXPECT_EQ(a.question, b.question);
  EXPECT_EQ(a.statements, b.statements);
  EXPECT_EQ(a.answer.symbolic, b.answer.symbolic);
  EXPECT_EQ(a.answer.value, b.answer.value);
  EXPECT_EQ(a.answer.names, b.answer.names);
  EXPECT_EQ(a.solution, b.solution);
  EXPECT_EQ(a.seed, b.seed);
}

TEST(ProblemJson, RoundTripsEverySubtask) {
  for (const Problem& p :
       {make_problem(Subtask::kMedium, Mode::kForward, 4, 0),
        make_problem(Subtask::kHard, Mode::kReverse, 6, 1),
        make_problem(Subtask::kSymbolic, Mode::kForward, 5, 2)}) {
    const Problem back = problem_from_jsonl(problem_to_jsonl(p));
    expect_same_surface(p, back);
    EXPECT_TRUE(back.core_statement_indices.empty())
        << "the core/noise mask must not travel with the dataset";
  }
}

TEST(ProblemJson, SerializationIsByteStable) {
  const Problem p = make_problem(Subtask::kHard, Mode::kForward, 7, 3);
  EXPECT_EQ(problem_to_jsonl(p), problem_to_jsonl(p));
  const Problem back = problem_from_jsonl(problem_to_jsonl(p));
  EXPECT_EQ(problem_to_jsonl(back), problem_to_jsonl(p)) << "round trip is a fixed point";
}

TEST(ProblemJson, SeedSurvivesAbove53Bits) {
  Problem p = make_problem(Subtask::kMedium, Mode::kForward, 3, 0);
  p.seed = (1ULL << 60) + 12345;
  const Problem back = problem_from_jsonl(problem_to_jsonl(p));
  EXPECT_EQ(back.seed, (1ULL << 60) + 12345);
}

TEST(ProblemJson, MalformedLinesThrowDataError) {
  EXPECT_THROW(problem_from_jsonl("not json at all"), DataError);
  EXPECT_THROW(problem_from_jsonl("{}"), DataError);
  EXPECT_THROW(problem_from_jsonl(R"({"id": 7})"), DataError);
}

TEST(RecordJson, RoundTripsAllFields) {
  EvalRecord r;
  r.problem_id = "abc123";
  r.subtask = Subtask::kHard;
  r.mode = Mode::kReverse;
  r.op = 17;
  r.context_target = 8000;
  r.model = "some-model";
  r.sample_index = 3;
  r.completion = "Thinking...\nThe answer is 41.";
  r.extracted.found = true;
  r.extracted.value = 41;
  r.correct = true;
  r.retries = 2;
  r.latency_ms = 123.5;
  r.prompt_tokens = 900;
  r.completion_tokens = 80;
  const EvalRecord back = record_from_jsonl(record_to_jsonl(r));
  EXPECT_EQ(back.problem_id, r.problem_id);
  EXPECT_EQ(back.subtask, r.subtask);
  EXPECT_EQ(back.mode, r.mode);
  EXPECT_EQ(back.op, r.op);
  EXPECT_EQ(back.context_target, r.context_target);
  EXPECT_EQ(back.model, r.model);
  EXPECT_EQ(back.sample_index, r.sample_index);
  EXPECT_EQ(back.completion, r.completion);
  EXPECT_EQ(back.extracted.found, r.extracted.found);
  EXPECT_EQ(back.extracted.value, r.extracted.value);
  EXPECT_EQ(back.correct, r.correct);
  EXPECT_EQ(back.failure, "");
  EXPECT_EQ(back.retries, r.retries);
  EXPECT_DOUBLE_EQ(back.latency_ms, r.latency_ms);
  EXPECT_EQ(back.prompt_tokens, r.prompt_tokens);
  EXPECT_EQ(back.completion_tokens, r.completion_tokens);

  EvalRecord sym;
  sym.problem_id = "sym";
  sym.extracted.found = true;
  sym.extracted.symbolic = true;
  sym.extracted.names = {"V1", "V22"};
  sym.failure = "extraction";
  const EvalRecord sback = record_from_jsonl(record_to_jsonl(sym));
  EXPECT_EQ(sback.extracted.names, sym.extracted.names);
  EXPECT_EQ(sback.failure, "extraction");
}

TEST(Files, ProblemsWriteReadAndSidecarRejoin) {
  std::vector<Problem> problems;
  GenSpec spec;
  spec.target_ops = 4;
  spec.seed = 5;
  spec.context_target = 1500;
  for (int i = 0; i < 4; ++i) problems.push_back(generate_problem(spec, i));
  for (const auto& p : problems) {
    ASSERT_FALSE(p.core_statement_indices.empty()) << "noise runs populate the mask";
  }

  const std::string data_path = temp_path("io-problems.jsonl");
  const std::string sidecar_path = temp_path("io-problems.sidecar.jsonl");
  write_problems(data_path, problems);
  write_sidecar(sidecar_path, problems);

  std::vector<Problem> loaded = read_problems(data_path);
  ASSERT_EQ(loaded.size(), problems.size());
  for (const auto& p : loaded) EXPECT_TRUE(p.core_statement_indices.empty());

  apply_sidecar(loaded, read_sidecar(sidecar_path));
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].core_statement_indices, problems[i].core_statement_indices);
  }
}

TEST(Files, ReadersCollectOrThrowOnMalformedLines) {
  const std::string path = temp_path("io-mixed.jsonl");
  const Problem good = make_problem(Subtask::kMedium, Mode::kForward, 3, 0);
  {
    std::ofstream out(path);
    out << problem_to_jsonl(good) << "\n";
    out << "garbage line\n";
    out << problem_to_jsonl(make_problem(Subtask::kMedium, Mode::kForward, 3, 1)) << "\n";
  }
  std::vector<std::string> errors;
  const auto loaded = read_problems(path, &errors);
  EXPECT_EQ(loaded.size(), 2u);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_NE(errors[0].find("line 2"), std::string::npos) << errors[0];
  EXPECT_THROW(read_problems(path), DataError);
}

TEST(Files, MissingFileThrowsDataError) {
  EXPECT_THROW(read_problems(temp_path("io-absent.jsonl")), DataError);
  EXPECT_THROW(read_records(temp_path("io-absent.jsonl")), DataError);
}

TEST(Files, AppendRecordsAccumulates) {
  const std::string path = temp_path("io-records.jsonl");
  EvalRecord r;
  r.problem_id = "p1";
  append_records(path, {r});
  r.problem_id = "p2";
  append_records(path, {r});
  const auto records = read_records(path);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].problem_id, "p1");
  EXPECT_EQ(records[1].problem_id, "p2");
}

TEST(Csv, CurveRowsAreOrderedAndExact) {
  AccuracyCurve curve;
  curve.add(3, true);
  curve.add(3, false);
  curve.add(2, true);
  const std::string csv = curve_to_csv(curve);
  EXPECT_EQ(csv,
            "op,total,correct,accuracy\n"
            "2,1,1,1.000000\n"
            "3,2,1,0.500000\n");
}

}  // namespace
}  // namespace opforge
