#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "opforge/eval.hpp"
#include "opforge/gen.hpp"
#include "opforge/graph.hpp"
#include "opforge/noise.hpp"
#include "opforge/parse.hpp"
#include "opforge/rng.hpp"
#include "opforge/solver.hpp"
#include "opforge/templates.hpp"

namespace {

using namespace opforge;

void BM_GenerateForward(benchmark::State& state) {
  GenSpec spec;
  spec.subtask = Subtask::kHard;
  spec.target_ops = static_cast<int>(state.range(0));
  spec.seed = 7;
  std::uint64_t index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_problem(spec, index++));
  }
}
BENCHMARK(BM_GenerateForward)->Arg(5)->Arg(15)->Arg(30);

void BM_GenerateReverse(benchmark::State& state) {
  GenSpec spec;
  spec.subtask = Subtask::kHard;
  spec.mode = Mode::kReverse;
  spec.target_ops = static_cast<int>(state.range(0));
  spec.seed = 7;
  std::uint64_t index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_problem(spec, index++));
  }
}
BENCHMARK(BM_GenerateReverse)->Arg(5)->Arg(15)->Arg(30);

void BM_ReverseSolve(benchmark::State& state) {
  GenSpec spec;
  spec.subtask = Subtask::kHard;
  spec.mode = Mode::kReverse;
  spec.target_ops = static_cast<int>(state.range(0));
  spec.seed = 11;
  const Problem p = generate_problem(spec, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reverse(p.valued.graph));
  }
}
BENCHMARK(BM_ReverseSolve)->Arg(5)->Arg(15)->Arg(30);

void BM_NoiseInjection8K(benchmark::State& state) {
  GenSpec spec;
  spec.target_ops = 6;
  spec.seed = 3;
  const ValuedGraph core = generate_problem(spec, 0).valued;
  const Template t = find_template("animal-zoo");
  NoisePlan plan;
  plan.token_budget = 8000;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    Rng rng(stream++);
    benchmark::DoNotOptimize(inject_noise(core, t, plan, rng));
  }
}
BENCHMARK(BM_NoiseInjection8K);

void BM_ParseAndEvaluate(benchmark::State& state) {
  GenSpec spec;
  spec.subtask = Subtask::kHard;
  spec.target_ops = static_cast<int>(state.range(0));
  spec.seed = 19;
  const Problem p = generate_problem(spec, 0);
  for (auto _ : state) {
    const ComputationGraph parsed = parse_problem(p.question).graph;
    benchmark::DoNotOptimize(evaluate(parsed, parsed.query));
  }
}
BENCHMARK(BM_ParseAndEvaluate)->Arg(5)->Arg(15)->Arg(30);

void BM_CurveAnalytics(benchmark::State& state) {
  std::vector<std::pair<double, double>> points;
  AccuracyCurve curve;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  for (int op = 2; op <= 30; ++op) {
    const double acc = sigmoid_value(0.5, 15, op) + jitter(rng);
    points.emplace_back(op, acc);
    for (int i = 0; i < 100; ++i) curve.add(op, i < static_cast<int>(acc * 100));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(auc_to_threshold(curve));
    benchmark::DoNotOptimize(fit_sigmoid(points));
  }
}
BENCHMARK(BM_CurveAnalytics);

}  // namespace

BENCHMARK_MAIN();
