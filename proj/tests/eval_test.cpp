#include "opforge/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "opforge/errors.hpp"

namespace opforge {
namespace {

TEST(Extract, NumericPrefersTheAnswerSentence) {
  const auto a = extract_answer(
      "We start with 12 birds. Then 7 leave. The final answer is 5.", false);
  ASSERT_TRUE(a.found);
  EXPECT_FALSE(a.symbolic);
  EXPECT_EQ(a.value, 5);
}

TEST(Extract, NumericFallsBackToLastInteger) {
  const auto a = extract_answer("Step 1 gives 40. Step 2 gives 23.", false);
  ASSERT_TRUE(a.found);
  EXPECT_EQ(a.value, 23);
}

TEST(Extract, NumericStripsDigitGroupCommas) {
  const auto a = extract_answer("So the answer is 1,234,567 overall.", false);
  ASSERT_TRUE(a.found);
  EXPECT_EQ(a.value, 1234567);
}

TEST(Extract, NumericHandlesNegativeAndMissing) {
  const auto neg = extract_answer("The answer is -14.", false);
  ASSERT_TRUE(neg.found);
  EXPECT_EQ(neg.value, -14);
  EXPECT_FALSE(extract_answer("no digits at all here", false).found);
  EXPECT_FALSE(extract_answer("", false).found);
}

TEST(Extract, SymbolicCollectsSortedUniqueNames) {
  const auto a = extract_answer(
      "Chasing the chain gives V2 = 7 and V9 = 7. So the answer is V9, V2, and V9.", true);
  ASSERT_TRUE(a.found);
  EXPECT_TRUE(a.symbolic);
  EXPECT_EQ(a.names, (std::vector<std::string>{"V2", "V9"}));
}

TEST(Extract, SymbolicNoneReadsAsEmptySet) {
  const auto a = extract_answer("Therefore the answer is that none are equal to 7.", true);
  ASSERT_TRUE(a.found);
  EXPECT_TRUE(a.names.empty());
}

TEST(Grade, ExactMatchSemantics) {
  GoldAnswer numeric;
  numeric.value = 42;
  ExtractedAnswer hit;
  hit.found = true;
  hit.value = 42;
  EXPECT_TRUE(grade(hit, numeric));
  hit.value = 41;
  EXPECT_FALSE(grade(hit, numeric));
  hit.found = false;
  hit.value = 42;
  EXPECT_FALSE(grade(hit, numeric)) << "missing extraction can never match";

  GoldAnswer sym;
  sym.symbolic = true;
  sym.names = {"V1", "V3"};
  ExtractedAnswer set;
  set.found = true;
  set.symbolic = true;
  set.names = {"V1", "V3"};
  EXPECT_TRUE(grade(set, sym));
  set.names = {"V1"};
  EXPECT_FALSE(grade(set, sym));
  set.names = {"V1", "V3", "V4"};
  EXPECT_FALSE(grade(set, sym));
}

TEST(Curve, BucketsAndInfrastructureDrops) {
  std::vector<EvalRecord> records;
  auto push = [&](int op, bool correct, const std::string& failure) {
    EvalRecord r;
    r.op = op;
    r.correct = correct;
    r.failure = failure;
    records.push_back(r);
  };
  push(2, true, "");
  push(2, true, "");
  push(2, false, "extraction");
  push(3, false, "");
  push(3, true, "infrastructure");  // must not count anywhere
  const AccuracyCurve curve = curve_from_records(records);
  EXPECT_NEAR(curve.accuracy_at(2), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(curve.buckets().at(3).total, 1);
  EXPECT_NEAR(curve.accuracy_at(3), 0.0, 1e-12);
  EXPECT_FALSE(curve.has(4));
  EXPECT_THROW(curve.accuracy_at(4), DataError);
}

TEST(Auc, ConstantPerfectCurveOverThirtyOps) {
  AccuracyCurve curve;
  for (int op = 2; op <= 31; ++op) curve.add(op, true);
  const AucResult r = auc_to_threshold(curve);
  EXPECT_DOUBLE_EQ(r.auc, 3000.0);
  EXPECT_EQ(r.cutoff_op, 32);
  EXPECT_TRUE(r.right_censored) << "never crossed the threshold";
}

TEST(Auc, ImmediateCollapseScoresZero) {
  AccuracyCurve curve;
  for (int op = 2; op <= 31; ++op) {
    for (int i = 0; i < 100; ++i) curve.add(op, i < 4);  // 4% everywhere
  }
  const AucResult r = auc_to_threshold(curve);
  EXPECT_DOUBLE_EQ(r.auc, 0.0);
  EXPECT_EQ(r.cutoff_op, 2);
  EXPECT_FALSE(r.right_censored);
}

TEST(Auc, LinearDecayMatchesHandSum) {
  // accuracy(op) = 1 - (op-2)/30 for op 2..31: crosses 5% between 30 and 31.
  AccuracyCurve curve;
  for (int op = 2; op <= 31; ++op) {
    const int pct = 100 - (op - 2) * 100 / 30;
    for (int i = 0; i < 100; ++i) curve.add(op, i < pct);
  }
  double expected = 0;
  for (int op = 2; op <= 31; ++op) {
    const int pct = 100 - (op - 2) * 100 / 30;
    if (pct < 5) break;
    expected += pct;
  }
  const AucResult r = auc_to_threshold(curve);
  EXPECT_DOUBLE_EQ(r.auc, expected);
  EXPECT_FALSE(r.right_censored);
}

TEST(Auc, GapInOpsRightCensors) {
  AccuracyCurve curve;
  curve.add(2, true);
  curve.add(3, true);
  curve.add(5, true);  // op 4 missing: area stops at the gap
  const AucResult r = auc_to_threshold(curve);
  EXPECT_DOUBLE_EQ(r.auc, 200.0);
  EXPECT_EQ(r.cutoff_op, 4);
  EXPECT_TRUE(r.right_censored);
}

TEST(CurveStats, LandmarksAndMean) {
  AccuracyCurve curve;
  for (int op = 2; op <= 11; ++op) {
    const double acc = op <= 5 ? 0.9 : (op <= 8 ? 0.3 : 0.05);
    for (int i = 0; i < 100; ++i) curve.add(op, i < static_cast<int>(acc * 100));
  }
  const CurveStats s = curve_stats(curve);
  ASSERT_TRUE(s.first_below_half.has_value());
  EXPECT_EQ(*s.first_below_half, 6);
  ASSERT_TRUE(s.first_below_tenth.has_value());
  EXPECT_EQ(*s.first_below_tenth, 9);
  EXPECT_NEAR(s.mean_accuracy_2_31, (4 * 0.9 + 3 * 0.3 + 3 * 0.05) / 10.0, 1e-12);

  AccuracyCurve strong;
  for (int op = 2; op <= 4; ++op) strong.add(op, true);
  const CurveStats s2 = curve_stats(strong);
  EXPECT_FALSE(s2.first_below_half.has_value());
  EXPECT_FALSE(s2.first_below_tenth.has_value());
}

TEST(Sigmoid, ValueMatchesClosedForm) {
  EXPECT_NEAR(sigmoid_value(0.5, 15, 15), 0.5, 1e-12);
  EXPECT_NEAR(sigmoid_value(0.5, 15, 5), 1.0 / (1.0 + std::exp(-5.0)), 1e-12);
  EXPECT_GT(sigmoid_value(1.0, 10, 5), sigmoid_value(1.0, 10, 6)) << "decreasing in op";
}

TEST(Sigmoid, RecoversParametersFromCleanCurve) {
  std::vector<std::pair<double, double>> pts;
  for (int op = 2; op <= 30; ++op) pts.emplace_back(op, sigmoid_value(0.7, 12, op));
  const SigmoidFit fit = fit_sigmoid(pts);
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.steepness, 0.7, 1e-3);
  EXPECT_NEAR(fit.midpoint, 12.0, 1e-3);
  EXPECT_GT(fit.r_squared, 0.9999);
}

TEST(Sigmoid, SurvivesModerateNoise) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::vector<std::pair<double, double>> pts;
  for (int op = 2; op <= 30; ++op) {
    const double y = sigmoid_value(0.5, 15, op) + jitter(rng);
    pts.emplace_back(op, std::min(1.0, std::max(0.0, y)));
  }
  const SigmoidFit fit = fit_sigmoid(pts);
  ASSERT_TRUE(fit.ok);
  EXPECT_NEAR(fit.midpoint, 15.0, 1.0);
  EXPECT_GT(fit.r_squared, 0.98);
}

TEST(Sigmoid, DegenerateInputsReportNotOk) {
  EXPECT_FALSE(fit_sigmoid(std::vector<std::pair<double, double>>{}).ok);
  EXPECT_FALSE(fit_sigmoid({{2.0, 0.5}, {3.0, 0.5}}).ok) << "under 3 points";
  std::vector<std::pair<double, double>> flat;
  for (int op = 2; op <= 20; ++op) flat.emplace_back(op, 0.6);
  EXPECT_FALSE(fit_sigmoid(flat).ok) << "constant accuracy has no midpoint";
}

TEST(RepeatedSampling, ClosedFormAndEdgeCases) {
  EXPECT_DOUBLE_EQ(repeated_sampling_accuracy(0.25, 1), 0.25);
  EXPECT_NEAR(repeated_sampling_accuracy(0.25, 2), 1 - 0.75 * 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(repeated_sampling_accuracy(0.0, 100), 0.0);
  EXPECT_DOUBLE_EQ(repeated_sampling_accuracy(1.0, 1), 1.0);
  double prev = 0;
  for (int n = 1; n <= 256; n *= 2) {
    const double acc = repeated_sampling_accuracy(0.25, n);
    EXPECT_GT(acc, prev) << "monotone in n";
    prev = acc;
  }
}

TEST(Ols, ExactLineAndKnownNoiseFit) {
  const LinearFit exact = ols({{0, 1}, {1, 3}, {2, 5}, {3, 7}});
  EXPECT_NEAR(exact.slope, 2.0, 1e-12);
  EXPECT_NEAR(exact.intercept, 1.0, 1e-12);
  EXPECT_NEAR(exact.r_squared, 1.0, 1e-12);

  // Hand-checked least squares over {(0,0),(1,1),(2,1)}.
  const LinearFit rough = ols({{0, 0}, {1, 1}, {2, 1}});
  EXPECT_NEAR(rough.slope, 0.5, 1e-12);
  EXPECT_NEAR(rough.intercept, 1.0 / 6.0, 1e-12);
}

TEST(Ols, AucPerDoublingUsesLogTwo) {
  // auc(n) = 100 + 50*log2(n) exactly.
  const LinearFit fit = auc_vs_log2n({{1, 100}, {2, 150}, {4, 200}, {8, 250}});
  EXPECT_NEAR(fit.slope, 50.0, 1e-9);
  EXPECT_NEAR(fit.intercept, 100.0, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(MannWhitney, SeparationAndTies) {
  EXPECT_DOUBLE_EQ(mann_whitney_auc({5, 6, 7}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(mann_whitney_auc({1, 2, 3}, {5, 6, 7}), 0.0);
  EXPECT_DOUBLE_EQ(mann_whitney_auc({1, 2}, {1, 2}), 0.5);
  EXPECT_DOUBLE_EQ(mann_whitney_auc({1, 3}, {2}), 0.5);
}

}  // namespace
}  // namespace opforge
