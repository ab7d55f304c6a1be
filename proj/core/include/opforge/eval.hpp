#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opforge/gen.hpp"

namespace opforge {

// ---------------------------------------------------------------------------
// Answer extraction and grading
// ---------------------------------------------------------------------------

struct ExtractedAnswer {
  bool found = false;
  bool symbolic = false;
  std::int64_t value = 0;
  std::vector<std::string> names;  // sorted, deduplicated
};

// Numeric completions: the last integer in the last sentence that mentions
// "answer", falling back to the last integer anywhere; digit-group commas are
// stripped. Symbolic completions: the set of V-identifiers named in that
// sentence ("none" or no identifiers reads as the empty set).
ExtractedAnswer extract_answer(const std::string& completion, bool symbolic);

// Exact match: value equality, or set equality on variable names.
bool grade(const ExtractedAnswer& extracted, const GoldAnswer& gold);

// ---------------------------------------------------------------------------
// Per-evaluation record
// ---------------------------------------------------------------------------

// One model call on one problem. Infrastructure failures leave the sample out
// of every accuracy denominator; extraction failures grade as incorrect.
struct EvalRecord {
  std::string problem_id;
  Subtask subtask = Subtask::kMedium;
  Mode mode = Mode::kForward;
  int op = 0;
  int context_target = 0;
  std::string model;
  int sample_index = 0;
  std::string completion;
  ExtractedAnswer extracted;
  bool correct = false;
  std::string failure;  // "", "extraction", or "infrastructure"
  int retries = 0;
  double latency_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

// ---------------------------------------------------------------------------
// Accuracy curves over op counts
// ---------------------------------------------------------------------------

struct OpBucket {
  int correct = 0;
  int total = 0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

class AccuracyCurve {
 public:
  void add(int op, bool correct);
  const std::map<int, OpBucket>& buckets() const { return buckets_; }
  bool has(int op) const { return buckets_.count(op) > 0; }
  double accuracy_at(int op) const;  // DataError when the op has no samples

 private:
  std::map<int, OpBucket> buckets_;
};

// Infrastructure failures are dropped, not counted as wrong.
AccuracyCurve curve_from_records(const std::vector<EvalRecord>& records);

// Area under the accuracy curve: sum of accuracy*100 starting at op 2 and
// stopping before the first op whose accuracy drops under `threshold`. When
// the curve runs out of contiguous ops before crossing, the area is
// right-censored and `cutoff_op` points one past the last measured op.
struct AucResult {
  double auc = 0;
  int cutoff_op = 0;
  bool right_censored = false;
  double threshold = 0.05;
};

AucResult auc_to_threshold(const AccuracyCurve& curve, double threshold = 0.05);

// Summary landmarks: first op under 50%, first under 10%, and the mean
// accuracy over measured ops in [2, 31].
struct CurveStats {
  std::optional<int> first_below_half;
  std::optional<int> first_below_tenth;
  double mean_accuracy_2_31 = 0;
};

CurveStats curve_stats(const AccuracyCurve& curve);

// ---------------------------------------------------------------------------
// Sigmoid fit:  acc(op) ~= 1 / (1 + exp(s * (op - m)))
// ---------------------------------------------------------------------------

double sigmoid_value(double s, double m, double op);

struct SigmoidFit {
  bool ok = false;       // fit converged with positive steepness
  double steepness = 0;  // s
  double midpoint = 0;   // m
  double r_squared = 0;
  int iterations = 0;
};

// Grid-seeded damped Gauss-Newton on (op, accuracy) points. Degenerate
// inputs (under 3 points, constant accuracy) report ok == false.
SigmoidFit fit_sigmoid(const std::vector<std::pair<double, double>>& points);
SigmoidFit fit_sigmoid(const AccuracyCurve& curve);

// ---------------------------------------------------------------------------
// Repeated sampling and trend lines
// ---------------------------------------------------------------------------

// Chance that at least one of n independent samples is correct: 1 - (1-p)^n.
double repeated_sampling_accuracy(double p, int n);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

LinearFit ols(const std::vector<std::pair<double, double>>& points);

// AUC as a function of log2(sample count): slope reads as area gained per
// doubling of attempts.
LinearFit auc_vs_log2n(const std::vector<std::pair<int, double>>& auc_by_n);

// Probability that a draw from `xs` exceeds one from `ys`, ties counted half.
// This is the Mann-Whitney U statistic normalized to [0, 1].
double mann_whitney_auc(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace opforge
