#include "opforge/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

namespace opforge {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Integer literals with optional 3-digit comma groups, standing free of
// identifiers ("V705804" contributes nothing). Returns value and whether one
// was found at all.
std::optional<std::int64_t> last_integer(std::string_view text) {
  std::optional<std::int64_t> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    const bool digit = std::isdigit(static_cast<unsigned char>(c)) != 0;
    const bool neg = c == '-' && i + 1 < n &&
                     std::isdigit(static_cast<unsigned char>(text[i + 1])) != 0;
    if ((!digit && !neg) || (i > 0 && word_char(text[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i + (neg ? 1 : 0);
    __int128 value = 0;
    bool overflow = false;
    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) {
      value = value * 10 + (text[j] - '0');
      if (value > std::numeric_limits<std::int64_t>::max()) overflow = true;
      ++j;
    }
    // consume ",ddd" groups
    while (j + 4 <= n && text[j] == ',' &&
           std::isdigit(static_cast<unsigned char>(text[j + 1])) &&
           std::isdigit(static_cast<unsigned char>(text[j + 2])) &&
           std::isdigit(static_cast<unsigned char>(text[j + 3])) &&
           (j + 4 == n || !std::isdigit(static_cast<unsigned char>(text[j + 4])))) {
      for (int k = 1; k <= 3; ++k) {
        value = value * 10 + (text[j + k] - '0');
        if (value > std::numeric_limits<std::int64_t>::max()) overflow = true;
      }
      j += 4;
    }
    if (!overflow && !(j < n && word_char(text[j]))) {
      out = static_cast<std::int64_t>(neg ? -value : value);
    }
    i = j;
  }
  return out;
}

// Span from the final mention of "answer" to the end of that sentence.
std::optional<std::string_view> answer_span(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::size_t pos = lowered.rfind("answer");
  if (pos == std::string::npos) return std::nullopt;
  std::size_t end = pos;
  while (end < text.size()) {
    const char c = text[end];
    if (c == '\n') break;
    if (c == '.' && (end + 1 == text.size() || text[end + 1] == ' ' || text[end + 1] == '\n')) {
      ++end;
      break;
    }
    ++end;
  }
  return text.substr(pos, end - pos);
}

std::vector<std::string> identifiers_in(std::string_view text) {
  std::set<std::string> seen;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (text[i] != 'V') continue;
    if (i > 0 && word_char(text[i - 1])) continue;
    std::size_t j = i + 1;
    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i + 1 && !(j < n && word_char(text[j]))) {
      seen.insert(std::string(text.substr(i, j - i)));
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

ExtractedAnswer extract_answer(const std::string& completion, bool symbolic) {
  ExtractedAnswer out;
  out.symbolic = symbolic;
  if (symbolic) {
    if (completion.empty()) return out;
    const auto span = answer_span(completion);
    out.names = identifiers_in(span ? *span : std::string_view(completion));
    out.found = true;
    return out;
  }
  std::optional<std::int64_t> value;
  if (const auto span = answer_span(completion)) value = last_integer(*span);
  if (!value) value = last_integer(completion);
  if (value) {
    out.found = true;
    out.value = *value;
  }
  return out;
}

bool grade(const ExtractedAnswer& extracted, const GoldAnswer& gold) {
  if (!extracted.found || extracted.symbolic != gold.symbolic) return false;
  if (gold.symbolic) {
    std::vector<std::string> want = gold.names;
    std::sort(want.begin(), want.end());
    return extracted.names == want;
  }
  return extracted.value == gold.value;
}

// ---------------------------------------------------------------------------

void AccuracyCurve::add(int op, bool correct) {
  OpBucket& bucket = buckets_[op];
  ++bucket.total;
  if (correct) ++bucket.correct;
}

double AccuracyCurve::accuracy_at(int op) const {
  auto it = buckets_.find(op);
  if (it == buckets_.end()) {
    throw DataError("accuracy curve has no samples at op " + std::to_string(op));
  }
  return it->second.accuracy();
}

AccuracyCurve curve_from_records(const std::vector<EvalRecord>& records) {
  AccuracyCurve curve;
  for (const auto& record : records) {
    if (record.failure == "infrastructure") continue;
    curve.add(record.op, record.correct);
  }
  return curve;
}

AucResult auc_to_threshold(const AccuracyCurve& curve, double threshold) {
  AucResult out;
  out.threshold = threshold;
  int op = 2;
  while (curve.has(op)) {
    const double accuracy = curve.accuracy_at(op);
    if (accuracy < threshold) {
      out.cutoff_op = op;
      return out;
    }
    out.auc += accuracy * 100.0;
    ++op;
  }
  out.cutoff_op = op;
  out.right_censored = true;
  return out;
}

CurveStats curve_stats(const AccuracyCurve& curve) {
  CurveStats out;
  double sum = 0;
  int count = 0;
  for (const auto& [op, bucket] : curve.buckets()) {
    const double accuracy = bucket.accuracy();
    if (!out.first_below_half && accuracy < 0.5) out.first_below_half = op;
    if (!out.first_below_tenth && accuracy < 0.1) out.first_below_tenth = op;
    if (op >= 2 && op <= 31) {
      sum += accuracy;
      ++count;
    }
  }
  out.mean_accuracy_2_31 = count == 0 ? 0.0 : sum / count;
  return out;
}

// ---------------------------------------------------------------------------

double sigmoid_value(double s, double m, double op) {
  return 1.0 / (1.0 + std::exp(s * (op - m)));
}

namespace {

double sse_for(const std::vector<std::pair<double, double>>& points, double s, double m) {
  double sse = 0;
  for (const auto& [x, y] : points) {
    const double r = y - sigmoid_value(s, m, x);
    sse += r * r;
  }
  return sse;
}

}  // namespace

SigmoidFit fit_sigmoid(const std::vector<std::pair<double, double>>& points) {
  SigmoidFit out;
  if (points.size() < 3) return out;

  double y_mean = 0;
  double x_min = points.front().first, x_max = points.front().first;
  for (const auto& [x, y] : points) {
    y_mean += y;
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }
  y_mean /= static_cast<double>(points.size());
  double sst = 0;
  for (const auto& [x, y] : points) sst += (y - y_mean) * (y - y_mean);
  if (sst < 1e-12) return out;  // flat curve carries no transition to fit

  // Seed from a coarse grid, then polish with damped Gauss-Newton.
  double s = 0.5, m = (x_min + x_max) / 2, best_seed = std::numeric_limits<double>::max();
  for (double s0 : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
    for (int i = 0; i <= 8; ++i) {
      const double m0 = x_min + (x_max - x_min) * i / 8.0;
      const double sse = sse_for(points, s0, m0);
      if (sse < best_seed) {
        best_seed = sse;
        s = s0;
        m = m0;
      }
    }
  }

  double sse = sse_for(points, s, m);
  double lambda = 1e-3;
  int iterations = 0;
  for (; iterations < 200; ++iterations) {
    double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
    for (const auto& [x, y] : points) {
      const double f = sigmoid_value(s, m, x);
      const double gate = f * (1.0 - f);
      const double ds = -(x - m) * gate;
      const double dm = s * gate;
      const double r = y - f;
      a11 += ds * ds;
      a12 += ds * dm;
      a22 += dm * dm;
      g1 += ds * r;
      g2 += dm * r;
    }
    bool stepped = false;
    while (lambda < 1e12) {
      const double b11 = a11 * (1 + lambda), b22 = a22 * (1 + lambda);
      const double det = b11 * b22 - a12 * a12;
      if (std::abs(det) < 1e-300) {
        lambda *= 5;
        continue;
      }
      const double step_s = (g1 * b22 - g2 * a12) / det;
      const double step_m = (g2 * b11 - g1 * a12) / det;
      const double trial_sse = sse_for(points, s + step_s, m + step_m);
      if (trial_sse < sse) {
        s += step_s;
        m += step_m;
        sse = trial_sse;
        lambda = std::max(lambda / 3, 1e-12);
        stepped = std::abs(step_s) + std::abs(step_m) > 1e-12;
        break;
      }
      lambda *= 5;
    }
    if (!stepped) break;
  }

  out.steepness = s;
  out.midpoint = m;
  out.r_squared = 1.0 - sse / sst;
  out.iterations = iterations;
  out.ok = s > 0 && std::isfinite(s) && std::isfinite(m) && std::isfinite(out.r_squared);
  return out;
}

SigmoidFit fit_sigmoid(const AccuracyCurve& curve) {
  std::vector<std::pair<double, double>> points;
  for (const auto& [op, bucket] : curve.buckets()) {
    points.emplace_back(op, bucket.accuracy());
  }
  return fit_sigmoid(points);
}

// ---------------------------------------------------------------------------

double repeated_sampling_accuracy(double p, int n) {
  if (p < 0 || p > 1) throw ConfigError("repeated sampling: p must be in [0, 1]");
  if (n < 1) throw ConfigError("repeated sampling: n must be positive");
  if (p == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

LinearFit ols(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ConfigError("ols needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw ConfigError("ols: degenerate x values");

  LinearFit out;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;

  const double y_mean = sy / n;
  double sse = 0, sst = 0;
  for (const auto& [x, y] : points) {
    const double e = y - (out.slope * x + out.intercept);
    sse += e * e;
    sst += (y - y_mean) * (y - y_mean);
  }
  out.r_squared = sst < 1e-300 ? (sse < 1e-300 ? 1.0 : 0.0) : 1.0 - sse / sst;
  return out;
}

LinearFit auc_vs_log2n(const std::vector<std::pair<int, double>>& auc_by_n) {
  std::vector<std::pair<double, double>> points;
  for (const auto& [n, auc] : auc_by_n) {
    if (n < 1) throw ConfigError("sample counts must be positive");
    points.emplace_back(std::log2(static_cast<double>(n)), auc);
  }
  return ols(points);
}

double mann_whitney_auc(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || ys.empty()) throw ConfigError("mann-whitney: empty sample");
  double wins = 0;
  for (const double x : xs) {
    for (const double y : ys) {
      if (x > y) {
        wins += 1;
      } else if (x == y) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

}  // namespace opforge
