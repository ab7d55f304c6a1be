#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "opforge/graph.hpp"

namespace opforge {

// Exact arithmetic for reverse-mode solving. Coefficients are products and
// sums of statement constants along arbitrarily deep chains, so fixed-width
// integers are not safe.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<BigInt>;

std::string to_string(const Rational& r);

// Linear form `coeff * x + offset` in the masked leaf x.
struct LinExpr {
  Rational coeff{0};
  Rational offset{0};

  bool depends_on_x() const { return coeff != Rational(0); }

  friend bool operator==(const LinExpr&, const LinExpr&) = default;
};

std::string to_string(const LinExpr& e, const std::string& var = "x");

// Linear forms of every node reachable upstream of the anchors. A node whose
// value multiplies two x-dependent operands is nonlinear in x; it and its
// dependents carry no form and the first such node is reported.
struct LinearForms {
  std::map<std::string, LinExpr> forms;
  std::optional<std::string> nonlinear_at;
};

LinearForms propagate_linear(const ComputationGraph& graph, const std::string& masked,
                             const std::vector<Anchor>& anchors);

enum class SolveStatus : std::uint8_t {
  kSolved,
  kNonlinear,        // x reached an implicit product on both operands
  kInconsistent,     // anchors contradict each other or the fixed offset
  kUnderdetermined,  // no anchored equation involves x
  kNonInteger,       // unique solution exists but is fractional
  kOutOfRange,       // unique integral solution outside [1, 999]
};

const char* solve_status_name(SolveStatus status);

struct ReverseSolveResult {
  SolveStatus status = SolveStatus::kUnderdetermined;
  std::int64_t value = 0;  // meaningful only when status == kSolved
};

// Solves for the masked leaf (graph.query) from anchored downstream values.
// With `extra_anchors` empty the graph's own anchor is used. Every anchored
// equation must be satisfied by the solution.
ReverseSolveResult solve_reverse(const ComputationGraph& graph,
                                 const std::vector<Anchor>& extra_anchors = {});

// True iff some anchored equation has a nonzero coefficient on the masked
// leaf, i.e. the anchor pins x to at most one value.
bool check_uniqueness(const ComputationGraph& graph,
                      const std::vector<Anchor>& extra_anchors = {});

// Find-all query over a symbolic equation system: values of every derivable
// variable, keeping those equal to `target`. Variables that are referenced
// but never assigned are skipped, not errors. Cycles raise DataError.
std::vector<std::string> solve_find_all(const ComputationGraph& graph, std::int64_t target);

}  // namespace opforge
