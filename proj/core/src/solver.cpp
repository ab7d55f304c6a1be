#include "opforge/solver.hpp"

#include <algorithm>
#include <set>

namespace opforge {

std::string to_string(const Rational& r) {
  std::string out = r.numerator().str();
  if (r.denominator() != 1) out += "/" + r.denominator().str();
  return out;
}

std::string to_string(const LinExpr& e, const std::string& var) {
  if (!e.depends_on_x()) return to_string(e.offset);
  std::string out;
  if (e.coeff == Rational(1)) {
    out = var;
  } else if (e.coeff == Rational(-1)) {
    out = "-" + var;
  } else {
    out = to_string(e.coeff) + " * " + var;
  }
  if (e.offset > Rational(0)) {
    out += " + " + to_string(e.offset);
  } else if (e.offset < Rational(0)) {
    out += " - " + to_string(-e.offset);
  }
  return out;
}

const char* solve_status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kSolved: return "solved";
    case SolveStatus::kNonlinear: return "nonlinear";
    case SolveStatus::kInconsistent: return "inconsistent";
    case SolveStatus::kUnderdetermined: return "underdetermined";
    case SolveStatus::kNonInteger: return "non-integer";
    case SolveStatus::kOutOfRange: return "out-of-range";
  }
  return "unknown";
}

namespace {

std::vector<Anchor> effective_anchors(const ComputationGraph& graph,
                                      const std::vector<Anchor>& extra) {
  std::vector<Anchor> anchors = extra;
  if (anchors.empty()) {
    if (!graph.anchor) throw GraphError("reverse solve without any anchor");
    anchors.push_back(*graph.anchor);
  }
  return anchors;
}

}  // namespace

LinearForms propagate_linear(const ComputationGraph& graph, const std::string& masked,
                             const std::vector<Anchor>& anchors) {
  if (!graph.has_node(masked)) throw GraphError("unknown masked node id: " + masked);
  if (graph.defining_edge(masked) != nullptr) {
    throw GraphError("masked node still has a defining relation: " + masked);
  }

  // Union of the anchors' ancestor closures, in one deterministic topo order.
  std::set<std::string> wanted;
  std::vector<std::string> order;
  for (const auto& anchor : anchors) {
    for (const auto& id : topo_order(graph, anchor.node)) {
      if (wanted.insert(id).second) order.push_back(id);
    }
  }
  // `order` is a concatenation of topo orders; re-sorting by dependency is
  // unnecessary because each node's sources precede it within its own pass
  // and forms are idempotent across passes.

  LinearForms out;
  std::set<std::string> poisoned;

  auto mark_nonlinear = [&](const std::string& id) {
    poisoned.insert(id);
    if (!out.nonlinear_at) out.nonlinear_at = id;
  };

  for (const auto& id : order) {
    if (out.forms.count(id) || poisoned.count(id)) continue;
    if (id == masked) {
      out.forms[id] = LinExpr{Rational(1), Rational(0)};
      continue;
    }
    const Edge* def = graph.defining_edge(id);
    if (def == nullptr) {
      throw DataError("node has no defining relation and is not the masked leaf: " + id);
    }
    bool bad_source = false;
    for (const auto& src : def->sources) {
      if (poisoned.count(src)) {
        poisoned.insert(id);
        bad_source = true;
        break;
      }
    }
    if (bad_source) continue;

    auto form_of = [&](const std::string& src) -> const LinExpr& { return out.forms.at(src); };
    LinExpr e;
    switch (def->kind) {
      case RelationKind::kConstAssign:
        e.offset = Rational(def->k);
        break;
      case RelationKind::kCopy:
        e = form_of(def->sources[0]);
        break;
      case RelationKind::kScale: {
        const LinExpr& s = form_of(def->sources[0]);
        e.coeff = s.coeff * Rational(def->k);
        e.offset = s.offset * Rational(def->k);
        break;
      }
      case RelationKind::kAddConst: {
        const LinExpr& s = form_of(def->sources[0]);
        e.coeff = s.coeff;
        e.offset = s.offset + Rational(def->k);
        break;
      }
      case RelationKind::kDifference: {
        const LinExpr& a = form_of(def->sources[0]);
        const LinExpr& b = form_of(def->sources[1]);
        e.coeff = a.coeff - b.coeff;
        e.offset = a.offset - b.offset;
        break;
      }
      case RelationKind::kSumList:
      case RelationKind::kImplicitSum: {
        for (const auto& src : def->sources) {
          const LinExpr& s = form_of(src);
          e.coeff += s.coeff;
          e.offset += s.offset;
        }
        break;
      }
      case RelationKind::kScaledSum: {
        for (const auto& src : def->sources) {
          const LinExpr& s = form_of(src);
          e.coeff += s.coeff;
          e.offset += s.offset;
        }
        e.coeff *= Rational(def->k);
        e.offset *= Rational(def->k);
        break;
      }
      case RelationKind::kImplicitProduct: {
        const LinExpr& a = form_of(def->sources[0]);
        const LinExpr& b = form_of(def->sources[1]);
        if (a.depends_on_x() && b.depends_on_x()) {
          mark_nonlinear(id);
          continue;
        }
        // One side is a constant; the product stays linear in x.
        if (a.depends_on_x()) {
          e.coeff = a.coeff * b.offset;
          e.offset = a.offset * b.offset;
        } else {
          e.coeff = b.coeff * a.offset;
          e.offset = b.offset * a.offset;
        }
        break;
      }
    }
    out.forms[id] = std::move(e);
  }
  return out;
}

ReverseSolveResult solve_reverse(const ComputationGraph& graph,
                                 const std::vector<Anchor>& extra_anchors) {
  const std::vector<Anchor> anchors = effective_anchors(graph, extra_anchors);
  const LinearForms lf = propagate_linear(graph, graph.query, anchors);

  std::optional<Rational> solution;
  for (const auto& anchor : anchors) {
    auto it = lf.forms.find(anchor.node);
    if (it == lf.forms.end()) return {SolveStatus::kNonlinear, 0};
    const LinExpr& e = it->second;
    if (!e.depends_on_x()) continue;
    Rational candidate = (Rational(anchor.value) - e.offset) / e.coeff;
    if (solution && *solution != candidate) return {SolveStatus::kInconsistent, 0};
    solution = candidate;
  }

  if (!solution) {
    // No anchored equation mentions x: fixed offsets decide between a vacuous
    // system and a contradictory one.
    for (const auto& anchor : anchors) {
      if (lf.forms.at(anchor.node).offset != Rational(anchor.value)) {
        return {SolveStatus::kInconsistent, 0};
      }
    }
    return {SolveStatus::kUnderdetermined, 0};
  }

  // Every remaining equation must hold at the solution.
  for (const auto& anchor : anchors) {
    const LinExpr& e = lf.forms.at(anchor.node);
    if (e.coeff * *solution + e.offset != Rational(anchor.value)) {
      return {SolveStatus::kInconsistent, 0};
    }
  }

  if (solution->denominator() != 1) return {SolveStatus::kNonInteger, 0};
  const BigInt num = solution->numerator();
  if (num < 1 || num > 999) return {SolveStatus::kOutOfRange, 0};
  return {SolveStatus::kSolved, num.convert_to<std::int64_t>()};
}

bool check_uniqueness(const ComputationGraph& graph,
                      const std::vector<Anchor>& extra_anchors) {
  const std::vector<Anchor> anchors = effective_anchors(graph, extra_anchors);
  const LinearForms lf = propagate_linear(graph, graph.query, anchors);
  for (const auto& anchor : anchors) {
    auto it = lf.forms.find(anchor.node);
    if (it != lf.forms.end() && it->second.depends_on_x()) return true;
  }
  return false;
}

std::vector<std::string> solve_find_all(const ComputationGraph& graph, std::int64_t target) {
  ValidationReport report = validate_dag(graph);
  if (!report.ok) {
    std::string names;
    for (const auto& id : report.cycle) names += (names.empty() ? "" : ", ") + id;
    throw DataError("cyclic equation system: " + names);
  }

  // Full-graph topological sweep; a variable is derivable when its defining
  // relation exists and every source was derivable.
  std::map<std::string, std::int64_t> values;
  bool progress = true;
  std::set<std::string> done;
  while (progress) {
    progress = false;
    for (const auto& node : graph.nodes()) {
      if (done.count(node.id)) continue;
      const Edge* def = graph.defining_edge(node.id);
      if (def == nullptr) {
        done.insert(node.id);  // referenced but never assigned: skipped
        progress = true;
        continue;
      }
      bool ready = true;
      for (const auto& src : def->sources) {
        if (!values.count(src)) {
          ready = false;
          break;
        }
      }
      if (!ready) continue;
      values[node.id] = apply_relation(*def, values);
      done.insert(node.id);
      progress = true;
    }
  }

  std::vector<std::string> matches;
  for (const auto& node : graph.nodes()) {
    auto it = values.find(node.id);
    if (it != values.end() && it->second == target) {
      matches.push_back(node.path.segments.front().name);
    }
  }
  std::sort(matches.begin(), matches.end());
  return matches;
}

}  // namespace opforge
