#include "opforge/render.hpp"

#include <algorithm>

#include "opforge/solver.hpp"

namespace opforge {

const char* const kReasoningInstruction =
    "Show your step-by-step reasoning and calculations, and then conclude your "
    "final answer in a sentence.";

const char* const kFindAllPreamble =
    "The context contains relationships between variables. These relationships "
    "are independent mathematical equations that are all satisfied simultaneously.";

namespace {

std::string substitute(std::string pattern, const std::string& placeholder,
                       const std::string& value) {
  const std::string token = "{" + placeholder + "}";
  const std::size_t pos = pattern.find(token);
  if (pos != std::string::npos) pattern.replace(pos, token.size(), value);
  return pattern;
}

std::string capitalized(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') {
    text[0] = static_cast<char>(text[0] - 'a' + 'A');
  }
  return text;
}

// "A and B" for pairs, "A, B, and C" beyond; operands may repeat.
std::string join_operands(const std::vector<std::string>& names) {
  if (names.size() == 2) return names[0] + " and " + names[1];
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i + 1 == names.size()) {
      out += "and " + names[i];
    } else {
      out += names[i] + ", ";
    }
  }
  return out;
}

}  // namespace

std::string variable_name(const EntityPath& path, const Template& t) {
  const auto& segs = path.segments;
  switch (segs.size()) {
    case 1:
      return segs[0].name;
    case 2:
      if (segs[0].role == SegmentRole::kCategoryInstance) {
        std::string out = substitute(t.patterns.count, "instance", t.prefixed(segs[0].name));
        return substitute(out, "container", segs[1].name);
      }
      if (segs[0].role == SegmentRole::kCategoryAbstract) {
        std::string out = substitute(t.patterns.abstract_total, "category", segs[0].name);
        return substitute(out, "container", segs[1].name);
      }
      break;
    case 3:
      if (segs[0].role == SegmentRole::kAttribute) {
        std::string out = substitute(t.patterns.rate, "attribute", segs[0].name);
        out = substitute(out, "instance", t.prefixed(segs[1].name));
        return substitute(out, "container", segs[2].name);
      }
      if (segs[0].role == SegmentRole::kCategoryAbstract) {
        std::string out = substitute(t.patterns.attr_total, "attribute", segs[0].name);
        out = substitute(out, "instance", t.prefixed(segs[1].name));
        return substitute(out, "container", segs[2].name);
      }
      break;
    default:
      break;
  }
  throw RenderError("entity path has no rendering: " + path.key());
}

std::string unit_of(const EntityPath& path, const Template& t) {
  const auto& segs = path.segments;
  if (segs.size() == 1) return {};
  if (segs.size() == 2) return t.count_unit;
  return t.attribute_unit;  // rates and attribute totals
}

namespace {

std::string symbolic_rhs(const Edge& edge, const ComputationGraph& graph, const Template& t) {
  auto name = [&](const std::string& id) { return variable_name(graph.node(id).path, t); };
  switch (edge.kind) {
    case RelationKind::kConstAssign:
      return std::to_string(edge.k);
    case RelationKind::kCopy:
      return name(edge.sources[0]);
    case RelationKind::kAddConst:
      return name(edge.sources[0]) + " + " + std::to_string(edge.k);
    default:
      throw RenderError(std::string("relation not allowed in symbolic problems: ") +
                        relation_name(edge.kind));
  }
}

std::string numeric_rhs(const Edge& edge, const ComputationGraph& graph, const Template& t) {
  auto name = [&](const std::string& id) { return variable_name(graph.node(id).path, t); };
  auto names = [&] {
    std::vector<std::string> out;
    out.reserve(edge.sources.size());
    for (const auto& src : edge.sources) out.push_back(name(src));
    return out;
  };
  switch (edge.kind) {
    case RelationKind::kConstAssign:
      return std::to_string(edge.k);
    case RelationKind::kCopy:
      return name(edge.sources[0]);
    case RelationKind::kScale:
      return std::to_string(edge.k) + " times " + name(edge.sources[0]);
    case RelationKind::kAddConst:
      return std::to_string(edge.k) + " plus " + name(edge.sources[0]);
    case RelationKind::kDifference:
      return "the difference between " + name(edge.sources[0]) + " and " + name(edge.sources[1]);
    case RelationKind::kSumList:
      return "the sum of " + join_operands(names());
    case RelationKind::kScaledSum:
      return std::to_string(edge.k) + " times the sum of " + join_operands(names());
    case RelationKind::kImplicitSum:
    case RelationKind::kImplicitProduct:
      throw RenderError(std::string("implicit relation is never rendered: ") +
                        relation_name(edge.kind));
  }
  throw RenderError("unhandled relation kind");
}

void check_units(const Edge& edge, const ComputationGraph& graph, const Template& t) {
  const std::string target_unit = unit_of(graph.node(edge.target).path, t);
  for (const auto& src : edge.sources) {
    const std::string source_unit = unit_of(graph.node(src).path, t);
    if (source_unit != target_unit) {
      throw RenderError("unit mismatch in statement for '" + edge.target + "': " +
                        target_unit + " vs " + source_unit);
    }
  }
}

}  // namespace

std::string render_statement(const Edge& edge, const ComputationGraph& graph,
                             const Template& t) {
  if (!relation_is_explicit(edge.kind)) {
    throw RenderError(std::string("implicit relation is never rendered: ") +
                      relation_name(edge.kind));
  }
  if (graph.subtask == Subtask::kSymbolic) {
    return "assign " + variable_name(graph.node(edge.target).path, t) + " = " +
           symbolic_rhs(edge, graph, t) + ".";
  }
  check_units(edge, graph, t);
  const std::string name = variable_name(graph.node(edge.target).path, t);
  return capitalized(name) + " equals " + numeric_rhs(edge, graph, t) + ".";
}

std::string render_anchor_statement(const Anchor& anchor, const ComputationGraph& graph,
                                    const Template& t) {
  const std::string name = variable_name(graph.node(anchor.node).path, t);
  return capitalized(name) + " equals " + std::to_string(anchor.value) + ".";
}

std::string question_text(const ComputationGraph& graph, const Template& t,
                          const std::string& statement_run) {
  if (graph.subtask == Subtask::kSymbolic) {
    if (!graph.find_all_target) throw GraphError("symbolic graph without find-all target");
    return "<context>\n" + statement_run + "\n</context>\n\n" + kFindAllPreamble +
           "\nUsing only these relationships, determine which variables (if any) "
           "from which values can be derived are equal to " +
           std::to_string(*graph.find_all_target) + ".\n" + kReasoningInstruction;
  }
  const std::string asked = variable_name(graph.node(graph.query).path, t);
  return statement_run + " Question: What is " + asked + "?\n" + kReasoningInstruction;
}

RenderedProblem render_problem(const ComputationGraph& graph, const Template& t, Rng& rng) {
  struct Entry {
    std::string text;
    bool core;
  };
  std::vector<Entry> entries;
  for (const auto& edge : graph.edges()) {
    if (!relation_is_explicit(edge.kind)) continue;
    entries.push_back({render_statement(edge, graph, t), !graph.node(edge.target).noise});
  }
  if (graph.mode == Mode::kReverse) {
    if (!graph.anchor) throw GraphError("reverse graph without anchor");
    entries.push_back({render_anchor_statement(*graph.anchor, graph, t), true});
  }
  rng.shuffle(entries);

  RenderedProblem out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.statements.push_back(entries[i].text);
    if (entries[i].core) out.core_indices.push_back(static_cast<int>(i));
  }

  std::string run;
  for (std::size_t i = 0; i < out.statements.size(); ++i) {
    if (i) run += " ";
    run += out.statements[i];
  }
  out.question = question_text(graph, t, run);
  return out;
}

namespace {

std::string value_expr(const Edge& edge, const std::map<std::string, std::int64_t>& values) {
  auto v = [&](const std::string& id) { return std::to_string(values.at(id)); };
  switch (edge.kind) {
    case RelationKind::kConstAssign:
    case RelationKind::kCopy:
      return {};  // no intermediate expression worth printing
    case RelationKind::kScale:
      return std::to_string(edge.k) + " * " + v(edge.sources[0]);
    case RelationKind::kAddConst:
      return std::to_string(edge.k) + " + " + v(edge.sources[0]);
    case RelationKind::kDifference:
      return v(edge.sources[0]) + " - " + v(edge.sources[1]);
    case RelationKind::kSumList:
    case RelationKind::kImplicitSum: {
      std::string out;
      for (std::size_t i = 0; i < edge.sources.size(); ++i) {
        if (i) out += " + ";
        out += v(edge.sources[i]);
      }
      return out;
    }
    case RelationKind::kScaledSum: {
      std::string out = std::to_string(edge.k) + " * (";
      for (std::size_t i = 0; i < edge.sources.size(); ++i) {
        if (i) out += " + ";
        out += v(edge.sources[i]);
      }
      return out + ")";
    }
    case RelationKind::kImplicitProduct:
      return v(edge.sources[0]) + " * " + v(edge.sources[1]);
  }
  return {};
}

std::vector<std::string> forward_solution(const ValuedGraph& valued, const Template& t) {
  const auto& graph = valued.graph;
  std::vector<std::string> lines;
  for (const auto& id : topo_order(graph, graph.query)) {
    const Edge* def = graph.defining_edge(id);
    if (def == nullptr) throw DataError("underivable node in solution: " + id);
    const std::string name = variable_name(graph.node(id).path, t);
    const std::string expr = value_expr(*def, valued.values);
    const std::string value = std::to_string(valued.values.at(id));
    lines.push_back(expr.empty() ? name + " = " + value + "."
                                 : name + " = " + expr + " = " + value + ".");
  }
  lines.push_back("Answer: " + std::to_string(valued.values.at(graph.query)) + ".");
  return lines;
}

std::vector<std::string> reverse_solution(const ValuedGraph& valued, const Template& t) {
  const auto& graph = valued.graph;
  if (!graph.anchor) throw GraphError("reverse graph without anchor");
  const LinearForms lf = propagate_linear(graph, graph.query, {*graph.anchor});
  if (lf.nonlinear_at) throw DataError("nonlinear reverse graph in solution rendering");

  std::vector<std::string> lines;
  lines.push_back("Let x = " + variable_name(graph.node(graph.query).path, t) + ".");
  for (const auto& id : topo_order(graph, graph.anchor->node)) {
    if (id == graph.query) continue;
    const std::string name = variable_name(graph.node(id).path, t);
    lines.push_back(name + " = " + to_string(lf.forms.at(id)) + ".");
  }
  const std::int64_t answer = valued.values.at(graph.query);
  lines.push_back(to_string(lf.forms.at(graph.anchor->node)) + " = " +
                  std::to_string(graph.anchor->value) + ", so x = " +
                  std::to_string(answer) + ".");
  lines.push_back("Answer: " + std::to_string(answer) + ".");
  return lines;
}

std::vector<std::string> symbolic_solution(const ValuedGraph& valued, const Template& t) {
  const auto& graph = valued.graph;
  if (!graph.find_all_target) throw GraphError("symbolic graph without find-all target");
  std::vector<std::string> lines;
  // Creation order doubles as derivation order for generated systems; fall
  // back to skipping anything underivable. Distractor variables stay out of
  // the gold derivation.
  for (const auto& node : graph.nodes()) {
    if (node.noise) continue;
    auto it = valued.values.find(node.id);
    if (it == valued.values.end()) continue;
    lines.push_back(variable_name(node.path, t) + " = " + std::to_string(it->second) + ".");
  }
  const auto matches = solve_find_all(graph, *graph.find_all_target);
  std::string answer;
  for (const auto& name : matches) answer += (answer.empty() ? "" : ", ") + name;
  lines.push_back("Answer: " + (answer.empty() ? "none" : answer) + ".");
  return lines;
}

}  // namespace

std::vector<std::string> render_solution(const ValuedGraph& valued, const Template& t) {
  if (valued.graph.subtask == Subtask::kSymbolic) return symbolic_solution(valued, t);
  if (valued.graph.mode == Mode::kReverse) return reverse_solution(valued, t);
  return forward_solution(valued, t);
}

}  // namespace opforge
