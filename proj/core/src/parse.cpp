#include "opforge/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "opforge/render.hpp"

namespace opforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::string decapitalized(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

bool parse_uint(const std::string& s, std::int64_t& out) {
  if (s.empty() || s.size() > 18) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  out = std::stoll(s);
  return true;
}

// Sentences are separated by ". "; vocabulary terms never contain periods.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t dot = text.find(". ", pos);
    if (dot == std::string::npos) {
      std::string rest = trim(text.substr(pos));
      if (!rest.empty()) out.push_back(rest);
      break;
    }
    out.push_back(trim(text.substr(pos, dot - pos + 1)));
    pos = dot + 2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pattern matching
// ---------------------------------------------------------------------------

struct CompiledPattern {
  std::vector<std::string> literals;      // size = placeholders.size() + 1
  std::vector<std::string> placeholders;  // in order of appearance
};

CompiledPattern compile_pattern(const std::string& pattern) {
  CompiledPattern out;
  std::string literal;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    if (pattern[pos] == '{') {
      const std::size_t close = pattern.find('}', pos);
      out.literals.push_back(literal);
      literal.clear();
      out.placeholders.push_back(pattern.substr(pos + 1, close - pos - 1));
      pos = close + 1;
    } else {
      literal += pattern[pos++];
    }
  }
  out.literals.push_back(literal);
  return out;
}

// Backtracking match of `text` against the compiled pattern; `accept`
// validates a full capture set and builds the result. Returns true on the
// first accepted capture assignment.
bool match_pattern(const std::string& text, const CompiledPattern& pattern,
                   const std::function<bool(const std::map<std::string, std::string>&)>& accept) {
  std::map<std::string, std::string> captures;
  std::function<bool(std::size_t, std::size_t)> step = [&](std::size_t pos,
                                                           std::size_t idx) -> bool {
    const std::string& literal = pattern.literals[idx];
    if (text.compare(pos, literal.size(), literal) != 0) return false;
    std::size_t after = pos + literal.size();
    if (idx == pattern.placeholders.size()) {
      return after == text.size() && accept(captures);
    }
    const std::string& next_literal = pattern.literals[idx + 1];
    if (idx + 1 == pattern.placeholders.size() && next_literal.empty()) {
      if (after >= text.size()) return false;
      captures[pattern.placeholders[idx]] = text.substr(after);
      if (accept(captures)) return true;
      captures.erase(pattern.placeholders[idx]);
      return false;
    }
    std::size_t search = after;
    while (search < text.size()) {
      const std::size_t hit = text.find(next_literal, search + 1);
      if (hit == std::string::npos || hit <= after) break;
      captures[pattern.placeholders[idx]] = text.substr(after, hit - after);
      if (step(hit, idx + 1)) return true;
      captures.erase(pattern.placeholders[idx]);
      search = hit;
    }
    return false;
  };
  return step(0, 0);
}

struct VariableMatcher {
  const Template& t;
  CompiledPattern count, rate, attr_total, abstract_total;
  std::set<std::string> containers;
  std::map<std::string, std::string> prefixed_to_bare;

  explicit VariableMatcher(const Template& tmpl)
      : t(tmpl),
        count(compile_pattern(tmpl.patterns.count)),
        rate(compile_pattern(tmpl.patterns.rate)),
        attr_total(compile_pattern(tmpl.patterns.attr_total)),
        abstract_total(compile_pattern(tmpl.patterns.abstract_total)) {
    for (const auto& c : tmpl.containers) containers.insert(c);
    for (const auto& i : tmpl.instances) prefixed_to_bare[tmpl.prefixed(i)] = i;
  }

  std::optional<EntityPath> match(const std::string& raw) const {
    const std::string text = decapitalized(trim(raw));
    std::optional<EntityPath> result;

    auto container_ok = [&](const std::map<std::string, std::string>& cap) {
      auto it = cap.find("container");
      return it != cap.end() && containers.count(it->second) > 0;
    };
    auto bare_instance = [&](const std::map<std::string, std::string>& cap)
        -> const std::string* {
      auto it = cap.find("instance");
      if (it == cap.end()) return nullptr;
      auto hit = prefixed_to_bare.find(it->second);
      return hit == prefixed_to_bare.end() ? nullptr : &hit->second;
    };

    // Three-segment shapes first; their patterns are the most specific.
    if (match_pattern(text, rate, [&](const auto& cap) {
          const std::string* inst = bare_instance(cap);
          if (!inst || !container_ok(cap) || cap.at("attribute") != t.attribute) return false;
          result = rate_path(t.attribute, *inst, cap.at("container"));
          return true;
        })) {
      return result;
    }
    if (match_pattern(text, attr_total, [&](const auto& cap) {
          const std::string* inst = bare_instance(cap);
          if (!inst || !container_ok(cap) || cap.at("attribute") != t.attribute) return false;
          result = attr_total_path(t.attribute, *inst, cap.at("container"));
          return true;
        })) {
      return result;
    }
    if (match_pattern(text, abstract_total, [&](const auto& cap) {
          if (!container_ok(cap) || cap.at("category") != t.abstract_category) return false;
          result = abstract_total_path(t.abstract_category, cap.at("container"));
          return true;
        })) {
      return result;
    }
    if (match_pattern(text, count, [&](const auto& cap) {
          const std::string* inst = bare_instance(cap);
          if (!inst || !container_ok(cap)) return false;
          result = count_path(*inst, cap.at("container"));
          return true;
        })) {
      return result;
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Numeric problems
// ---------------------------------------------------------------------------

struct ParsedStatement {
  EntityPath target;
  RelationKind kind = RelationKind::kConstAssign;
  std::vector<EntityPath> sources;
  std::int64_t k = 0;
};

// Splits a rendered operand list. Vocabulary bans ", " and " and " inside
// terms, so the separators are unambiguous up to backtracking on " and ".
std::vector<std::string> split_operand_list(const std::string& text,
                                            const VariableMatcher& matcher,
                                            const std::string& sentence) {
  std::vector<std::string> parts;
  if (text.find(", ") != std::string::npos) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = text.find(", ", pos);
      if (comma == std::string::npos) {
        parts.push_back(text.substr(pos));
        break;
      }
      parts.push_back(text.substr(pos, comma - pos));
      pos = comma + 2;
    }
    if (!parts.empty() && starts_with(parts.back(), "and ")) {
      parts.back() = parts.back().substr(4);
    }
    return parts;
  }
  // Two-operand list: exactly one top-level " and ".
  std::size_t pos = 0;
  while (true) {
    const std::size_t split = text.find(" and ", pos);
    if (split == std::string::npos) break;
    const std::string left = text.substr(0, split);
    const std::string right = text.substr(split + 5);
    if (matcher.match(left) && matcher.match(right)) return {left, right};
    pos = split + 1;
  }
  throw ParseError("cannot split operand list in: " + sentence);
}

EntityPath require_variable(const std::string& text, const VariableMatcher& matcher,
                            const std::string& sentence) {
  auto path = matcher.match(text);
  if (!path) throw ParseError("unknown quantity '" + trim(text) + "' in: " + sentence);
  return *path;
}

ParsedStatement parse_numeric_statement(const std::string& sentence,
                                        const VariableMatcher& matcher) {
  std::string body = trim(sentence);
  if (body.empty() || body.back() != '.') {
    throw ParseError("statement does not end with a period: " + sentence);
  }
  body.pop_back();

  const std::string divider = " equals ";
  const std::size_t split = body.find(divider);
  if (split == std::string::npos) {
    throw ParseError("statement has no 'equals' clause: " + sentence);
  }

  ParsedStatement out;
  out.target = require_variable(body.substr(0, split), matcher, sentence);
  std::string rhs = trim(body.substr(split + divider.size()));

  if (parse_uint(rhs, out.k)) {
    out.kind = RelationKind::kConstAssign;
    return out;
  }
  if (starts_with(rhs, "the difference between ")) {
    out.kind = RelationKind::kDifference;
    const std::string rest = rhs.substr(23);
    std::size_t pos = 0;
    while (true) {
      const std::size_t mid = rest.find(" and ", pos);
      if (mid == std::string::npos) {
        throw ParseError("cannot split difference operands in: " + sentence);
      }
      auto left = matcher.match(rest.substr(0, mid));
      auto right = matcher.match(rest.substr(mid + 5));
      if (left && right) {
        out.sources = {*left, *right};
        return out;
      }
      pos = mid + 1;
    }
  }
  if (starts_with(rhs, "the sum of ")) {
    out.kind = RelationKind::kSumList;
    for (const auto& part : split_operand_list(rhs.substr(11), matcher, sentence)) {
      out.sources.push_back(require_variable(part, matcher, sentence));
    }
    return out;
  }

  // Leading integer: scale, scaled-sum or add-const.
  const std::size_t space = rhs.find(' ');
  std::int64_t k = 0;
  if (space != std::string::npos && parse_uint(rhs.substr(0, space), k)) {
    const std::string tail = rhs.substr(space + 1);
    if (starts_with(tail, "times the sum of ")) {
      out.kind = RelationKind::kScaledSum;
      out.k = k;
      for (const auto& part : split_operand_list(tail.substr(17), matcher, sentence)) {
        out.sources.push_back(require_variable(part, matcher, sentence));
      }
      return out;
    }
    if (starts_with(tail, "times ")) {
      out.kind = RelationKind::kScale;
      out.k = k;
      out.sources = {require_variable(tail.substr(6), matcher, sentence)};
      return out;
    }
    if (starts_with(tail, "plus ")) {
      out.kind = RelationKind::kAddConst;
      out.k = k;
      out.sources = {require_variable(tail.substr(5), matcher, sentence)};
      return out;
    }
    throw ParseError("unsupported arithmetic clause in: " + sentence);
  }

  out.kind = RelationKind::kCopy;
  out.sources = {require_variable(rhs, matcher, sentence)};
  return out;
}

// Incremental graph assembly with get-or-create semantics keyed on paths.
class GraphAssembler {
 public:
  std::string get_or_create(const EntityPath& path, ComputationGraph& graph) {
    if (const Node* existing = graph.find_by_path(path)) return existing->id;
    Node node;
    node.id = next_id();
    node.path = path;
    node.kind = path.segments.front().role == SegmentRole::kCategoryAbstract
                    ? NodeKind::kAbstract
                    : NodeKind::kInstance;
    graph.add_node(node);
    return graph.nodes().back().id;
  }

 private:
  std::string next_id() {
    char buf[8];
    std::snprintf(buf, sizeof buf, "p%04d", counter_++);
    return buf;
  }
  int counter_ = 0;
};

ParsedProblem parse_numeric(const std::string& statements_text, const std::string& question_name,
                            const Template& t) {
  const VariableMatcher matcher(t);

  std::vector<ParsedStatement> statements;
  for (const auto& sentence : split_sentences(statements_text)) {
    // Off-topic filler carries no 'equals' clause; relation statements always
    // do, so anything without one is skipped rather than rejected.
    if (sentence.find(" equals ") == std::string::npos) continue;
    statements.push_back(parse_numeric_statement(sentence, matcher));
  }
  if (statements.empty()) throw ParseError("no statements found");

  ParsedProblem out;
  out.template_id = t.id;
  ComputationGraph& graph = out.graph;
  GraphAssembler assembler;

  // First pass: realize every mentioned node, then the question's node, so
  // implicit wiring below sees the complete entity population.
  struct Realized {
    std::string target;
    ParsedStatement stmt;
  };
  std::vector<Realized> defs;
  for (const auto& stmt : statements) {
    Realized r{assembler.get_or_create(stmt.target, graph), stmt};
    for (const auto& src : stmt.sources) assembler.get_or_create(src, graph);
    defs.push_back(std::move(r));
  }
  const EntityPath question_path = require_variable(question_name, matcher, question_name);
  const std::string question_id = assembler.get_or_create(question_path, graph);

  // Duplicate definitions mark a reverse problem: the const statement anchors
  // the node, the relation (or the implicit wiring below, for aggregates)
  // stays its definition. Anything else is contradictory text.
  std::optional<Anchor> anchor;
  std::vector<const Realized*> kept;
  {
    std::map<std::string, std::vector<const Realized*>> by_target;
    for (const auto& def : defs) by_target[def.target].push_back(&def);
    auto set_anchor = [&](const Realized* constant) {
      if (anchor) throw ParseError("multiple anchored statements");
      anchor = Anchor{constant->target, constant->stmt.k};
    };
    for (const auto& def : defs) {
      const auto& group = by_target[def.target];
      const bool is_abstract = graph.node(def.target).kind == NodeKind::kAbstract;
      if (is_abstract) {
        // Aggregates are defined implicitly; an explicit const on one can
        // only be an anchor.
        if (def.stmt.kind != RelationKind::kConstAssign || group.size() != 1) {
          throw ParseError("aggregate quantity has an explicit definition: " +
                           variable_name(def.stmt.target, t));
        }
        set_anchor(&def);
        continue;
      }
      if (group.size() == 1) {
        kept.push_back(&def);
        continue;
      }
      if (group.size() == 2) {
        const bool a_const = group[0]->stmt.kind == RelationKind::kConstAssign;
        const bool b_const = group[1]->stmt.kind == RelationKind::kConstAssign;
        if (a_const != b_const) {
          const Realized* constant = a_const ? group[0] : group[1];
          if (&def == constant) {
            set_anchor(constant);
          } else {
            kept.push_back(&def);
          }
          continue;
        }
      }
      throw ParseError("conflicting definitions for: " +
                       variable_name(def.stmt.target, t));
    }
  }

  for (const auto* def : kept) {
    Edge edge;
    edge.target = def->target;
    edge.kind = def->stmt.kind;
    edge.k = def->stmt.k;
    for (const auto& src : def->stmt.sources) {
      edge.sources.push_back(graph.find_by_path(src)->id);
    }
    try {
      graph.add_edge(std::move(edge));
    } catch (const GraphError& e) {
      throw ParseError(e.what());
    }
  }

  // Implicit wiring. Products first: they may realize count nodes that then
  // belong in their container's implicit sum.
  std::vector<std::pair<std::string, EntityPath>> abstract_nodes;
  for (const auto& node : graph.nodes()) {
    if (node.kind == NodeKind::kAbstract) abstract_nodes.emplace_back(node.id, node.path);
  }
  for (const auto& [id, path] : abstract_nodes) {
    if (path.segments.size() != 3) continue;
    const std::string& instance = path.segments[1].name;
    const std::string& container = path.segments[2].name;
    Edge edge;
    edge.target = id;
    edge.kind = RelationKind::kImplicitProduct;
    edge.sources.push_back(
        assembler.get_or_create(rate_path(t.attribute, instance, container), graph));
    edge.sources.push_back(assembler.get_or_create(count_path(instance, container), graph));
    graph.add_edge(std::move(edge));
  }
  for (const auto& [id, path] : abstract_nodes) {
    if (path.segments.size() != 2) continue;
    const std::string& container = path.segments[1].name;
    std::vector<std::pair<std::string, std::string>> members;  // path key -> id
    for (const auto& node : graph.nodes()) {
      if (node.path.segments.size() == 2 &&
          node.path.segments[0].role == SegmentRole::kCategoryInstance &&
          node.path.segments[1].name == container) {
        members.emplace_back(node.path.key(), node.id);
      }
    }
    if (members.empty()) {
      throw ParseError("total over a container with no counts: " + variable_name(path, t));
    }
    std::sort(members.begin(), members.end());
    Edge edge;
    edge.target = id;
    edge.kind = RelationKind::kImplicitSum;
    for (const auto& [key, member_id] : members) edge.sources.push_back(member_id);
    graph.add_edge(std::move(edge));
  }

  // Masked leaf: referenced but never defined.
  std::vector<std::string> undefined;
  for (const auto& node : graph.nodes()) {
    if (graph.defining_edge(node.id) == nullptr) undefined.push_back(node.id);
  }

  bool three_entity = false;
  for (const auto& node : graph.nodes()) {
    if (node.path.segments.size() == 3) three_entity = true;
  }
  graph.subtask = three_entity ? Subtask::kHard : Subtask::kMedium;

  if (anchor) {
    if (undefined.size() != 1) {
      throw ParseError("anchored statement without exactly one unknown quantity");
    }
    if (undefined[0] != question_id) {
      throw ParseError("question does not ask for the unknown quantity");
    }
    graph.mode = Mode::kReverse;
    graph.query = question_id;
    graph.anchor = anchor;
  } else {
    graph.mode = Mode::kForward;
    graph.query = question_id;
  }

  ValidationReport report = validate_dag(graph);
  if (!report.ok) {
    std::string cycle;
    for (const auto& id : report.cycle) cycle += (cycle.empty() ? "" : ", ") + id;
    throw ParseError("statements form a cycle: " + cycle);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic problems
// ---------------------------------------------------------------------------

bool valid_symbol(const std::string& name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

ParsedProblem parse_symbolic(const std::string& text) {
  ParsedProblem out;
  out.template_id = "symbolic";
  ComputationGraph& graph = out.graph;
  graph.subtask = Subtask::kSymbolic;
  graph.mode = Mode::kForward;

  std::string statements_region = text;
  const std::size_t open = text.find("<context>");
  const std::size_t close = text.find("</context>");
  if (open != std::string::npos && close != std::string::npos && close > open) {
    statements_region = text.substr(open + 9, close - open - 9);
  }

  auto get_or_create = [&](const std::string& name) -> std::string {
    if (!graph.has_node(name)) {
      graph.add_node(Node{name, symbolic_path(name), NodeKind::kInstance, false});
    }
    return name;
  };

  int parsed = 0;
  for (const auto& sentence : split_sentences(statements_region)) {
    if (!starts_with(sentence, "assign ")) continue;
    std::string body = sentence.substr(7);
    if (body.empty() || body.back() != '.') {
      throw ParseError("assignment does not end with a period: " + sentence);
    }
    body.pop_back();
    const std::size_t eq = body.find(" = ");
    if (eq == std::string::npos) throw ParseError("assignment without '=': " + sentence);
    const std::string target = trim(body.substr(0, eq));
    if (!valid_symbol(target)) throw ParseError("bad variable name in: " + sentence);
    const std::string rhs = trim(body.substr(eq + 3));

    Edge edge;
    edge.target = get_or_create(target);
    std::int64_t value = 0;
    const std::size_t plus = rhs.find(" + ");
    if (parse_uint(rhs, value)) {
      edge.kind = RelationKind::kConstAssign;
      edge.k = value;
    } else if (plus != std::string::npos) {
      const std::string operand = trim(rhs.substr(0, plus));
      if (!valid_symbol(operand) || !parse_uint(trim(rhs.substr(plus + 3)), value)) {
        throw ParseError("unsupported assignment: " + sentence);
      }
      edge.kind = RelationKind::kAddConst;
      edge.k = value;
      edge.sources = {get_or_create(operand)};
    } else if (valid_symbol(rhs)) {
      edge.kind = RelationKind::kCopy;
      edge.sources = {get_or_create(rhs)};
    } else {
      throw ParseError("unsupported assignment: " + sentence);
    }
    try {
      graph.add_edge(std::move(edge));
    } catch (const GraphError& e) {
      throw ParseError(e.what());
    }
    ++parsed;
  }
  if (parsed == 0) throw ParseError("no assignments found");

  const std::string marker = "equal to ";
  const std::size_t t_pos = text.rfind(marker);
  if (t_pos == std::string::npos) throw ParseError("find-all question without a target value");
  std::size_t digits_end = t_pos + marker.size();
  std::string digits;
  while (digits_end < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[digits_end]))) {
    digits += text[digits_end++];
  }
  std::int64_t target = 0;
  if (!parse_uint(digits, target)) {
    throw ParseError("find-all question without a target value");
  }
  graph.find_all_target = target;
  return out;
}

std::string strip_instructions(std::string text) {
  const std::size_t pos = text.find(kReasoningInstruction);
  if (pos != std::string::npos) text.erase(pos, std::string(kReasoningInstruction).size());
  return trim(text);
}

}  // namespace

EntityPath parse_variable(const std::string& text, const Template& t) {
  const VariableMatcher matcher(t);
  auto path = matcher.match(text);
  if (!path) throw ParseError("unknown quantity: " + trim(text));
  return *path;
}

ParsedProblem parse_problem(const std::string& text,
                            const std::vector<Template>& extra_templates) {
  if (text.find("assign ") != std::string::npos &&
      (text.find("<context>") != std::string::npos ||
       text.find("equal to ") != std::string::npos)) {
    return parse_symbolic(text);
  }

  std::string body = strip_instructions(text);
  if (starts_with(body, "Problem:")) body = trim(body.substr(8));

  const std::size_t q_pos = body.rfind("Question:");
  if (q_pos == std::string::npos) throw ParseError("no question clause found");
  std::string statements_text = trim(body.substr(0, q_pos));
  std::string question = trim(body.substr(q_pos + 9));

  const std::string asked_prefix = "What is ";
  if (!starts_with(question, asked_prefix) || question.back() != '?') {
    throw ParseError("unsupported question form: " + question);
  }
  const std::string question_name =
      question.substr(asked_prefix.size(), question.size() - asked_prefix.size() - 1);

  std::vector<const Template*> candidates;
  for (const auto& t : extra_templates) candidates.push_back(&t);
  for (const auto& t : builtin_templates()) candidates.push_back(&t);

  std::optional<ParseError> best_error;
  for (const Template* t : candidates) {
    try {
      return parse_numeric(statements_text, question_name, *t);
    } catch (const ParseError& e) {
      if (!best_error) best_error = e;
    }
  }
  throw best_error ? *best_error : ParseError("no template matched the problem text");
}

}  // namespace opforge
