#include "opforge/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <tuple>

namespace opforge {

EntityPath count_path(const std::string& instance, const std::string& container) {
  return EntityPath{{{instance, SegmentRole::kCategoryInstance},
                     {container, SegmentRole::kContainer}}};
}

EntityPath rate_path(const std::string& attribute, const std::string& instance,
                     const std::string& container) {
  return EntityPath{{{attribute, SegmentRole::kAttribute},
                     {instance, SegmentRole::kCategoryInstance},
                     {container, SegmentRole::kContainer}}};
}

EntityPath attr_total_path(const std::string& attribute, const std::string& instance,
                           const std::string& container) {
  return EntityPath{{{attribute, SegmentRole::kCategoryAbstract},
                     {instance, SegmentRole::kCategoryInstance},
                     {container, SegmentRole::kContainer}}};
}

EntityPath abstract_total_path(const std::string& category, const std::string& container) {
  return EntityPath{{{category, SegmentRole::kCategoryAbstract},
                     {container, SegmentRole::kContainer}}};
}

EntityPath symbolic_path(const std::string& variable) {
  return EntityPath{{{variable, SegmentRole::kCategoryInstance}}};
}

bool relation_is_explicit(RelationKind kind) {
  return kind != RelationKind::kImplicitSum && kind != RelationKind::kImplicitProduct;
}

const char* relation_name(RelationKind kind) {
  switch (kind) {
    case RelationKind::kConstAssign: return "const-assign";
    case RelationKind::kCopy: return "copy";
    case RelationKind::kScale: return "scale";
    case RelationKind::kAddConst: return "add-const";
    case RelationKind::kSumList: return "sum-list";
    case RelationKind::kDifference: return "difference";
    case RelationKind::kScaledSum: return "scaled-sum";
    case RelationKind::kImplicitSum: return "implicit-sum";
    case RelationKind::kImplicitProduct: return "implicit-product";
  }
  return "unknown";
}

int op_cost(RelationKind kind, std::size_t n_sources) {
  const int n = static_cast<int>(n_sources);
  switch (kind) {
    case RelationKind::kConstAssign:
    case RelationKind::kCopy:
      return 0;
    case RelationKind::kScale:
    case RelationKind::kAddConst:
    case RelationKind::kDifference:
    case RelationKind::kImplicitProduct:
      return 1;
    case RelationKind::kSumList:
    case RelationKind::kImplicitSum:
      return n > 0 ? n - 1 : 0;
    case RelationKind::kScaledSum:
      return n;
  }
  return 0;
}

const char* subtask_name(Subtask s) {
  switch (s) {
    case Subtask::kSymbolic: return "symbolic";
    case Subtask::kMedium: return "medium";
    case Subtask::kHard: return "hard";
  }
  return "unknown";
}

const char* mode_name(Mode m) {
  return m == Mode::kForward ? "forward" : "reverse";
}

Subtask subtask_from_name(const std::string& name) {
  if (name == "symbolic") return Subtask::kSymbolic;
  if (name == "medium") return Subtask::kMedium;
  if (name == "hard") return Subtask::kHard;
  throw ConfigError("unknown subtask: " + name);
}

Mode mode_from_name(const std::string& name) {
  if (name == "forward") return Mode::kForward;
  if (name == "reverse") return Mode::kReverse;
  throw ConfigError("unknown mode: " + name);
}

void ComputationGraph::add_node(Node node) {
  if (node_index_.count(node.id)) {
    throw GraphError("duplicate node id: " + node.id);
  }
  const std::string key = node.path.key();
  if (path_index_.count(key)) {
    throw GraphError("duplicate entity path: " + key);
  }
  node_index_[node.id] = nodes_.size();
  path_index_[key] = nodes_.size();
  nodes_.push_back(std::move(node));
}

void ComputationGraph::add_edge(Edge edge) {
  if (edge_index_.count(edge.target)) {
    throw GraphError("node already has a defining relation: " + edge.target);
  }
  if (!node_index_.count(edge.target)) {
    throw GraphError("edge targets unknown node id: " + edge.target);
  }
  edge_index_[edge.target] = edges_.size();
  edges_.push_back(std::move(edge));
}

void ComputationGraph::set_const_literal(const std::string& target, std::int64_t k) {
  auto it = edge_index_.find(target);
  if (it == edge_index_.end() ||
      edges_[it->second].kind != RelationKind::kConstAssign) {
    throw GraphError("node has no const definition to rewrite: " + target);
  }
  edges_[it->second].k = k;
}

bool ComputationGraph::has_node(const std::string& id) const {
  return node_index_.count(id) > 0;
}

const Node& ComputationGraph::node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw GraphError("unknown node id: " + id);
  return nodes_[it->second];
}

const Edge* ComputationGraph::defining_edge(const std::string& id) const {
  auto it = edge_index_.find(id);
  return it == edge_index_.end() ? nullptr : &edges_[it->second];
}

const Node* ComputationGraph::find_by_path(const EntityPath& path) const {
  auto it = path_index_.find(path.key());
  return it == path_index_.end() ? nullptr : &nodes_[it->second];
}

const std::string& ComputationGraph::evaluation_root() const {
  if (mode == Mode::kReverse) {
    if (!anchor) throw GraphError("reverse graph without anchor");
    return anchor->node;
  }
  return query;
}

namespace {

// Ancestor closure of `root` following defining edges.
std::set<std::string> ancestor_closure(const ComputationGraph& graph,
                                       const std::string& root) {
  if (!graph.has_node(root)) throw GraphError("unknown root node id: " + root);
  std::set<std::string> seen;
  std::vector<std::string> stack{root};
  while (!stack.empty()) {
    std::string id = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    if (const Edge* def = graph.defining_edge(id)) {
      for (const auto& src : def->sources) {
        if (!graph.has_node(src)) {
          throw GraphError("edge on '" + id + "' references unknown node id: " + src);
        }
        if (!seen.count(src)) stack.push_back(src);
      }
    }
  }
  return seen;
}

}  // namespace

ValidationReport validate_dag(const ComputationGraph& graph) {
  // Source existence first: a dangling id is a structural error, not a cycle.
  for (const auto& edge : graph.edges()) {
    for (const auto& src : edge.sources) {
      if (!graph.has_node(src)) {
        throw GraphError("edge on '" + edge.target + "' references unknown node id: " + src);
      }
    }
  }

  // Kahn's algorithm over defining edges.
  std::map<std::string, int> pending;  // unresolved source count per node
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& node : graph.nodes()) pending[node.id] = 0;
  for (const auto& edge : graph.edges()) {
    pending[edge.target] += static_cast<int>(edge.sources.size());
    for (const auto& src : edge.sources) dependents[src].push_back(edge.target);
  }

  std::vector<std::string> ready;
  for (const auto& [id, count] : pending) {
    if (count == 0) ready.push_back(id);
  }
  std::size_t resolved = 0;
  while (!ready.empty()) {
    std::string id = std::move(ready.back());
    ready.pop_back();
    ++resolved;
    for (const auto& dep : dependents[id]) {
      if (--pending[dep] == 0) ready.push_back(dep);
    }
  }

  ValidationReport report;
  report.ok = resolved == graph.nodes().size();
  if (!report.ok) {
    // Walk defining sources inside the unresolved set until a node repeats;
    // the repeated suffix is a directed cycle.
    std::string start;
    for (const auto& [id, count] : pending) {
      if (count > 0) {
        start = id;
        break;
      }
    }
    std::vector<std::string> trail;
    std::map<std::string, std::size_t> seen_at;
    std::string cur = start;
    while (!seen_at.count(cur)) {
      seen_at[cur] = trail.size();
      trail.push_back(cur);
      const Edge* def = graph.defining_edge(cur);
      for (const auto& src : def->sources) {
        if (pending[src] > 0) {
          cur = src;
          break;
        }
      }
    }
    report.cycle.assign(trail.begin() + static_cast<std::ptrdiff_t>(seen_at[cur]),
                        trail.end());
    std::reverse(report.cycle.begin(), report.cycle.end());  // edge direction
  }
  return report;
}

std::vector<std::string> topo_order(const ComputationGraph& graph,
                                    const std::string& root) {
  const std::string& r = root.empty() ? graph.evaluation_root() : root;
  std::set<std::string> closure = ancestor_closure(graph, r);

  std::map<std::string, int> pending;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& id : closure) pending[id] = 0;
  for (const auto& id : closure) {
    if (const Edge* def = graph.defining_edge(id)) {
      pending[id] = static_cast<int>(def->sources.size());
      for (const auto& src : def->sources) dependents[src].push_back(id);
    }
  }

  // Min-heap on node id keeps the order deterministic and relabel-sensitive
  // only in tie-breaks.
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, count] : pending) {
    if (count == 0) ready.push(id);
  }
  std::vector<std::string> order;
  order.reserve(closure.size());
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& dep : dependents[id]) {
      if (--pending[dep] == 0) ready.push(dep);
    }
  }
  if (order.size() != closure.size()) {
    throw GraphError("cycle within ancestor closure of: " + r);
  }
  return order;
}

int op_count(const ComputationGraph& graph, const std::string& root) {
  const std::string& r = root.empty() ? graph.evaluation_root() : root;
  int total = 0;
  for (const auto& id : ancestor_closure(graph, r)) {
    if (const Edge* def = graph.defining_edge(id)) {
      total += op_cost(def->kind, def->sources.size());
    }
  }
  return total;
}

ComputationGraph core_subgraph(const ComputationGraph& graph) {
  ComputationGraph out;
  out.subtask = graph.subtask;
  out.mode = graph.mode;
  out.query = graph.query;
  out.anchor = graph.anchor;
  out.find_all_target = graph.find_all_target;

  if (graph.subtask == Subtask::kSymbolic) {
    // Find-all systems have no query node; the injection-time noise marks are
    // the only core/noise distinction available.
    for (const auto& node : graph.nodes()) {
      if (!node.noise) out.add_node(node);
    }
    for (const auto& edge : graph.edges()) {
      if (out.has_node(edge.target)) out.add_edge(edge);
    }
    return out;
  }

  std::set<std::string> closure = ancestor_closure(graph, graph.evaluation_root());
  if (graph.mode == Mode::kReverse) closure.insert(graph.query);
  for (const auto& node : graph.nodes()) {
    if (closure.count(node.id)) out.add_node(node);
  }
  for (const auto& edge : graph.edges()) {
    if (closure.count(edge.target)) out.add_edge(edge);
  }
  return out;
}

bool structural_equal(const ComputationGraph& a, const ComputationGraph& b) {
  if (a.subtask != b.subtask || a.mode != b.mode || a.query != b.query ||
      a.anchor != b.anchor || a.find_all_target != b.find_all_target) {
    return false;
  }
  if (a.nodes_.size() != b.nodes_.size() || a.edges_.size() != b.edges_.size()) {
    return false;
  }
  auto node_key = [](const Node& n) {
    return std::make_pair(n.id, n.path.key() + (n.kind == NodeKind::kAbstract ? "#a" : "#i"));
  };
  std::set<std::pair<std::string, std::string>> an, bn;
  for (const auto& n : a.nodes_) an.insert(node_key(n));
  for (const auto& n : b.nodes_) bn.insert(node_key(n));
  if (an != bn) return false;
  for (const auto& e : a.edges_) {
    const Edge* other = b.defining_edge(e.target);
    if (!other || !(*other == e)) return false;
  }
  return true;
}

bool equivalent_structure(const ComputationGraph& a, const ComputationGraph& b) {
  if (a.subtask != b.subtask || a.mode != b.mode ||
      a.find_all_target != b.find_all_target) {
    return false;
  }
  auto path_of = [](const ComputationGraph& g, const std::string& id) {
    return g.node(id).path.key();
  };
  if (a.query.empty() != b.query.empty()) return false;
  if (!a.query.empty() && path_of(a, a.query) != path_of(b, b.query)) return false;
  if (a.anchor.has_value() != b.anchor.has_value()) return false;
  if (a.anchor && (a.anchor->value != b.anchor->value ||
                   path_of(a, a.anchor->node) != path_of(b, b.anchor->node))) {
    return false;
  }

  auto node_set = [](const ComputationGraph& g) {
    std::set<std::pair<std::string, NodeKind>> out;
    for (const auto& n : g.nodes()) out.emplace(n.path.key(), n.kind);
    return out;
  };
  if (node_set(a) != node_set(b)) return false;

  using EdgeSig = std::tuple<RelationKind, std::int64_t, std::vector<std::string>>;
  auto edge_map = [&](const ComputationGraph& g) {
    std::map<std::string, EdgeSig> out;
    for (const auto& e : g.edges()) {
      std::vector<std::string> sources;
      for (const auto& src : e.sources) sources.push_back(path_of(g, src));
      out[path_of(g, e.target)] = {e.kind, e.k, std::move(sources)};
    }
    return out;
  };
  return edge_map(a) == edge_map(b);
}

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b, const std::string& at) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw DataError("integer overflow at node: " + at);
  return out;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b, const std::string& at) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) throw DataError("integer overflow at node: " + at);
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const std::string& at) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw DataError("integer overflow at node: " + at);
  return out;
}

}  // namespace

std::int64_t apply_relation(const Edge& edge,
                            const std::map<std::string, std::int64_t>& values) {
  auto value_of = [&](const std::string& id) { return values.at(id); };
  switch (edge.kind) {
    case RelationKind::kConstAssign:
      return edge.k;
    case RelationKind::kCopy:
      return value_of(edge.sources[0]);
    case RelationKind::kScale:
      return checked_mul(edge.k, value_of(edge.sources[0]), edge.target);
    case RelationKind::kAddConst:
      return checked_add(edge.k, value_of(edge.sources[0]), edge.target);
    case RelationKind::kDifference:
      return checked_sub(value_of(edge.sources[0]), value_of(edge.sources[1]), edge.target);
    case RelationKind::kSumList:
    case RelationKind::kImplicitSum: {
      std::int64_t acc = 0;
      for (const auto& src : edge.sources) acc = checked_add(acc, value_of(src), edge.target);
      return acc;
    }
    case RelationKind::kScaledSum: {
      std::int64_t acc = 0;
      for (const auto& src : edge.sources) acc = checked_add(acc, value_of(src), edge.target);
      return checked_mul(edge.k, acc, edge.target);
    }
    case RelationKind::kImplicitProduct:
      return checked_mul(value_of(edge.sources[0]), value_of(edge.sources[1]), edge.target);
  }
  throw GraphError("unhandled relation kind");
}

std::int64_t evaluate(const ComputationGraph& graph, const std::string& target,
                      const std::map<std::string, std::int64_t>& leaf_overrides) {
  std::map<std::string, std::int64_t> values;
  for (const auto& id : topo_order(graph, target)) {
    if (const Edge* def = graph.defining_edge(id)) {
      values[id] = apply_relation(*def, values);
    } else if (auto it = leaf_overrides.find(id); it != leaf_overrides.end()) {
      values[id] = it->second;
    } else {
      throw DataError("node has no defining relation and no supplied value: " + id);
    }
  }
  return values.at(target);
}

void verify_values(const ValuedGraph& valued) {
  const auto& graph = valued.graph;
  for (const auto& node : graph.nodes()) {
    auto stored = valued.values.find(node.id);
    if (stored == valued.values.end()) {
      throw DataError("missing stored value for node: " + node.id);
    }
    if (graph.defining_edge(node.id) == nullptr) continue;  // masked leaf
    const std::int64_t computed = evaluate(graph, node.id, valued.values);
    if (computed != stored->second) {
      throw DataError("stored value mismatch at node " + node.id + ": stored " +
                      std::to_string(stored->second) + ", computed " +
                      std::to_string(computed));
    }
  }
}

}  // namespace opforge
