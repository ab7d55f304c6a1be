#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opforge/errors.hpp"

namespace opforge {

// ---------------------------------------------------------------------------
// Entity paths
//
// Every quantity in a problem is addressed by a short path of named entity
// segments, outermost container last:
//
//   count of an instance        [category-instance, container]
//   per-instance rate           [attribute, category-instance, container]
//   attribute total (derived)   [category-abstract, category-instance, container]
//   abstract count total        [category-abstract, container]
//   symbolic variable           [category-instance]              (one segment)
//
// Paths are unique per node; the rate and the attribute total over the same
// (attribute, instance, container) triple stay distinct through the role of
// their first segment.
// ---------------------------------------------------------------------------

enum class SegmentRole : std::uint8_t {
  kAttribute,
  kCategoryInstance,
  kCategoryAbstract,
  kContainer,
};

struct EntitySegment {
  std::string name;
  SegmentRole role;

  friend bool operator==(const EntitySegment&, const EntitySegment&) = default;
  friend auto operator<=>(const EntitySegment&, const EntitySegment&) = default;
};

enum class ArityClass : std::uint8_t { kTwoEntity, kThreeEntity, kSymbolic };

struct EntityPath {
  std::vector<EntitySegment> segments;

  ArityClass arity() const {
    switch (segments.size()) {
      case 1: return ArityClass::kSymbolic;
      case 2: return ArityClass::kTwoEntity;
      case 3: return ArityClass::kThreeEntity;
      default: throw GraphError("entity path must have 1..3 segments");
    }
  }

  // Flat key used for uniqueness checks and deterministic ordering.
  std::string key() const {
    std::string out;
    for (const auto& seg : segments) {
      out += static_cast<char>('a' + static_cast<int>(seg.role));
      out += ':';
      out += seg.name;
      out += '/';
    }
    return out;
  }

  friend bool operator==(const EntityPath&, const EntityPath&) = default;
  friend auto operator<=>(const EntityPath&, const EntityPath&) = default;
};

// Convenience constructors for the path shapes listed above.
EntityPath count_path(const std::string& instance, const std::string& container);
EntityPath rate_path(const std::string& attribute, const std::string& instance,
                     const std::string& container);
EntityPath attr_total_path(const std::string& attribute, const std::string& instance,
                           const std::string& container);
EntityPath abstract_total_path(const std::string& category, const std::string& container);
EntityPath symbolic_path(const std::string& variable);

// ---------------------------------------------------------------------------
// Nodes and edges
// ---------------------------------------------------------------------------

enum class NodeKind : std::uint8_t { kInstance, kAbstract };

struct Node {
  std::string id;    // opaque, unique; lexicographic order breaks topo ties
  EntityPath path;
  NodeKind kind = NodeKind::kInstance;
  bool noise = false;  // set by noise injection; core/noise split stays derivable

  friend bool operator==(const Node&, const Node&) = default;
};

enum class RelationKind : std::uint8_t {
  kConstAssign,      // target = k
  kCopy,             // target = src
  kScale,            // target = k * src
  kAddConst,         // target = k + src
  kSumList,          // target = src0 + src1 + ...      (operands may repeat)
  kDifference,       // target = src0 - src1
  kScaledSum,        // target = k * (src0 + src1 + ...)
  kImplicitSum,      // abstract total = sum of member counts; never rendered
  kImplicitProduct,  // attribute total = rate * count;   never rendered
};

bool relation_is_explicit(RelationKind kind);
const char* relation_name(RelationKind kind);

// One defining relation per target node. `sources` lists operand node ids in
// positional order (minuend before subtrahend); `k` carries the literal for
// const-assign, the multiplier for scale/scaled-sum and the addend for
// add-const.
struct Edge {
  std::string target;
  RelationKind kind = RelationKind::kConstAssign;
  std::vector<std::string> sources;
  std::int64_t k = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Binary operations contributed by one defining relation, counted over
// `n = sources.size()`:
//   const-assign, copy                      0
//   scale, add-const, difference, product   1
//   sum-list, implicit-sum                  n - 1
//   scaled-sum                              n
int op_cost(RelationKind kind, std::size_t n_sources);

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

enum class Subtask : std::uint8_t { kSymbolic, kMedium, kHard };
enum class Mode : std::uint8_t { kForward, kReverse };

const char* subtask_name(Subtask s);
const char* mode_name(Mode m);
Subtask subtask_from_name(const std::string& name);
Mode mode_from_name(const std::string& name);

// Anchor for reverse problems: a downstream node whose value is stated
// outright so the masked leaf can be recovered.
struct Anchor {
  std::string node;
  std::int64_t value = 0;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

class ComputationGraph {
 public:
  Subtask subtask = Subtask::kMedium;
  Mode mode = Mode::kForward;
  std::string query;              // forward: asked node; reverse: masked node
  std::optional<Anchor> anchor;   // present iff mode == reverse
  std::optional<std::int64_t> find_all_target;  // symbolic: the value T asked about

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Appends a node; rejects duplicate ids and duplicate entity paths.
  void add_node(Node node);

  // Appends a defining edge; rejects a second definition of the same target.
  // Source existence is checked lazily by validate_dag so graphs can be built
  // in any order.
  void add_edge(Edge edge);

  // Rewrites the literal of an existing const-assign definition. Value
  // sampling resamples literals in place instead of rebuilding the topology.
  void set_const_literal(const std::string& target, std::int64_t k);

  bool has_node(const std::string& id) const;
  const Node& node(const std::string& id) const;
  const Edge* defining_edge(const std::string& id) const;  // null for leaves
  const Node* find_by_path(const EntityPath& path) const;

  // Root used for evaluation/closure queries: the anchored node for reverse
  // graphs, the query node otherwise.
  const std::string& evaluation_root() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> node_index_;
  std::map<std::string, std::size_t> edge_index_;  // target id -> edge position
  std::map<std::string, std::size_t> path_index_;  // path key -> node position

  friend bool structural_equal(const ComputationGraph&, const ComputationGraph&);
};

struct ValuedGraph {
  ComputationGraph graph;
  std::map<std::string, std::int64_t> values;  // every node, masked one included
};

// ---------------------------------------------------------------------------
// Graph algorithms
// ---------------------------------------------------------------------------

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> cycle;  // one offending cycle when !ok, in edge order
};

// Structural validation. Throws GraphError when an edge references a missing
// node id; reports (rather than throws) directed cycles.
ValidationReport validate_dag(const ComputationGraph& graph);

// Deterministic topological order of `root`'s ancestor closure, root last.
// Ties break lexicographically on node id. Defaults to the evaluation root.
std::vector<std::string> topo_order(const ComputationGraph& graph,
                                    const std::string& root = {});

// Number of binary operations needed to derive `root`, i.e. the op_cost sum
// over defining edges in its ancestor closure. Invariant under node
// relabeling and under noise injection (noise never enters the closure).
int op_count(const ComputationGraph& graph, const std::string& root = {});

// The subgraph that actually feeds the evaluation root. Identity on noise-free
// generated graphs; strips noise nodes from extended ones. Idempotent.
ComputationGraph core_subgraph(const ComputationGraph& graph);

// Structural equality: same nodes (id, path, kind), same defining edges, same
// query/mode/subtask/anchor. Node order and noise flags are ignored.
bool structural_equal(const ComputationGraph& a, const ComputationGraph& b);

// Id-insensitive equivalence keyed on entity paths: same quantities related
// the same way. Used to compare graphs rebuilt from problem text against
// their originals, whose node ids differ.
bool equivalent_structure(const ComputationGraph& a, const ComputationGraph& b);

// Applies one defining relation given its source values, in checked int64.
std::int64_t apply_relation(const Edge& edge,
                            const std::map<std::string, std::int64_t>& values);

// Forward-evaluates `target` from const-assign literals, in exact int64 with
// overflow checks. Leaves without a defining edge take their value from
// `leaf_overrides`; a leaf missing there raises DataError naming the node.
std::int64_t evaluate(const ComputationGraph& graph, const std::string& target,
                      const std::map<std::string, std::int64_t>& leaf_overrides = {});

// Recomputes every stored value along topo order; DataError on any mismatch.
void verify_values(const ValuedGraph& valued);

}  // namespace opforge
