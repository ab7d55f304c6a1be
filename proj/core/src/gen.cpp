#include "opforge/gen.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <set>

#include "opforge/render.hpp"
#include "opforge/solver.hpp"

namespace opforge {

namespace {

struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

constexpr std::int64_t kValueCap = 999;

// Deterministic full-graph topological order (ids break ties).
std::vector<std::string> full_topo(const ComputationGraph& graph) {
  std::map<std::string, int> pending;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& node : graph.nodes()) pending[node.id] = 0;
  for (const auto& edge : graph.edges()) {
    pending[edge.target] = static_cast<int>(edge.sources.size());
    for (const auto& src : edge.sources) dependents[src].push_back(edge.target);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, count] : pending) {
    if (count == 0) ready.push(id);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& dep : dependents[id]) {
      if (--pending[dep] == 0) ready.push(dep);
    }
  }
  if (order.size() != graph.nodes().size()) {
    throw GraphError("cycle in generated graph");
  }
  return order;
}

enum class StepKind {
  kCopy,
  kScale,
  kAddConst,
  kDifference,
  kSumList,
  kScaledSum,
  kImplicitSum,
  kImplicitProduct,
};

// Grows one forward graph by walking a spine: every step defines a new node
// that consumes the current spine, so each existing node stays an ancestor of
// the final query and the op count advances by exactly the step cost.
class ForwardGrower {
 public:
  ForwardGrower(const GenSpec& spec, const Template& t, Rng& rng, const GenOptions& opt)
      : spec_(spec), t_(t), rng_(rng), opt_(opt) {
    container_pool_ = t_.containers;
    rng_.shuffle(container_pool_);
    instance_pool_ = t_.instances;
    rng_.shuffle(instance_pool_);
  }

  ForwardDraft grow() {
    g_.subtask = spec_.subtask;
    g_.mode = Mode::kForward;
    remaining_ = spec_.target_ops;

    open_container();
    spine_ = make_const_count(open_containers_.front(), 1, 6);

    while (remaining_ > 0) {
      take_step();
    }
    if (spec_.subtask == Subtask::kHard && !has_three_) {
      throw GenerationExhausted("hard graph ended without a three-entity node");
    }
    g_.query = spine_;
    return {std::move(g_), std::move(ranges_)};
  }

 private:
  // ---- vocabulary management ------------------------------------------------

  void open_container() {
    if (next_container_ >= container_pool_.size()) {
      throw GenerationExhausted("container vocabulary exhausted");
    }
    open_containers_.push_back(container_pool_[next_container_++]);
  }

  std::vector<std::string> unused_instances(const std::string& container,
                                            bool for_rate) const {
    const auto& used = for_rate ? used_rate_instances_ : used_count_instances_;
    std::vector<std::string> out;
    auto it = used.find(container);
    for (const auto& inst : instance_pool_) {
      if (it == used.end() || !it->second.count(inst)) out.push_back(inst);
    }
    return out;
  }

  // Containers that can still take a new count node: not frozen by an
  // abstract total, with spare instances.
  std::vector<std::string> count_candidates() const {
    std::vector<std::string> out;
    for (const auto& c : open_containers_) {
      if (!frozen_.count(c) && !unused_instances(c, false).empty()) out.push_back(c);
    }
    return out;
  }

  bool can_make_fresh_count() const {
    return !count_candidates().empty() || next_container_ < container_pool_.size();
  }

  EntityPath fresh_count_path() {
    std::vector<std::string> candidates = count_candidates();
    if (candidates.empty() || (next_container_ < container_pool_.size() && rng_.chance(0.3))) {
      open_container();
      candidates.push_back(open_containers_.back());
    }
    const std::string container = rng_.pick(candidates);
    const std::string instance = rng_.pick(unused_instances(container, false));
    used_count_instances_[container].insert(instance);
    return count_path(instance, container);
  }

  EntityPath fresh_rate_path() {
    std::vector<std::string> candidates;
    for (const auto& c : open_containers_) {
      if (!unused_instances(c, true).empty()) candidates.push_back(c);
    }
    if (candidates.empty() || (next_container_ < container_pool_.size() && rng_.chance(0.2))) {
      open_container();
      candidates.push_back(open_containers_.back());
    }
    const std::string container = rng_.pick(candidates);
    const std::string instance = rng_.pick(unused_instances(container, true));
    used_rate_instances_[container].insert(instance);
    return rate_path(t_.attribute, instance, container);
  }

  // ---- node plumbing --------------------------------------------------------

  std::string new_id() {
    if (g_.nodes().size() >= static_cast<std::size_t>(opt_.max_nodes)) {
      throw GenerationExhausted("node ceiling reached during growth");
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "n%04d", node_counter_++);
    return buf;
  }

  std::string add_node(EntityPath path, NodeKind kind) {
    Node node;
    node.id = new_id();
    node.path = std::move(path);
    node.kind = kind;
    if (node.path.segments.size() == 3) has_three_ = true;
    g_.add_node(node);
    return g_.nodes().back().id;
  }

  std::string make_const_count(const std::string& container, std::int64_t lo,
                               std::int64_t hi) {
    const std::string instance = rng_.pick(unused_instances(container, false));
    used_count_instances_[container].insert(instance);
    return make_const_node(count_path(instance, container), lo, hi);
  }

  std::string make_const_node(EntityPath path, std::int64_t lo, std::int64_t hi) {
    const std::string id = add_node(std::move(path), NodeKind::kInstance);
    g_.add_edge(Edge{id, RelationKind::kConstAssign, {}, 0});
    ranges_[id] = {lo, hi};
    iv_[id] = {lo, hi};
    return id;
  }

  // Fresh const leaf usable as a side operand of `unit`-typed relations.
  std::string fresh_const_operand(const std::string& unit, std::int64_t lo, std::int64_t hi) {
    if (unit == t_.count_unit && can_make_fresh_count()) {
      return make_const_node(fresh_count_path(), lo, hi);
    }
    if (unit == t_.attribute_unit && spec_.subtask == Subtask::kHard) {
      return make_const_node(fresh_rate_path(), lo, hi);
    }
    throw GenerationExhausted("no fresh operand available for unit " + unit);
  }

  bool can_fresh_operand(const std::string& unit) const {
    if (unit == t_.count_unit && can_make_fresh_count()) return true;
    return unit == t_.attribute_unit && spec_.subtask == Subtask::kHard;
  }

  std::vector<std::string> unit_pool(const std::string& unit) const {
    std::vector<std::string> out;
    for (const auto& node : g_.nodes()) {
      if (unit_of(node.path, t_) == unit) out.push_back(node.id);
    }
    return out;
  }

  const Interval& iv(const std::string& id) const { return iv_.at(id); }

  // Target path for the node a step is about to define.
  EntityPath new_target_path(bool want_rate) {
    if (want_rate) return fresh_rate_path();
    return fresh_count_path();
  }

  bool want_rate_target() {
    if (spec_.subtask != Subtask::kHard) return false;
    const bool final_step_pending = remaining_ <= 1;
    if (!has_three_ && remaining_ <= 2) return true;
    if (spec_.mode == Mode::kReverse && final_step_pending) return true;
    return rng_.chance(0.3);
  }

  std::string target_unit(bool want_rate) const {
    return want_rate ? t_.attribute_unit : t_.count_unit;
  }

  // ---- feasibility ----------------------------------------------------------

  bool scale_feasible() const { return 2 * iv(spine_).hi <= kValueCap; }
  bool add_feasible() const { return iv(spine_).hi + 1 <= kValueCap; }

  struct DiffVariant {
    int kind = 0;  // 1: existing minuend, 2: existing subtrahend,
                   // 3: member subtrahend, 4: fresh minuend, 5: fresh subtrahend
    std::string other;
  };

  std::vector<DiffVariant> diff_variants(const std::string& unit) const {
    std::vector<DiffVariant> out;
    const Interval s = iv(spine_);
    for (const auto& id : unit_pool(unit)) {
      if (id == spine_) continue;
      if (iv(id).lo >= s.hi + 1) out.push_back({1, id});
      if (iv(id).hi <= s.lo - 1) out.push_back({2, id});
    }
    // Subtracting a member count from its own total is structurally positive.
    if (const Edge* def = g_.defining_edge(spine_)) {
      if (def->kind == RelationKind::kImplicitSum && def->sources.size() >= 2 &&
          unit == t_.count_unit) {
        for (const auto& member : def->sources) out.push_back({3, member});
      }
    }
    if (s.hi + 6 <= kValueCap && can_fresh_operand(unit)) out.push_back({4, {}});
    if (s.lo >= 2 && can_fresh_operand(unit)) out.push_back({5, {}});
    return out;
  }

  bool sum_feasible(const std::string& unit) const {
    const Interval s = iv(spine_);
    if (s.hi + 1 > kValueCap) return false;
    if (s.hi + 6 <= kValueCap && can_fresh_operand(unit)) return true;
    for (const auto& id : unit_pool(unit)) {
      if (s.hi + iv(id).hi <= kValueCap) return true;
    }
    return false;
  }

  bool scaled_sum_feasible(const std::string& unit) const {
    if (remaining_ < 2) return false;
    const Interval s = iv(spine_);
    return 2 * (s.hi + 1) <= kValueCap && can_fresh_operand(unit);
  }

  struct TotalPlan {
    std::string container;
    std::vector<std::string> members;
    int extras = 0;
    int cost = 0;
  };

  std::optional<TotalPlan> plan_total() const {
    const Node& spine = g_.node(spine_);
    if (spine.path.segments.size() != 2 ||
        spine.path.segments[0].role != SegmentRole::kCategoryInstance) {
      return std::nullopt;
    }
    const std::string container = spine.path.segments[1].name;
    if (frozen_.count(container)) return std::nullopt;

    TotalPlan plan;
    plan.container = container;
    std::int64_t hi_sum = 0;
    for (const auto& node : g_.nodes()) {
      if (node.path.segments.size() == 2 &&
          node.path.segments[0].role == SegmentRole::kCategoryInstance &&
          node.path.segments[1].name == container) {
        plan.members.push_back(node.id);
        hi_sum += iv_.at(node.id).hi;
      }
    }
    const int n = static_cast<int>(plan.members.size());
    plan.extras = n < 2 ? 2 - n : 0;
    if (plan.extras > 0 && unused_instances(container, false).size() <
                               static_cast<std::size_t>(plan.extras)) {
      return std::nullopt;
    }
    plan.cost = n + plan.extras - 1;
    if (plan.cost < 1 || plan.cost > remaining_) return std::nullopt;
    if (hi_sum + 6 * plan.extras > kValueCap) return std::nullopt;
    return plan;
  }

  struct ProductPlan {
    std::string rate;         // existing rate id, or empty to create one
    std::string count;        // existing count id, or empty to create one
    std::string instance;
    std::string container;
  };

  std::optional<ProductPlan> plan_product() const {
    if (spec_.subtask != Subtask::kHard) return std::nullopt;
    const Node& spine = g_.node(spine_);
    const auto& segs = spine.path.segments;
    ProductPlan plan;
    if (segs.size() == 2 && segs[0].role == SegmentRole::kCategoryInstance) {
      plan.count = spine_;
      plan.instance = segs[0].name;
      plan.container = segs[1].name;
      if (g_.find_by_path(rate_path(t_.attribute, plan.instance, plan.container))) {
        return std::nullopt;  // rate exists and is already wired elsewhere
      }
    } else if (segs.size() == 3 && segs[0].role == SegmentRole::kAttribute) {
      plan.rate = spine_;
      plan.instance = segs[1].name;
      plan.container = segs[2].name;
      if (const Node* count = g_.find_by_path(count_path(plan.instance, plan.container))) {
        plan.count = count->id;
        if (iv_.at(plan.count).hi * iv(spine_).hi > kValueCap) return std::nullopt;
      } else if (frozen_.count(plan.container)) {
        return std::nullopt;  // cannot add a count to a summed container
      }
    } else {
      return std::nullopt;
    }
    if (g_.find_by_path(attr_total_path(t_.attribute, plan.instance, plan.container))) {
      return std::nullopt;
    }
    return plan;
  }

  // ---- step execution -------------------------------------------------------

  void take_step() {
    const bool want_rate = want_rate_target();
    const std::string unit = target_unit(want_rate);

    std::vector<StepKind> kinds;
    std::vector<double> weights;
    auto offer = [&](StepKind kind, double w, bool ok) {
      if (ok && w > 0) {
        kinds.push_back(kind);
        weights.push_back(w);
      }
    };

    const auto& w = opt_.weights;
    const bool spine_unit_ok = unit_of(g_.node(spine_).path, t_) == unit;
    const int copy_cap = 1 + spec_.target_ops / 8;

    offer(StepKind::kCopy, w.copy,
          !want_rate_forced() && copies_ < copy_cap && spine_unit_ok);
    offer(StepKind::kScale, w.scale, spine_unit_ok && scale_feasible());
    offer(StepKind::kAddConst, w.add_const, spine_unit_ok && add_feasible());
    offer(StepKind::kDifference, w.difference,
          spine_unit_ok && !diff_variants(unit).empty());
    offer(StepKind::kSumList, w.sum_list, spine_unit_ok && sum_feasible(unit));
    offer(StepKind::kScaledSum, w.scaled_sum, spine_unit_ok && scaled_sum_feasible(unit));
    offer(StepKind::kImplicitSum, w.implicit_sum,
          !want_rate && plan_total().has_value());
    offer(StepKind::kImplicitProduct, w.implicit_product, plan_product().has_value());

    if (kinds.empty()) {
      throw GenerationExhausted("no feasible growth step from the current spine");
    }
    switch (kinds[rng_.weighted(weights)]) {
      case StepKind::kCopy: return step_copy(want_rate);
      case StepKind::kScale: return step_scale(want_rate, unit);
      case StepKind::kAddConst: return step_add(want_rate, unit);
      case StepKind::kDifference: return step_diff(want_rate, unit);
      case StepKind::kSumList: return step_sum(want_rate, unit);
      case StepKind::kScaledSum: return step_scaled_sum(want_rate, unit);
      case StepKind::kImplicitSum: return step_total();
      case StepKind::kImplicitProduct: return step_product();
    }
  }

  // Copies never finish the walk and never satisfy a forced three-entity
  // requirement on their own, so they are skipped while one is pending.
  bool want_rate_forced() const {
    return spec_.subtask == Subtask::kHard &&
           ((!has_three_ && remaining_ <= 2) ||
            (spec_.mode == Mode::kReverse && remaining_ <= 1));
  }

  void advance(const std::string& new_spine, int cost) {
    spine_ = new_spine;
    remaining_ -= cost;
  }

  void step_copy(bool want_rate) {
    ++copies_;
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    g_.add_edge(Edge{id, RelationKind::kCopy, {spine_}, 0});
    iv_[id] = iv(spine_);
    advance(id, 0);
  }

  void step_scale(bool want_rate, const std::string&) {
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 2; k <= 4; ++k) {
      if (k * iv(spine_).hi <= kValueCap) ks.push_back(k);
    }
    const std::int64_t k = rng_.pick(ks);
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    g_.add_edge(Edge{id, RelationKind::kScale, {spine_}, k});
    iv_[id] = {k * iv(spine_).lo, k * iv(spine_).hi};
    advance(id, 1);
  }

  void step_add(bool want_rate, const std::string&) {
    const std::int64_t cap = std::min<std::int64_t>(6, kValueCap - iv(spine_).hi);
    const std::int64_t c = rng_.uniform(1, cap);
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    g_.add_edge(Edge{id, RelationKind::kAddConst, {spine_}, c});
    iv_[id] = {iv(spine_).lo + c, iv(spine_).hi + c};
    advance(id, 1);
  }

  void step_diff(bool want_rate, const std::string& unit) {
    auto variants = diff_variants(unit);
    const DiffVariant v = variants[static_cast<std::size_t>(
        rng_.uniform(0, static_cast<std::int64_t>(variants.size()) - 1))];
    const Interval s = iv(spine_);

    std::string minuend, subtrahend;
    Interval out{};
    switch (v.kind) {
      case 1:
        minuend = v.other;
        subtrahend = spine_;
        out = {iv(v.other).lo - s.hi, iv(v.other).hi - s.lo};
        break;
      case 2:
        minuend = spine_;
        subtrahend = v.other;
        out = {s.lo - iv(v.other).hi, s.hi - iv(v.other).lo};
        break;
      case 3: {  // total minus one member: sum of the remaining members
        minuend = spine_;
        subtrahend = v.other;
        const Edge* def = g_.defining_edge(spine_);
        std::int64_t lo = 0, hi = 0;
        for (const auto& m : def->sources) {
          if (m == v.other) continue;
          lo += iv(m).lo;
          hi += iv(m).hi;
        }
        out = {lo, hi};
        break;
      }
      case 4: {
        minuend = fresh_const_operand(unit, s.hi + 1, s.hi + 6);
        subtrahend = spine_;
        out = {s.hi + 1 - s.hi, s.hi + 6 - s.lo};
        break;
      }
      case 5: {
        const std::int64_t cap = std::min<std::int64_t>(6, s.lo - 1);
        minuend = spine_;
        subtrahend = fresh_const_operand(unit, 1, cap);
        out = {s.lo - cap, s.hi - 1};
        break;
      }
      default:
        throw GenerationExhausted("no difference variant");
    }
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    g_.add_edge(Edge{id, RelationKind::kDifference, {minuend, subtrahend}, 0});
    iv_[id] = out;
    advance(id, 1);
  }

  // Extra operands for sums: fresh const leaves or any existing same-unit
  // node; repeats are allowed and show up verbatim in the rendered list.
  std::vector<std::string> pick_sum_operands(const std::string& unit, int extras,
                                             std::int64_t budget) {
    std::vector<std::string> out{spine_};
    std::int64_t hi_sum = iv(spine_).hi;
    for (int i = 0; i < extras; ++i) {
      std::vector<std::string> pool;
      for (const auto& id : unit_pool(unit)) {
        if (hi_sum + iv(id).hi <= budget) pool.push_back(id);
      }
      const bool fresh_ok = hi_sum + 6 <= budget && can_fresh_operand(unit);
      if (fresh_ok && (pool.empty() || rng_.chance(opt_.fresh_operand_chance))) {
        const std::string id = fresh_const_operand(unit, 1, 6);
        out.push_back(id);
        hi_sum += 6;
      } else if (!pool.empty()) {
        const std::string id = rng_.pick(pool);
        out.push_back(id);
        hi_sum += iv(id).hi;
      } else {
        throw GenerationExhausted("sum operands exhausted mid-step");
      }
    }
    return out;
  }

  static Interval sum_interval(const std::vector<std::string>& operands,
                               const std::map<std::string, Interval>& iv) {
    Interval out{0, 0};
    for (const auto& id : operands) {
      out.lo += iv.at(id).lo;
      out.hi += iv.at(id).hi;
    }
    return out;
  }

  void step_sum(bool want_rate, const std::string& unit) {
    const int extras = static_cast<int>(rng_.uniform(1, std::min(3, remaining_)));
    auto operands = pick_sum_operands(unit, extras, kValueCap);
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    const Interval out = sum_interval(operands, iv_);
    g_.add_edge(Edge{id, RelationKind::kSumList, std::move(operands), 0});
    iv_[id] = out;
    advance(id, extras);
  }

  void step_scaled_sum(bool want_rate, const std::string& unit) {
    const int terms = static_cast<int>(rng_.uniform(2, std::min(3, remaining_)));
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 2; k <= 4; ++k) {
      if (k * (iv(spine_).hi + 1) <= kValueCap) ks.push_back(k);
    }
    const std::int64_t k = rng_.pick(ks);
    auto operands = pick_sum_operands(unit, terms - 1, kValueCap / k);
    const std::string id = add_node(new_target_path(want_rate), NodeKind::kInstance);
    Interval out = sum_interval(operands, iv_);
    out = {out.lo * k, out.hi * k};
    g_.add_edge(Edge{id, RelationKind::kScaledSum, std::move(operands), k});
    iv_[id] = out;
    advance(id, terms);
  }

  void step_total() {
    TotalPlan plan = *plan_total();
    for (int i = 0; i < plan.extras; ++i) {
      plan.members.push_back(make_const_count(plan.container, 1, 6));
    }
    std::sort(plan.members.begin(), plan.members.end(),
              [&](const std::string& a, const std::string& b) {
                return g_.node(a).path.key() < g_.node(b).path.key();
              });
    const std::string id =
        add_node(abstract_total_path(t_.abstract_category, plan.container),
                 NodeKind::kAbstract);
    const Interval out = sum_interval(plan.members, iv_);
    g_.add_edge(Edge{id, RelationKind::kImplicitSum, plan.members, 0});
    iv_[id] = out;
    frozen_.insert(plan.container);
    advance(id, plan.cost);
  }

  void step_product() {
    ProductPlan plan = *plan_product();
    if (plan.rate.empty()) {
      const std::int64_t cap =
          std::max<std::int64_t>(1, std::min<std::int64_t>(6, kValueCap / iv(plan.count).hi));
      used_rate_instances_[plan.container].insert(plan.instance);
      plan.rate = make_const_node(rate_path(t_.attribute, plan.instance, plan.container),
                                  1, cap);
    }
    if (plan.count.empty()) {
      const std::int64_t cap =
          std::max<std::int64_t>(1, std::min<std::int64_t>(6, kValueCap / iv(plan.rate).hi));
      used_count_instances_[plan.container].insert(plan.instance);
      plan.count = make_const_node(count_path(plan.instance, plan.container), 1, cap);
    }
    const std::string id =
        add_node(attr_total_path(t_.attribute, plan.instance, plan.container),
                 NodeKind::kAbstract);
    g_.add_edge(Edge{id, RelationKind::kImplicitProduct, {plan.rate, plan.count}, 0});
    iv_[id] = {iv(plan.rate).lo * iv(plan.count).lo, iv(plan.rate).hi * iv(plan.count).hi};
    advance(id, 1);
  }

  const GenSpec& spec_;
  const Template& t_;
  Rng& rng_;
  const GenOptions& opt_;

  ComputationGraph g_;
  ConstRanges ranges_;
  std::map<std::string, Interval> iv_;
  std::set<std::string> frozen_;
  std::map<std::string, std::set<std::string>> used_count_instances_;
  std::map<std::string, std::set<std::string>> used_rate_instances_;
  std::vector<std::string> container_pool_;
  std::vector<std::string> instance_pool_;
  std::vector<std::string> open_containers_;
  std::size_t next_container_ = 0;
  int node_counter_ = 0;
  int copies_ = 0;
  std::string spine_;
  int remaining_ = 0;
  bool has_three_ = false;
};

void validate_spec(const GenSpec& spec) {
  if (spec.target_ops < 2) {
    throw ConfigError("target_ops must be at least 2");
  }
  if (spec.subtask == Subtask::kSymbolic && spec.mode != Mode::kForward) {
    throw ConfigError("symbolic problems are forward-only");
  }
  if (spec.context_target < 0) {
    throw ConfigError("context_target must be non-negative");
  }
}

}  // namespace

ForwardDraft generate_forward(const GenSpec& spec, const Template& t, Rng& rng,
                              const GenOptions& options) {
  validate_spec(spec);
  if (spec.subtask == Subtask::kSymbolic) {
    throw ConfigError("generate_forward does not build symbolic systems");
  }
  return ForwardGrower(spec, t, rng, options).grow();
}

ValuedGraph assign_values(const ComputationGraph& graph, Rng& rng, const ConstRanges& ranges,
                          int retries) {
  std::vector<std::string> const_targets;
  for (const auto& edge : graph.edges()) {
    if (edge.kind == RelationKind::kConstAssign) const_targets.push_back(edge.target);
  }
  const std::vector<std::string> order = full_topo(graph);

  ComputationGraph candidate = graph;
  for (int attempt = 0; attempt < retries; ++attempt) {
    for (const auto& id : const_targets) {
      auto it = ranges.find(id);
      const std::int64_t lo = it == ranges.end() ? 1 : it->second.first;
      const std::int64_t hi = it == ranges.end() ? 6 : it->second.second;
      candidate.set_const_literal(id, rng.uniform(lo, hi));
    }
    std::map<std::string, std::int64_t> values;
    bool ok = true;
    for (const auto& id : order) {
      const Edge* def = candidate.defining_edge(id);
      if (def == nullptr) {
        throw DataError("cannot assign values: leaf has no definition: " + id);
      }
      std::int64_t v = 0;
      try {
        v = apply_relation(*def, values);
      } catch (const DataError&) {
        ok = false;  // overflow on adversarial ranges counts as a rejection
        break;
      }
      if (v < 1 || v > kValueCap) {
        ok = false;
        break;
      }
      values[id] = v;
    }
    if (ok) return {std::move(candidate), std::move(values)};
  }
  throw GenerationExhausted("value assignment failed after " + std::to_string(retries) +
                            " attempts");
}

std::optional<ValuedGraph> to_reverse(const ValuedGraph& forward) {
  const ComputationGraph& g = forward.graph;
  if (g.mode != Mode::kForward) throw ConfigError("to_reverse expects a forward graph");

  const Anchor anchor{g.query, forward.values.at(g.query)};
  std::vector<std::string> order = topo_order(g, g.query);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Edge* def = g.defining_edge(*it);
    if (def == nullptr || def->kind != RelationKind::kConstAssign) continue;

    ComputationGraph masked;
    masked.subtask = g.subtask;
    masked.mode = Mode::kReverse;
    masked.query = *it;
    masked.anchor = anchor;
    for (const auto& node : g.nodes()) masked.add_node(node);
    for (const auto& edge : g.edges()) {
      if (edge.target != *it) masked.add_edge(edge);
    }

    const ReverseSolveResult result = solve_reverse(masked);
    if (result.status != SolveStatus::kSolved) continue;
    if (result.value != forward.values.at(*it)) {
      throw DataError("reverse solve disagrees with the forward value at " + *it);
    }
    return ValuedGraph{std::move(masked), forward.values};
  }
  return std::nullopt;
}

ValuedGraph generate_symbolic(const GenSpec& spec, Rng& rng, const GenOptions&) {
  validate_spec(spec);
  ValuedGraph out;
  ComputationGraph& g = out.graph;
  g.subtask = Subtask::kSymbolic;
  g.mode = Mode::kForward;

  std::set<std::string> names;
  auto fresh_name = [&] {
    while (true) {
      std::string name = "V" + std::to_string(rng.uniform(100000, 999999));
      if (names.insert(name).second) return name;
    }
  };
  std::vector<std::string> vars;
  auto add_var = [&](Edge edge) {
    const std::string name = fresh_name();
    edge.target = name;
    g.add_node(Node{name, symbolic_path(name), NodeKind::kInstance, false});
    std::int64_t value = apply_relation(edge, out.values);
    g.add_edge(std::move(edge));
    out.values[name] = value;
    vars.push_back(name);
  };

  add_var(Edge{{}, RelationKind::kConstAssign, {}, rng.uniform(1, 9)});
  for (int i = 1; i < spec.target_ops; ++i) {
    const std::size_t kind = rng.weighted({0.3, 0.3, 0.4});
    if (kind == 1) {
      add_var(Edge{{}, RelationKind::kCopy, {rng.pick(vars)}, 0});
      continue;
    }
    if (kind == 2) {
      const std::string src = rng.pick(vars);
      const std::int64_t c = rng.uniform(1, 3);
      if (out.values.at(src) + c <= kValueCap) {
        add_var(Edge{{}, RelationKind::kAddConst, {src}, c});
        continue;
      }
    }
    add_var(Edge{{}, RelationKind::kConstAssign, {}, rng.uniform(1, 9)});
  }
  g.find_all_target = out.values.at(rng.pick(vars));
  return out;
}

Problem generate_problem(const GenSpec& spec, std::uint64_t index,
                         const std::vector<Template>& extra_templates,
                         const GenOptions& options) {
  validate_spec(spec);
  const Template& t = spec.subtask == Subtask::kSymbolic
                          ? builtin_templates().front()
                          : find_template(spec.template_id, extra_templates);

  const std::string stream_key =
      std::string(subtask_name(spec.subtask)) + "|" + mode_name(spec.mode) + "|" +
      std::to_string(spec.target_ops) + "|" + std::to_string(spec.context_target) + "|" +
      spec.template_id + "|" + std::to_string(static_cast<int>(spec.noise_kind)) + "|" +
      std::to_string(index);
  const std::uint64_t seed = Rng::derive(spec.seed, fnv1a64(stream_key));
  Rng rng(seed);

  NoisePlan plan;
  plan.token_budget = spec.noise_kind == NoiseKind::kGraph ? spec.context_target : 0;
  plan.tolerance = options.noise_tolerance;
  plan.spider_fraction = options.spider_fraction;
  plan.strict_values = options.strict_noise_values;
  plan.max_nodes = options.max_nodes;
  plan.estimator = options.token_estimator;

  std::string last_error = "generation failed";
  for (int attempt = 0; attempt < options.topology_retries; ++attempt) {
    try {
      ValuedGraph core;
      if (spec.subtask == Subtask::kSymbolic) {
        core = generate_symbolic(spec, rng, options);
      } else {
        ForwardDraft draft = generate_forward(spec, t, rng, options);
        core = assign_values(draft.graph, rng, draft.const_ranges, options.value_retries);
        if (spec.mode == Mode::kReverse) {
          auto reversed = to_reverse(core);
          if (!reversed) continue;
          core = std::move(*reversed);
        }
      }

      NoisyRender noisy = inject_noise(core, t, plan, rng);
      if (spec.noise_kind == NoiseKind::kFiller && spec.context_target > 0) {
        NoisePlan filler_plan = plan;
        filler_plan.token_budget = spec.context_target;
        noisy.rendered = inject_filler(noisy.valued.graph, t, noisy.rendered, filler_plan, rng);
      }

      Problem problem;
      problem.subtask = spec.subtask;
      problem.mode = spec.mode;
      problem.template_id = spec.subtask == Subtask::kSymbolic ? "symbolic" : t.id;
      problem.context_target = spec.context_target;
      problem.seed = seed;
      problem.question = noisy.rendered.question;
      problem.statements = noisy.rendered.statements;
      problem.core_statement_indices = noisy.rendered.core_indices;
      problem.valued = noisy.valued;

      const ComputationGraph& graph = problem.valued.graph;
      if (spec.subtask == Subtask::kSymbolic) {
        int core_statements = 0;
        for (const auto& edge : graph.edges()) {
          if (!graph.node(edge.target).noise) ++core_statements;
        }
        problem.op = core_statements;
        problem.answer.symbolic = true;
        problem.answer.names = solve_find_all(graph, *graph.find_all_target);
      } else {
        problem.op = op_count(graph);
        problem.answer.value = problem.valued.values.at(graph.query);
      }
      if (problem.op != spec.target_ops) {
        throw DataError("generated op count " + std::to_string(problem.op) +
                        " does not match requested " + std::to_string(spec.target_ops));
      }
      problem.solution = render_solution(problem.valued, t);

      char hex[17];
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(
                        fnv1a64(problem.question + "|" + std::to_string(seed))));
      problem.id = hex;
      return problem;
    } catch (const GenerationExhausted& e) {
      last_error = e.what();
    }
  }
  throw GenerationExhausted(std::string(subtask_name(spec.subtask)) + "/" +
                            mode_name(spec.mode) + " op " +
                            std::to_string(spec.target_ops) + ": " + last_error);
}

ExactOpsFilter filter_exact_ops(const std::vector<ComputationGraph>& graphs, int target_ops) {
  ExactOpsFilter out;
  for (const auto& graph : graphs) {
    ++out.seen;
    if (op_count(graph) == target_ops) out.kept.push_back(graph);
  }
  return out;
}

}  // namespace opforge
