#include "opforge/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace opforge {

int heuristic_token_estimate(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

namespace {

constexpr std::int64_t kStrictCap = 999;
constexpr std::int64_t kLooseCap = 1'000'000;

struct Staged {
  Node node;
  Edge edge;
  std::int64_t value = 0;
  std::string text;
};

// Grows distractor statements onto a copy of the core graph. Distractor
// edges only ever point core -> distractor or distractor -> distractor, so
// the evaluation closure, op count and answer cannot move. Growth stages one
// node per statement; trimming pops from the tail, which nothing later
// references.
class NoiseGrower {
 public:
  NoiseGrower(const ValuedGraph& core, const Template& t, const NoisePlan& plan, Rng& rng)
      : core_(core),
        t_(t),
        plan_(plan),
        rng_(rng),
        estimate_(plan.estimator ? plan.estimator : heuristic_token_estimate),
        working_(core.graph),
        values_(core.values) {
    symbolic_ = core.graph.subtask == Subtask::kSymbolic;
    value_cap_ = plan.strict_values ? kStrictCap : kLooseCap;
    container_pool_ = t.containers;
    rng_.shuffle(container_pool_);
    instance_pool_ = t.instances;
    rng_.shuffle(instance_pool_);
    index_core();

    for (const auto& edge : core.graph.edges()) {
      if (relation_is_explicit(edge.kind)) {
        append_to_run(base_run_, render_statement(edge, core.graph, t));
      }
    }
    if (core.graph.mode == Mode::kReverse) {
      if (!core.graph.anchor) throw GraphError("reverse graph without anchor");
      append_to_run(base_run_, render_anchor_statement(*core.graph.anchor, core.graph, t));
    }
  }

  NoisyRender run() {
    const int budget = plan_.token_budget;
    const int lo = static_cast<int>(std::ceil(budget * (1.0 - plan_.tolerance)));
    const int hi = static_cast<int>(std::floor(budget * (1.0 + plan_.tolerance)));
    const int base_tokens = measure();

    int current = base_tokens;
    while (current < lo) {
      // First pass stays small so later chunk sizes derive from measured
      // statement cost instead of a guess.
      const int cap = staged_.empty() ? 16 : 512;
      const int per_statement =
          staged_.empty() ? 15
                          : std::max(1, (current - base_tokens) /
                                            static_cast<int>(staged_.size()));
      const int chunk = std::clamp((budget - current) / per_statement, 1, cap);
      for (int i = 0; i < chunk; ++i) add_one();
      current = measure();
    }
    // measure() only reads staged texts and the query name, so the graph can
    // be rebuilt once after trimming instead of per pop.
    bool popped = false;
    while (current > hi && !staged_.empty()) {
      staged_.pop_back();
      popped = true;
      current = measure();
    }
    if (popped) rebuild();

    NoisyRender out;
    out.valued = {working_, values_};
    out.rendered = render_problem(working_, t_, rng_);
    out.report.noise_nodes = static_cast<int>(staged_.size());
    out.report.noise_statements = static_cast<int>(staged_.size());
    out.report.estimated_tokens = current;
    return out;
  }

 private:
  static void append_to_run(std::string& run, const std::string& statement) {
    if (!run.empty()) run += ' ';
    run += statement;
  }

  void index_core() {
    for (const auto& node : core_.graph.nodes()) {
      if (node.kind == NodeKind::kAbstract && node.path.segments.size() == 2) {
        frozen_.insert(node.path.segments.back().name);
      }
      const auto& segs = node.path.segments;
      if (segs.size() == 2 && segs[0].role == SegmentRole::kCategoryInstance) {
        used_count_[segs[1].name].insert(segs[0].name);
      }
      if (segs.size() == 3 && segs[0].role == SegmentRole::kAttribute) {
        used_rate_[segs[2].name].insert(segs[1].name);
      }
      if (symbolic_) {
        if (values_.at(node.id) != *core_.graph.find_all_target) {
          core_symbols_.push_back(node.id);
        }
      } else {
        core_by_unit_[unit_of(node.path, t_)].push_back(node.id);
      }
    }
  }

  int measure() {
    std::string run = base_run_;
    for (const auto& s : staged_) append_to_run(run, s.text);
    return estimate_(question_text(working_, t_, run));
  }

  void rebuild() {
    working_ = core_.graph;
    values_ = core_.values;
    noise_by_unit_.clear();
    noise_symbols_.clear();
    used_count_.clear();
    used_rate_.clear();
    frozen_.clear();
    core_by_unit_.clear();
    core_symbols_.clear();
    numer_ = 0;
    denom_ = 0;
    index_core();
    for (const auto& s : staged_) commit(s, /*rendered=*/true);
  }

  // ---- staging --------------------------------------------------------------

  void commit(const Staged& staged, bool rendered) {
    working_.add_node(staged.node);
    working_.add_edge(staged.edge);
    values_[staged.node.id] = staged.value;
    if (symbolic_) {
      noise_symbols_.push_back(staged.node.id);
    } else {
      noise_by_unit_[unit_of(staged.node.path, t_)].push_back(staged.node.id);
      const auto& segs = staged.node.path.segments;
      if (segs.size() == 2) used_count_[segs[1].name].insert(segs[0].name);
      if (segs.size() == 3) used_rate_[segs[2].name].insert(segs[1].name);
    }
    if (!staged.edge.sources.empty()) {
      ++denom_;
      if (uses_core(staged.edge)) ++numer_;
    }
    if (!rendered) {
      staged_.push_back(staged);
      staged_.back().text = render_statement(staged.edge, working_, t_);
    }
  }

  bool uses_core(const Edge& edge) const {
    for (const auto& src : edge.sources) {
      if (!working_.node(src).noise) return true;
    }
    return false;
  }

  void add_one() {
    if (working_.nodes().size() >= static_cast<std::size_t>(plan_.max_nodes)) {
      throw GenerationExhausted("node ceiling reached during distractor growth");
    }
    if (symbolic_) {
      add_symbolic();
    } else {
      add_numeric();
    }
  }

  // ---- source pools ---------------------------------------------------------

  // Core-heavy operand choice: forcing a core pick whenever the running core
  // share would otherwise be able to dip below the floor keeps the final
  // ratio at or above spider_fraction deterministically.
  bool prefer_core_source() {
    const bool forced =
        static_cast<double>(numer_) < plan_.spider_fraction * (denom_ + 1);
    return forced || rng_.chance(plan_.spider_fraction);
  }

  std::vector<std::string> filtered(const std::vector<std::string>& pool,
                                    std::int64_t max_value) const {
    std::vector<std::string> out;
    for (const auto& id : pool) {
      if (values_.at(id) <= max_value) out.push_back(id);
    }
    return out;
  }

  const std::vector<std::string>& core_pool(const std::string& unit) const {
    static const std::vector<std::string> empty;
    auto it = core_by_unit_.find(unit);
    return it == core_by_unit_.end() ? empty : it->second;
  }

  const std::vector<std::string>& noise_pool(const std::string& unit) const {
    static const std::vector<std::string> empty;
    auto it = noise_by_unit_.find(unit);
    return it == noise_by_unit_.end() ? empty : it->second;
  }

  std::vector<std::string> combined_pool(const std::string& unit) const {
    std::vector<std::string> out = core_pool(unit);
    const auto& noise = noise_pool(unit);
    out.insert(out.end(), noise.begin(), noise.end());
    return out;
  }

  // First operand honoring the spider rule; empty when no source fits.
  std::vector<std::string> first_pool(const std::string& unit, std::int64_t max_value) {
    const bool core_first = prefer_core_source();
    auto primary = filtered(core_first ? core_pool(unit) : noise_pool(unit), max_value);
    if (!primary.empty()) return primary;
    return filtered(core_first ? noise_pool(unit) : core_pool(unit), max_value);
  }

  // ---- numeric distractors ----------------------------------------------------

  std::optional<EntityPath> fresh_count_path() {
    std::vector<std::string> candidates;
    for (const auto& c : container_pool_) {
      if (frozen_.count(c)) continue;
      if (used_count_[c].size() < instance_pool_.size()) candidates.push_back(c);
    }
    if (candidates.empty()) return std::nullopt;
    const std::string container = rng_.pick(candidates);
    std::vector<std::string> open;
    for (const auto& inst : instance_pool_) {
      if (!used_count_[container].count(inst)) open.push_back(inst);
    }
    const std::string instance = rng_.pick(open);
    used_count_[container].insert(instance);
    return count_path(instance, container);
  }

  std::optional<EntityPath> fresh_rate_path() {
    std::vector<std::string> candidates;
    for (const auto& c : container_pool_) {
      if (used_rate_[c].size() < instance_pool_.size()) candidates.push_back(c);
    }
    if (candidates.empty()) return std::nullopt;
    const std::string container = rng_.pick(candidates);
    std::vector<std::string> open;
    for (const auto& inst : instance_pool_) {
      if (!used_rate_[container].count(inst)) open.push_back(inst);
    }
    const std::string instance = rng_.pick(open);
    used_rate_[container].insert(instance);
    return rate_path(t_.attribute, instance, container);
  }

  // Medium problems keep two-entity purity; hard ones mix in rates.
  std::optional<EntityPath> fresh_target_path() {
    const bool want_rate =
        core_.graph.subtask == Subtask::kHard && rng_.chance(0.3);
    if (want_rate) {
      if (auto path = fresh_rate_path()) return path;
    }
    if (auto path = fresh_count_path()) return path;
    return fresh_rate_path();
  }

  Staged staged_node(EntityPath path) {
    Staged out;
    char buf[8];
    std::snprintf(buf, sizeof buf, "z%04d", noise_counter_++);
    out.node = Node{buf, std::move(path), NodeKind::kInstance, true};
    return out;
  }

  void add_numeric() {
    auto path = fresh_target_path();
    if (!path) {
      throw GenerationExhausted("distractor vocabulary exhausted before budget");
    }
    Staged staged = staged_node(std::move(*path));
    const std::string unit = unit_of(staged.node.path, t_);

    // const .10 / copy .15 / scale .20 / add .20 / difference .15 / sum .20
    switch (rng_.weighted({0.10, 0.15, 0.20, 0.20, 0.15, 0.20})) {
      case 1: if (make_copy(staged, unit)) break; [[fallthrough]];
      case 2: if (make_scale(staged, unit)) break; [[fallthrough]];
      case 3: if (make_add(staged, unit)) break; [[fallthrough]];
      case 4: if (make_difference(staged, unit)) break; [[fallthrough]];
      case 5: if (make_sum(staged, unit)) break; [[fallthrough]];
      default:
        staged.edge = Edge{staged.node.id, RelationKind::kConstAssign, {}, rng_.uniform(1, 99)};
        staged.value = staged.edge.k;
        break;
    }
    commit(staged, /*rendered=*/false);
  }

  bool make_copy(Staged& staged, const std::string& unit) {
    auto pool = first_pool(unit, value_cap_);
    if (pool.empty()) return false;
    const std::string src = rng_.pick(pool);
    staged.edge = Edge{staged.node.id, RelationKind::kCopy, {src}, 0};
    staged.value = values_.at(src);
    return true;
  }

  bool make_scale(Staged& staged, const std::string& unit) {
    auto pool = first_pool(unit, value_cap_ / 2);
    if (pool.empty()) return false;
    const std::string src = rng_.pick(pool);
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 2; k <= 4; ++k) {
      if (k * values_.at(src) <= value_cap_) ks.push_back(k);
    }
    const std::int64_t k = rng_.pick(ks);
    staged.edge = Edge{staged.node.id, RelationKind::kScale, {src}, k};
    staged.value = k * values_.at(src);
    return true;
  }

  bool make_add(Staged& staged, const std::string& unit) {
    auto pool = first_pool(unit, value_cap_ - 1);
    if (pool.empty()) return false;
    const std::string src = rng_.pick(pool);
    const std::int64_t c =
        rng_.uniform(1, std::min<std::int64_t>(6, value_cap_ - values_.at(src)));
    staged.edge = Edge{staged.node.id, RelationKind::kAddConst, {src}, c};
    staged.value = values_.at(src) + c;
    return true;
  }

  bool make_difference(Staged& staged, const std::string& unit) {
    auto pool = first_pool(unit, value_cap_);
    if (pool.empty()) return false;
    const std::string a = rng_.pick(pool);
    std::vector<std::string> lower;
    for (const auto& id : combined_pool(unit)) {
      if (id != a && values_.at(id) < values_.at(a)) lower.push_back(id);
    }
    if (lower.empty()) return false;
    const std::string b = rng_.pick(lower);
    staged.edge = Edge{staged.node.id, RelationKind::kDifference, {a, b}, 0};
    staged.value = values_.at(a) - values_.at(b);
    return true;
  }

  bool make_sum(Staged& staged, const std::string& unit) {
    const int terms = static_cast<int>(rng_.uniform(2, 3));
    auto pool = first_pool(unit, value_cap_ - (terms - 1));
    if (pool.empty()) return false;
    std::vector<std::string> sources{rng_.pick(pool)};
    std::int64_t total = values_.at(sources[0]);
    for (int i = 1; i < terms; ++i) {
      auto extras = filtered(combined_pool(unit), value_cap_ - total);
      if (extras.empty()) break;
      const std::string id = rng_.pick(extras);
      sources.push_back(id);
      total += values_.at(id);
    }
    if (sources.size() < 2) return false;
    staged.edge = Edge{staged.node.id, RelationKind::kSumList, std::move(sources), 0};
    staged.value = total;
    return true;
  }

  // ---- symbolic distractors ---------------------------------------------------

  void add_symbolic() {
    const std::int64_t target = *core_.graph.find_all_target;
    Staged staged;
    while (true) {
      std::string name = "V" + std::to_string(rng_.uniform(100000, 999999));
      if (!working_.has_node(name)) {
        staged.node = Node{name, symbolic_path(name), NodeKind::kInstance, true};
        break;
      }
    }

    // const .3 / copy .3 / add .4; every distractor value avoids the find-all
    // target so the answer set never grows.
    const std::size_t kind = rng_.weighted({0.3, 0.3, 0.4});
    if (kind != 0) {
      const bool core_first = prefer_core_source();
      const auto& primary = core_first ? core_symbols_ : noise_symbols_;
      const auto& backup = core_first ? noise_symbols_ : core_symbols_;
      const auto& pool = primary.empty() ? backup : primary;
      if (!pool.empty()) {
        const std::string src = rng_.pick(pool);
        const std::int64_t v = values_.at(src);
        if (kind == 1 && v != target) {
          staged.edge = Edge{staged.node.id, RelationKind::kCopy, {src}, 0};
          staged.value = v;
          commit(staged, /*rendered=*/false);
          return;
        }
        if (kind == 2 && v + 3 <= kStrictCap) {
          std::vector<std::int64_t> cs;
          for (std::int64_t c = 1; c <= 3; ++c) {
            if (v + c != target) cs.push_back(c);
          }
          const std::int64_t c = rng_.pick(cs);
          staged.edge = Edge{staged.node.id, RelationKind::kAddConst, {src}, c};
          staged.value = v + c;
          commit(staged, /*rendered=*/false);
          return;
        }
      }
    }
    std::int64_t k = rng_.uniform(1, 999);
    while (k == target) k = rng_.uniform(1, 999);
    staged.edge = Edge{staged.node.id, RelationKind::kConstAssign, {}, k};
    staged.value = k;
    commit(staged, /*rendered=*/false);
  }

  const ValuedGraph& core_;
  const Template& t_;
  const NoisePlan& plan_;
  Rng& rng_;
  TokenEstimator estimate_;

  ComputationGraph working_;
  std::map<std::string, std::int64_t> values_;
  std::vector<Staged> staged_;
  std::string base_run_;

  bool symbolic_ = false;
  std::int64_t value_cap_ = kStrictCap;
  std::vector<std::string> container_pool_;
  std::vector<std::string> instance_pool_;
  std::set<std::string> frozen_;
  std::map<std::string, std::set<std::string>> used_count_;
  std::map<std::string, std::set<std::string>> used_rate_;
  std::map<std::string, std::vector<std::string>> core_by_unit_;
  std::map<std::string, std::vector<std::string>> noise_by_unit_;
  std::vector<std::string> core_symbols_;  // find-all target value excluded
  std::vector<std::string> noise_symbols_;
  int noise_counter_ = 0;
  int numer_ = 0;  // distractor relations with at least one core operand
  int denom_ = 0;  // distractor relations with any operand at all
};

}  // namespace

NoisyRender inject_noise(const ValuedGraph& core, const Template& t, const NoisePlan& plan,
                         Rng& rng) {
  if (plan.token_budget <= 0) {
    const TokenEstimator estimate =
        plan.estimator ? plan.estimator : heuristic_token_estimate;
    NoisyRender out;
    out.valued = core;
    out.rendered = render_problem(core.graph, t, rng);
    out.report.estimated_tokens = estimate(out.rendered.question);
    return out;
  }
  return NoiseGrower(core, t, plan, rng).run();
}

const std::vector<std::string>& filler_pool() {
  static const std::vector<std::string> pool = {
      "The sky is blue.",    "The tree is green.",  "The sun is bright.",
      "The road is long.",   "The water is clear.", "The night is quiet.",
      "The air is warm.",    "The field is wide.",
  };
  return pool;
}

RenderedProblem inject_filler(const ComputationGraph& graph, const Template& t,
                              const RenderedProblem& rendered, const NoisePlan& plan,
                              Rng& rng) {
  if (plan.token_budget <= 0) return rendered;
  const TokenEstimator estimate =
      plan.estimator ? plan.estimator : heuristic_token_estimate;

  const std::vector<std::string>& originals = rendered.statements;
  const std::set<int> core(rendered.core_indices.begin(), rendered.core_indices.end());

  // (gap index, filler text); assembly scatters fillers into their gaps
  // between the original statements, which keep their relative order.
  std::vector<std::pair<std::size_t, std::string>> insertions;
  auto assemble = [&] {
    std::vector<std::vector<const std::string*>> gaps(originals.size() + 1);
    for (const auto& [gap, text] : insertions) gaps[gap].push_back(&text);
    RenderedProblem out;
    for (std::size_t i = 0; i <= originals.size(); ++i) {
      for (const auto* text : gaps[i]) out.statements.push_back(*text);
      if (i < originals.size()) {
        if (core.count(static_cast<int>(i))) {
          out.core_indices.push_back(static_cast<int>(out.statements.size()));
        }
        out.statements.push_back(originals[i]);
      }
    }
    std::string run;
    for (std::size_t i = 0; i < out.statements.size(); ++i) {
      if (i) run += ' ';
      run += out.statements[i];
    }
    out.question = question_text(graph, t, run);
    return out;
  };

  const int budget = plan.token_budget;
  const int lo = static_cast<int>(std::ceil(budget * (1.0 - plan.tolerance)));
  const int hi = static_cast<int>(std::floor(budget * (1.0 + plan.tolerance)));
  const int base = estimate(assemble().question);

  int current = base;
  while (current < lo) {
    const int per = insertions.empty()
                        ? 5
                        : std::max(1, (current - base) /
                                          static_cast<int>(insertions.size()));
    const int chunk = std::clamp((budget - current) / per, 1, 2048);
    for (int i = 0; i < chunk; ++i) {
      const std::size_t gap = static_cast<std::size_t>(
          rng.uniform(0, static_cast<std::int64_t>(originals.size())));
      insertions.emplace_back(gap, rng.pick(filler_pool()));
    }
    current = estimate(assemble().question);
  }
  while (current > hi && !insertions.empty()) {
    insertions.pop_back();
    current = estimate(assemble().question);
  }
  return assemble();
}

}  // namespace opforge
