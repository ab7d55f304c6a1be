#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opforge/graph.hpp"
#include "opforge/noise.hpp"
#include "opforge/rng.hpp"
#include "opforge/templates.hpp"

namespace opforge {

enum class NoiseKind : std::uint8_t { kGraph, kFiller };

// One problem's generation request. `target_ops` is hit exactly, never by
// rejection filtering; for symbolic problems it is the number of assignment
// statements, for numeric ones the binary-operation count of the query's
// ancestor closure.
struct GenSpec {
  Subtask subtask = Subtask::kMedium;
  Mode mode = Mode::kForward;
  int target_ops = 2;        // >= 2
  int context_target = 0;    // token budget for distractors; 0 = clean
  NoiseKind noise_kind = NoiseKind::kGraph;
  std::string template_id = "animal-zoo";
  std::uint64_t seed = 0;
};

// Relative frequencies of growth steps. Infeasible steps (value bounds,
// missing prerequisites) drop out of the menu and the rest renormalize.
struct RelationWeights {
  double copy = 0.10;
  double scale = 0.20;
  double add_const = 0.10;
  double difference = 0.15;
  double sum_list = 0.10;
  double scaled_sum = 0.10;
  double implicit_sum = 0.15;      // medium and hard
  double implicit_product = 0.18;  // hard only
};

struct GenOptions {
  RelationWeights weights;
  double fresh_operand_chance = 0.35;  // side operands: fresh const vs existing node
  int value_retries = 64;
  int topology_retries = 16;
  int max_nodes = 20000;
  double noise_tolerance = 0.10;
  double spider_fraction = 0.7;
  bool strict_noise_values = false;
  TokenEstimator token_estimator;  // defaults to heuristic_token_estimate
};

// Const-assign sampling ranges chosen during growth (difference feasibility
// shapes some of them); consts not listed sample from [1, 6].
using ConstRanges = std::map<std::string, std::pair<std::int64_t, std::int64_t>>;

struct ForwardDraft {
  ComputationGraph graph;
  ConstRanges const_ranges;
};

// Grows a noise-free forward graph whose op count is exactly
// spec.target_ops. Every node is an ancestor of the query, so the graph is
// its own core subgraph. Throws GenerationExhausted when the step menu or
// vocabulary runs dry.
ForwardDraft generate_forward(const GenSpec& spec, const Template& t, Rng& rng,
                              const GenOptions& options = {});

// Binds values: samples const literals from their ranges and propagates.
// Rejects assignments leaving any node outside [1, 999] (difference results
// must stay strictly positive) and retries up to `retries` times.
ValuedGraph assign_values(const ComputationGraph& graph, Rng& rng,
                          const ConstRanges& ranges = {}, int retries = 64);

// Reverse conversion: masks the last const-assigned leaf (in topo order)
// whose masked system stays linear with a unique in-range solution, and
// anchors the forward query at its value. Returns nullopt when no candidate
// survives; the caller regrows the topology.
std::optional<ValuedGraph> to_reverse(const ValuedGraph& forward);

// Find-all system over fresh symbolic variables; assignment count equals
// spec.target_ops and the target value T is one variable's value.
ValuedGraph generate_symbolic(const GenSpec& spec, Rng& rng, const GenOptions& options = {});

struct GoldAnswer {
  bool symbolic = false;
  std::int64_t value = 0;           // numeric problems
  std::vector<std::string> names;   // symbolic: sorted variable names
};

struct Problem {
  std::string id;  // content hash of question text and seed
  Subtask subtask = Subtask::kMedium;
  Mode mode = Mode::kForward;
  std::string template_id;
  int op = 0;
  int context_target = 0;
  std::string question;
  std::vector<std::string> statements;
  GoldAnswer answer;
  std::vector<std::string> solution;
  std::uint64_t seed = 0;
  std::vector<int> core_statement_indices;  // sidecar for noise audits
  ValuedGraph valued;                       // in-memory only, not serialized
};

// Full pipeline for the index-th problem of a run: derive the per-problem
// seed, grow, value, reverse when asked, extend with distractors, render,
// and re-derive the gold answer and solution. Deterministic in (spec, index).
Problem generate_problem(const GenSpec& spec, std::uint64_t index,
                         const std::vector<Template>& extra_templates = {},
                         const GenOptions& options = {});

// Keeps graphs whose recomputed op count equals `target_ops`. Generation is
// exact by construction, so this is a guard for externally sourced graphs;
// the acceptance rate makes silent mismatches visible.
struct ExactOpsFilter {
  std::vector<ComputationGraph> kept;
  int seen = 0;

  double acceptance_rate() const {
    return seen == 0 ? 1.0 : static_cast<double>(kept.size()) / seen;
  }
};

ExactOpsFilter filter_exact_ops(const std::vector<ComputationGraph>& graphs, int target_ops);

}  // namespace opforge
