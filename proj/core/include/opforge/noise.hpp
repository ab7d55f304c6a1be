#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "opforge/graph.hpp"
#include "opforge/render.hpp"
#include "opforge/rng.hpp"
#include "opforge/templates.hpp"

namespace opforge {

// Budget arithmetic runs on estimated tokens. The default is the flat
// chars/4 heuristic; callers may swap in an exact tokenizer-backed count and
// the budget loop converges the same way.
using TokenEstimator = std::function<int(std::string_view)>;

int heuristic_token_estimate(std::string_view text);

struct NoisePlan {
  int token_budget = 0;          // 0 disables injection
  double tolerance = 0.10;       // final estimate within budget*(1 +- tolerance)
  double spider_fraction = 0.7;  // min share of distractor operands drawn from core
  bool strict_values = false;    // keep distractor values inside [1, 999]
  int max_nodes = 20000;
  TokenEstimator estimator;      // empty: heuristic_token_estimate
};

struct NoiseReport {
  int noise_nodes = 0;
  int noise_statements = 0;
  int estimated_tokens = 0;
};

struct NoisyRender {
  ValuedGraph valued;  // extended graph; equals the core when budget is 0
  RenderedProblem rendered;
  NoiseReport report;
};

// Extends a valued core graph with distractor statements until the rendered
// problem's estimated tokens land inside the budget window, then renders.
// Distractors are spider-shaped: sourced from core (or earlier distractors),
// never feeding back, never entering a container that has an abstract total,
// and in symbolic systems never taking the find-all target value. The core
// answer, op count and core subgraph are unchanged.
NoisyRender inject_noise(const ValuedGraph& core, const Template& t, const NoisePlan& plan,
                         Rng& rng);

// Fixed pool of generic filler sentences, disjoint from every template's
// vocabulary terms.
const std::vector<std::string>& filler_pool();

// Pads a rendered problem with off-topic filler sentences to the same budget
// window. Fillers are scattered between the original statements, which all
// survive in order; core_indices are remapped to their new positions and
// fillers are never marked core. The graph and answer are untouched.
RenderedProblem inject_filler(const ComputationGraph& graph, const Template& t,
                              const RenderedProblem& rendered, const NoisePlan& plan, Rng& rng);

}  // namespace opforge
