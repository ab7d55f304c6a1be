#pragma once

#include <string>
#include <vector>

#include "opforge/graph.hpp"
#include "opforge/templates.hpp"

namespace opforge {

// Statement-level inverse of rendering. Rebuilds the computation graph from
// problem text alone:
//   - statements parse against the template phrase patterns,
//   - abstract totals get their implicit-sum over every count mentioned for
//     that container (the commonsense reading of the text),
//   - attribute totals get their implicit rate * count product,
//   - a node with both a relation and a const statement is an anchored node,
//     and a node referenced but never defined is the masked leaf, which
//     together mark a reverse problem.
struct ParsedProblem {
  ComputationGraph graph;
  std::string template_id;  // "symbolic" for find-all systems
};

ParsedProblem parse_problem(const std::string& text,
                            const std::vector<Template>& extra_templates = {});

// Matches one quantity name against the template patterns and vocabulary.
// Exposed for tests; throws ParseError when nothing matches.
EntityPath parse_variable(const std::string& text, const Template& t);

}  // namespace opforge
