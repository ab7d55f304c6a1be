#pragma once

#include <string>
#include <vector>

#include "opforge/graph.hpp"
#include "opforge/rng.hpp"
#include "opforge/templates.hpp"

namespace opforge {

// Instruction lines shared by every rendered problem. The find-all preamble
// is part of the symbolic question itself; the reasoning instruction closes
// every prompt.
extern const char* const kReasoningInstruction;
extern const char* const kFindAllPreamble;

// Natural-language name of a node's quantity, lowercase ("the number of adult
// eagle in Bundle Ranch"). Symbolic paths render as their variable name.
std::string variable_name(const EntityPath& path, const Template& t);

// Unit tag used to police cross-unit statements.
std::string unit_of(const EntityPath& path, const Template& t);

// One declarative sentence for one explicit defining relation. Implicit
// relations never render; cross-unit explicit relations raise RenderError at
// generation time.
std::string render_statement(const Edge& edge, const ComputationGraph& graph,
                             const Template& t);

// The anchoring sentence of a reverse problem, phrased like a const statement.
std::string render_anchor_statement(const Anchor& anchor, const ComputationGraph& graph,
                                    const Template& t);

struct RenderedProblem {
  std::vector<std::string> statements;  // shuffled; anchor statement included
  std::vector<int> core_indices;        // positions of non-noise statements
  std::string question;                 // complete prompt, instructions included
};

// Wraps an already-joined statement run into the final prompt: question
// clause plus reasoning instruction, or the context block and find-all
// preamble for symbolic problems. Exposed so context-budget bookkeeping can
// measure the exact prompt a statement set will produce.
std::string question_text(const ComputationGraph& graph, const Template& t,
                          const std::string& statement_run);

// Renders and shuffles all explicit statements and assembles the final
// prompt via question_text.
RenderedProblem render_problem(const ComputationGraph& graph, const Template& t, Rng& rng);

// Step-by-step gold derivation over the evaluation closure, one line per
// node, ending with an "Answer:" line. Reverse derivations isolate the masked
// leaf from the anchored equation.
std::vector<std::string> render_solution(const ValuedGraph& valued, const Template& t);

}  // namespace opforge
