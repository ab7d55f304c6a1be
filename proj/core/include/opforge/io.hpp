#pragma once

#include <map>
#include <string>
#include <vector>

#include "opforge/eval.hpp"
#include "opforge/gen.hpp"

namespace opforge {

// Serialized formats are JSON lines with a fixed field order, so identical
// runs produce byte-identical files. Seeds are written as decimal strings
// (JSON numbers lose precision past 2^53).
//
// A problem line carries the rendered text and gold labels, not the graph;
// consumers that need structure re-parse the question text. The core/noise
// statement split ships in a separate sidecar so the main dataset does not
// label which statements matter.

std::string problem_to_jsonl(const Problem& problem);
Problem problem_from_jsonl(const std::string& line);  // DataError on malformed input

std::string sidecar_to_jsonl(const Problem& problem);  // {id, core_statement_indices}

// Reads a sidecar back as id -> core statement indices, then rejoins it onto
// problems loaded from the main dataset (which omits the mask on purpose).
// Ids without a sidecar entry are left untouched.
std::map<std::string, std::vector<int>> read_sidecar(const std::string& path);
void apply_sidecar(std::vector<Problem>& problems,
                   const std::map<std::string, std::vector<int>>& sidecar);

std::string record_to_jsonl(const EvalRecord& record);
EvalRecord record_from_jsonl(const std::string& line);

void write_problems(const std::string& path, const std::vector<Problem>& problems);
void write_sidecar(const std::string& path, const std::vector<Problem>& problems);
void append_records(const std::string& path, const std::vector<EvalRecord>& records);

// Readers skip malformed lines when `errors` is non-null, recording one
// "line N: reason" entry per skip; with a null `errors` the first malformed
// line throws DataError instead.
std::vector<Problem> read_problems(const std::string& path,
                                   std::vector<std::string>* errors = nullptr);
std::vector<EvalRecord> read_records(const std::string& path,
                                     std::vector<std::string>* errors = nullptr);

// Accuracy curve as "op,total,correct,accuracy" rows ordered by op.
std::string curve_to_csv(const AccuracyCurve& curve);
void write_curve_csv(const std::string& path, const AccuracyCurve& curve);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace opforge
