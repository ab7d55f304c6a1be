#include "opforge/io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace opforge {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t seed_from_string(const std::string& text) {
  if (text.empty()) throw DataError("empty seed string");
  std::uint64_t out = 0;
  for (const char c : text) {
    if (c < '0' || c > '9') throw DataError("seed is not a decimal integer: " + text);
    const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
    if (out > (UINT64_MAX - digit) / 10) throw DataError("seed out of range: " + text);
    out = out * 10 + digit;
  }
  return out;
}

Json answer_to_json(const GoldAnswer& answer) {
  if (answer.symbolic) return Json(answer.names);
  return Json(answer.value);
}

GoldAnswer answer_from_json(const Json& json) {
  GoldAnswer out;
  if (json.is_array()) {
    out.symbolic = true;
    out.names = json.get<std::vector<std::string>>();
  } else {
    out.value = json.get<std::int64_t>();
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl_file(const std::string& path, std::vector<std::string>* errors,
                               Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<T> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const DataError& e) {
      if (errors == nullptr) {
        throw DataError(path + ": line " + std::to_string(line_number) + ": " + e.what());
      }
      errors->push_back("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

std::string problem_to_jsonl(const Problem& problem) {
  Json json{
      {"id", problem.id},
      {"subtask", subtask_name(problem.subtask)},
      {"mode", mode_name(problem.mode)},
      {"template", problem.template_id},
      {"op", problem.op},
      {"context_target", problem.context_target},
      {"question", problem.question},
      {"statements", problem.statements},
      {"answer", answer_to_json(problem.answer)},
      {"solution", problem.solution},
      {"seed", std::to_string(problem.seed)},
  };
  return json.dump();
}

Problem problem_from_jsonl(const std::string& line) {
  try {
    const Json json = Json::parse(line);
    Problem out;
    out.id = json.at("id").get<std::string>();
    out.subtask = subtask_from_name(json.at("subtask").get<std::string>());
    out.mode = mode_from_name(json.at("mode").get<std::string>());
    out.template_id = json.at("template").get<std::string>();
    out.op = json.at("op").get<int>();
    out.context_target = json.at("context_target").get<int>();
    out.question = json.at("question").get<std::string>();
    out.statements = json.at("statements").get<std::vector<std::string>>();
    out.answer = answer_from_json(json.at("answer"));
    out.solution = json.at("solution").get<std::vector<std::string>>();
    out.seed = seed_from_string(json.at("seed").get<std::string>());
    return out;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed problem line: ") + e.what());
  }
}

std::string sidecar_to_jsonl(const Problem& problem) {
  Json json{
      {"id", problem.id},
      {"core_statement_indices", problem.core_statement_indices},
  };
  return json.dump();
}

std::string record_to_jsonl(const EvalRecord& record) {
  Json extracted;
  if (record.extracted.found) {
    extracted = record.extracted.symbolic ? Json(record.extracted.names)
                                          : Json(record.extracted.value);
  } else {
    extracted = nullptr;
  }
  Json json{
      {"problem_id", record.problem_id},
      {"subtask", subtask_name(record.subtask)},
      {"mode", mode_name(record.mode)},
      {"op", record.op},
      {"context_target", record.context_target},
      {"model", record.model},
      {"sample_index", record.sample_index},
      {"correct", record.correct},
      {"failure", record.failure.empty() ? Json(nullptr) : Json(record.failure)},
      {"extracted", extracted},
      {"completion", record.completion},
      {"retries", record.retries},
      {"latency_ms", record.latency_ms},
      {"prompt_tokens", record.prompt_tokens},
      {"completion_tokens", record.completion_tokens},
  };
  return json.dump();
}

EvalRecord record_from_jsonl(const std::string& line) {
  try {
    const Json json = Json::parse(line);
    EvalRecord out;
    out.problem_id = json.at("problem_id").get<std::string>();
    out.subtask = subtask_from_name(json.at("subtask").get<std::string>());
    out.mode = mode_from_name(json.at("mode").get<std::string>());
    out.op = json.at("op").get<int>();
    out.context_target = json.at("context_target").get<int>();
    out.model = json.at("model").get<std::string>();
    out.sample_index = json.at("sample_index").get<int>();
    out.correct = json.at("correct").get<bool>();
    if (!json.at("failure").is_null()) out.failure = json["failure"].get<std::string>();
    const Json& extracted = json.at("extracted");
    if (!extracted.is_null()) {
      out.extracted.found = true;
      if (extracted.is_array()) {
        out.extracted.symbolic = true;
        out.extracted.names = extracted.get<std::vector<std::string>>();
      } else {
        out.extracted.value = extracted.get<std::int64_t>();
      }
    }
    out.completion = json.at("completion").get<std::string>();
    out.retries = json.at("retries").get<int>();
    out.latency_ms = json.at("latency_ms").get<double>();
    out.prompt_tokens = json.at("prompt_tokens").get<int>();
    out.completion_tokens = json.at("completion_tokens").get<int>();
    return out;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed record line: ") + e.what());
  }
}

void write_problems(const std::string& path, const std::vector<Problem>& problems) {
  std::vector<std::string> lines;
  lines.reserve(problems.size());
  for (const auto& problem : problems) lines.push_back(problem_to_jsonl(problem));
  write_lines(path, lines, /*append=*/false);
}

void write_sidecar(const std::string& path, const std::vector<Problem>& problems) {
  std::vector<std::string> lines;
  lines.reserve(problems.size());
  for (const auto& problem : problems) lines.push_back(sidecar_to_jsonl(problem));
  write_lines(path, lines, /*append=*/false);
}

void append_records(const std::string& path, const std::vector<EvalRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& record : records) lines.push_back(record_to_jsonl(record));
  write_lines(path, lines, /*append=*/true);
}

std::vector<Problem> read_problems(const std::string& path, std::vector<std::string>* errors) {
  return read_jsonl_file<Problem>(path, errors, problem_from_jsonl);
}

namespace {

std::pair<std::string, std::vector<int>> sidecar_from_jsonl(const std::string& line) {
  try {
    const Json json = Json::parse(line);
    return {json.at("id").get<std::string>(),
            json.at("core_statement_indices").get<std::vector<int>>()};
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed sidecar line: ") + e.what());
  }
}

}  // namespace

std::map<std::string, std::vector<int>> read_sidecar(const std::string& path) {
  std::map<std::string, std::vector<int>> out;
  for (auto& [id, indices] :
       read_jsonl_file<std::pair<std::string, std::vector<int>>>(path, nullptr,
                                                                 sidecar_from_jsonl)) {
    out[id] = std::move(indices);
  }
  return out;
}

void apply_sidecar(std::vector<Problem>& problems,
                   const std::map<std::string, std::vector<int>>& sidecar) {
  for (auto& problem : problems) {
    if (auto it = sidecar.find(problem.id); it != sidecar.end())
      problem.core_statement_indices = it->second;
  }
}

std::vector<EvalRecord> read_records(const std::string& path, std::vector<std::string>* errors) {
  return read_jsonl_file<EvalRecord>(path, errors, record_from_jsonl);
}

std::string curve_to_csv(const AccuracyCurve& curve) {
  std::string out = "op,total,correct,accuracy\n";
  char row[96];
  for (const auto& [op, bucket] : curve.buckets()) {
    std::snprintf(row, sizeof row, "%d,%d,%d,%.6f\n", op, bucket.total, bucket.correct,
                  bucket.accuracy());
    out += row;
  }
  return out;
}

void write_curve_csv(const std::string& path, const AccuracyCurve& curve) {
  write_text_file(path, curve_to_csv(curve));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace opforge
