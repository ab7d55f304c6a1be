// Command-line front end: generate datasets, re-derive answers, run
// evaluations against live endpoints or offline mocks, and report curves.
//
// Exit codes: 0 success, 1 data error, 2 configuration error,
// 3 infrastructure error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "opforge/audit.hpp"
#include "opforge/client.hpp"
#include "opforge/errors.hpp"
#include "opforge/eval.hpp"
#include "opforge/gen.hpp"
#include "opforge/graph.hpp"
#include "opforge/io.hpp"
#include "opforge/parse.hpp"
#include "opforge/solver.hpp"
#include "opforge/templates.hpp"

#ifndef OPFORGE_VERSION
#define OPFORGE_VERSION "0.0.0"
#endif

namespace {

using opforge::ConfigError;
using opforge::DataError;
using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// "A..B" or a single "N"; both ends inclusive and at least 2.
std::pair<int, int> parse_ops_range(const std::string& text) {
  int lo = 0;
  int hi = 0;
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(text);
    } else {
      lo = std::stoi(text.substr(0, dots));
      hi = std::stoi(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse op range: " + text);
  }
  if (lo < 2 || hi < lo) throw ConfigError("op range must satisfy 2 <= A <= B: " + text);
  return {lo, hi};
}

std::vector<opforge::Template> load_template_files(const std::vector<std::string>& paths) {
  std::vector<opforge::Template> out;
  for (const auto& path : paths) out.push_back(opforge::template_from_json(read_file(path)));
  return out;
}

opforge::ModelEndpoint endpoint_from_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("endpoint config " + path + ": " + e.what());
  }
  opforge::ModelEndpoint e;
  e.base_url = j.value("base_url", "");
  e.path = j.value("path", e.path);
  e.model = j.value("model", "");
  e.auth_env = j.value("auth_env", "");
  e.max_output_tokens = j.value("max_output_tokens", e.max_output_tokens);
  e.temperature = j.value("temperature", e.temperature);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  e.retry_count = j.value("retry_count", e.retry_count);
  e.retry_backoff_ms = j.value("retry_backoff_ms", e.retry_backoff_ms);
  if (e.base_url.empty() || e.model.empty() || e.auth_env.empty())
    throw ConfigError("endpoint config needs base_url, model and auth_env: " + path);
  return e;
}

opforge::EmbeddingEndpoint embedding_endpoint_from_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("embedding config " + path + ": " + e.what());
  }
  opforge::EmbeddingEndpoint e;
  e.base_url = j.value("base_url", "");
  e.path = j.value("path", e.path);
  e.model = j.value("model", "");
  e.auth_env = j.value("auth_env", "");
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  e.retry_count = j.value("retry_count", e.retry_count);
  e.retry_backoff_ms = j.value("retry_backoff_ms", e.retry_backoff_ms);
  if (e.base_url.empty() || e.model.empty() || e.auth_env.empty())
    throw ConfigError("embedding config needs base_url, model and auth_env: " + path);
  return e;
}

// "gold-echo", "always-wrong", or "sigmoid:S,M".
std::unique_ptr<opforge::CompletionClient> make_mock(const std::string& desc,
                                                     const std::vector<opforge::Problem>& problems,
                                                     std::uint64_t seed) {
  if (desc == "gold-echo") return opforge::make_gold_echo_client(problems);
  if (desc == "always-wrong") return opforge::make_always_wrong_client();
  if (desc.rfind("sigmoid:", 0) == 0) {
    auto params = desc.substr(8);
    auto comma = params.find(',');
    if (comma == std::string::npos) throw ConfigError("sigmoid mock wants sigmoid:S,M: " + desc);
    try {
      double s = std::stod(params.substr(0, comma));
      double m = std::stod(params.substr(comma + 1));
      return opforge::make_sigmoid_client(problems, s, m, seed);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse sigmoid mock parameters: " + desc);
    }
  }
  throw ConfigError("unknown mock (expected gold-echo, always-wrong or sigmoid:S,M): " + desc);
}

void print_errors(const std::vector<std::string>& errors, const std::string& path) {
  for (const auto& e : errors) std::cerr << path << ": " << e << "\n";
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string subtask = "medium";
  std::string mode = "forward";
  std::string ops = "2..2";
  int per_op = 1;
  int context = 0;
  std::string noise_kind = "graph";
  std::vector<std::string> templates;
  std::vector<std::string> template_files;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string sidecar;
  std::string manifest;
  bool strict_noise = false;
  double spider_fraction = 0.7;
};

int run_generate(const GenerateArgs& args) {
  auto [op_lo, op_hi] = parse_ops_range(args.ops);
  auto subtask = opforge::subtask_from_name(args.subtask);
  if (subtask == opforge::Subtask::kSymbolic && args.mode != "forward")
    throw ConfigError("symbolic problems are forward-only");

  auto extra = load_template_files(args.template_files);
  std::vector<std::string> template_ids = args.templates;
  if (template_ids.empty()) template_ids = {"animal-zoo"};
  for (const auto& id : template_ids) opforge::find_template(id, extra);  // fail fast

  opforge::GenOptions options;
  options.strict_noise_values = args.strict_noise;
  options.spider_fraction = args.spider_fraction;

  std::vector<opforge::Problem> problems;
  std::uint64_t sequence = 0;
  for (int op = op_lo; op <= op_hi; ++op) {
    for (int k = 0; k < args.per_op; ++k, ++sequence) {
      opforge::GenSpec spec;
      spec.subtask = subtask;
      spec.mode = args.mode == "mixed"
                      ? (k % 2 == 0 ? opforge::Mode::kForward : opforge::Mode::kReverse)
                      : opforge::mode_from_name(args.mode);
      spec.target_ops = op;
      spec.context_target = args.context;
      spec.noise_kind =
          args.noise_kind == "filler" ? opforge::NoiseKind::kFiller : opforge::NoiseKind::kGraph;
      spec.template_id = template_ids[sequence % template_ids.size()];
      spec.seed = args.seed;
      problems.push_back(opforge::generate_problem(spec, static_cast<std::uint64_t>(k), extra,
                                                   options));
    }
  }

  if (args.out == "-") {
    for (const auto& p : problems) std::cout << opforge::problem_to_jsonl(p) << "\n";
  } else {
    opforge::write_problems(args.out, problems);
  }
  if (!args.sidecar.empty()) opforge::write_sidecar(args.sidecar, problems);

  if (!args.manifest.empty()) {
    json m;
    m["version"] = OPFORGE_VERSION;
    m["command"] = "generate";
    m["subtask"] = args.subtask;
    m["mode"] = args.mode;
    m["ops"] = {op_lo, op_hi};
    m["per_op"] = args.per_op;
    m["context_target"] = args.context;
    m["noise_kind"] = args.noise_kind;
    m["templates"] = template_ids;
    m["template_files"] = args.template_files;
    m["seed"] = std::to_string(args.seed);
    m["strict_noise"] = args.strict_noise;
    m["spider_fraction"] = args.spider_fraction;
    m["problems"] = problems.size();
    m["out"] = args.out;
    m["sidecar"] = args.sidecar;
    opforge::write_text_file(args.manifest, m.dump(2) + "\n");
  }

  std::cerr << "generated " << problems.size() << " problems (" << args.subtask << ", "
            << args.mode << ", ops " << op_lo << ".." << op_hi << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// solve: re-derive every answer from problem text alone
// ---------------------------------------------------------------------------

int run_solve(const std::string& in, const std::vector<std::string>& template_files) {
  auto extra = load_template_files(template_files);
  std::vector<std::string> errors;
  auto problems = opforge::read_problems(in, &errors);
  print_errors(errors, in);

  int mismatches = static_cast<int>(errors.size());
  for (const auto& problem : problems) {
    std::string reason;
    try {
      auto parsed = opforge::parse_problem(problem.question, extra);
      const auto& g = parsed.graph;
      if (g.subtask != problem.subtask || g.mode != problem.mode) {
        reason = "parsed subtask/mode disagrees with the record";
      } else if (g.subtask == opforge::Subtask::kSymbolic) {
        auto names = opforge::solve_find_all(g, g.find_all_target.value());
        if (!problem.answer.symbolic || names != problem.answer.names)
          reason = "find-all solution disagrees with the stored answer";
        // Distractor assignments are indistinguishable from core ones by
        // design, so the statement count only checks out on clean problems.
        if (reason.empty() && problem.context_target == 0 &&
            static_cast<int>(g.edges().size()) != problem.op)
          reason = "assignment count disagrees with the stored op";
      } else {
        std::int64_t value = 0;
        if (g.mode == opforge::Mode::kReverse) {
          auto solved = opforge::solve_reverse(g);
          if (solved.status != opforge::SolveStatus::kSolved)
            reason = std::string("reverse solve failed: ") +
                     opforge::solve_status_name(solved.status);
          value = solved.value;
        } else {
          value = opforge::evaluate(g, g.query);
        }
        if (reason.empty() && (problem.answer.symbolic || value != problem.answer.value))
          reason = "recomputed value disagrees with the stored answer";
        if (reason.empty() && opforge::op_count(g) != problem.op)
          reason = "recomputed op count disagrees with the stored op";
      }
    } catch (const opforge::Error& e) {
      reason = e.what();
    }
    if (!reason.empty()) {
      ++mismatches;
      std::cerr << problem.id << ": " << reason << "\n";
    }
  }

  std::cerr << "solved " << problems.size() << " problems, " << mismatches << " mismatches\n";
  return mismatches == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// render: show one problem with its gold derivation
// ---------------------------------------------------------------------------

int run_render(const std::string& in, int index) {
  auto problems = opforge::read_problems(in);
  if (index < 0 || index >= static_cast<int>(problems.size()))
    throw ConfigError("index out of range: dataset has " + std::to_string(problems.size()) +
                      " problems");
  const auto& p = problems[static_cast<std::size_t>(index)];
  std::cout << p.question << "\n\n";
  std::cout << "id: " << p.id << "  subtask: " << opforge::subtask_name(p.subtask)
            << "  mode: " << opforge::mode_name(p.mode) << "  op: " << p.op << "\n";
  std::cout << "gold solution:\n";
  for (const auto& line : p.solution) std::cout << "  " << line << "\n";
  if (p.answer.symbolic) {
    std::cout << "answer:";
    if (p.answer.names.empty()) std::cout << " none";
    for (const auto& n : p.answer.names) std::cout << " " << n;
    std::cout << "\n";
  } else {
    std::cout << "answer: " << p.answer.value << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string in;
  std::string endpoint;
  std::string mock;
  std::uint64_t mock_seed = 0;
  int samples = 1;
  int max_in_flight = 4;
  std::string out = "-";
  std::string audit_log;
  bool resume = false;
};

int run_evaluate(const EvaluateArgs& args) {
  if (args.endpoint.empty() == args.mock.empty())
    throw ConfigError("pick exactly one of --endpoint and --mock");
  if (args.resume && args.out == "-") throw ConfigError("--resume needs --out pointing at a file");

  auto problems = opforge::read_problems(args.in);
  if (problems.empty()) throw DataError("no problems in " + args.in);

  std::unique_ptr<opforge::CompletionClient> client;
  int max_in_flight = args.max_in_flight;
  if (!args.endpoint.empty()) {
    auto endpoint = endpoint_from_file(args.endpoint);
    std::string audit = args.audit_log;
    if (audit.empty() && args.out != "-") audit = args.out + ".http.jsonl";
    client = opforge::make_http_client(endpoint, audit);
    max_in_flight = std::min(max_in_flight, endpoint.max_in_flight);
  } else {
    client = make_mock(args.mock, problems, args.mock_seed);
  }

  std::set<std::pair<std::string, int>> done;
  if (args.resume && std::ifstream(args.out).good()) {
    std::vector<std::string> errors;
    for (const auto& r : opforge::read_records(args.out, &errors))
      done.insert({r.problem_id, r.sample_index});
    print_errors(errors, args.out);
    std::cerr << "resuming past " << done.size() << " finished samples\n";
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (args.out != "-") {
    out_file.open(args.out, args.resume ? std::ios::app : std::ios::trunc);
    if (!out_file) throw ConfigError("cannot open for writing: " + args.out);
    out = &out_file;
  }

  int written = 0;
  int correct = 0;
  int infra = 0;
  int extraction = 0;
  opforge::EvalRunOptions run;
  run.samples = args.samples;
  run.max_in_flight = max_in_flight;
  run.on_record = [&](const opforge::EvalRecord& r) {
    (*out) << opforge::record_to_jsonl(r) << "\n";
    out->flush();
    ++written;
    if (r.failure == "infrastructure") ++infra;
    if (r.failure == "extraction") ++extraction;
    if (r.correct) ++correct;
  };
  if (!done.empty())
    run.already_done = [&done](const std::string& id, int sample) {
      return done.count({id, sample}) > 0;
    };

  opforge::run_evaluation(problems, *client, run);

  int graded = written - infra;
  std::cerr << "evaluated " << written << " samples with " << client->model_name() << ": "
            << correct << "/" << graded << " correct";
  if (graded > 0)
    std::cerr << " (" << 100.0 * correct / graded << "%)";
  std::cerr << ", " << infra << " infrastructure failures, " << extraction
            << " extraction failures\n";
  return 0;
}

// ---------------------------------------------------------------------------
// grade: re-run extraction and grading over stored completions
// ---------------------------------------------------------------------------

int run_grade(const std::string& records_in, const std::string& problems_in,
              const std::string& out) {
  auto problems = opforge::read_problems(problems_in);
  std::map<std::string, const opforge::GoldAnswer*> gold;
  for (const auto& p : problems) gold[p.id] = &p.answer;

  std::vector<std::string> errors;
  auto records = opforge::read_records(records_in, &errors);
  print_errors(errors, records_in);

  int changed = 0;
  for (auto& r : records) {
    auto it = gold.find(r.problem_id);
    if (it == gold.end()) throw DataError("record references unknown problem: " + r.problem_id);
    if (r.failure == "infrastructure") continue;  // no completion to regrade
    bool was_correct = r.correct;
    r.extracted = opforge::extract_answer(r.completion, it->second->symbolic);
    r.correct = r.extracted.found && opforge::grade(r.extracted, *it->second);
    r.failure = r.extracted.found ? "" : "extraction";
    if (r.correct != was_correct) ++changed;
  }

  if (out == "-") {
    for (const auto& r : records) std::cout << opforge::record_to_jsonl(r) << "\n";
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw ConfigError("cannot open for writing: " + out);
    for (const auto& r : records) f << opforge::record_to_jsonl(r) << "\n";
  }
  std::cerr << "regraded " << records.size() << " records, " << changed << " verdicts changed\n";
  return errors.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

json curve_json(const opforge::AccuracyCurve& curve) {
  json rows = json::array();
  for (const auto& [op, bucket] : curve.buckets()) {
    json row;
    row["op"] = op;
    row["total"] = bucket.total;
    row["correct"] = bucket.correct;
    row["accuracy"] = bucket.accuracy();
    rows.push_back(row);
  }
  return rows;
}

std::string insert_suffix(const std::string& path, const std::string& suffix) {
  auto dot = path.rfind('.');
  auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int run_report(const std::string& records_in, const std::string& out,
               const std::string& curve_csv, double threshold) {
  std::vector<std::string> errors;
  auto records = opforge::read_records(records_in, &errors);
  print_errors(errors, records_in);
  if (records.empty()) throw DataError("no records in " + records_in);

  using GroupKey = std::tuple<std::string, std::string, int>;  // subtask, mode, context
  std::map<GroupKey, std::vector<const opforge::EvalRecord*>> groups;
  int infra = 0;
  int extraction = 0;
  int max_sample = 0;
  for (const auto& r : records) {
    groups[{opforge::subtask_name(r.subtask), opforge::mode_name(r.mode), r.context_target}]
        .push_back(&r);
    if (r.failure == "infrastructure") ++infra;
    if (r.failure == "extraction") ++extraction;
    max_sample = std::max(max_sample, r.sample_index);
  }

  json report;
  report["model"] = records.front().model;
  report["records"] = records.size();
  report["infrastructure_failures"] = infra;
  report["extraction_failures"] = extraction;
  report["threshold"] = threshold;
  report["groups"] = json::array();

  for (const auto& [key, members] : groups) {
    std::vector<opforge::EvalRecord> slice;
    slice.reserve(members.size());
    for (const auto* r : members) slice.push_back(*r);
    auto curve = opforge::curve_from_records(slice);
    auto auc = opforge::auc_to_threshold(curve, threshold);
    auto stats = opforge::curve_stats(curve);
    auto fit = opforge::fit_sigmoid(curve);

    json g;
    g["subtask"] = std::get<0>(key);
    g["mode"] = std::get<1>(key);
    g["context_target"] = std::get<2>(key);
    g["samples"] = members.size();
    g["auc"] = auc.auc;
    g["auc_cutoff_op"] = auc.cutoff_op;
    g["auc_right_censored"] = auc.right_censored;
    g["first_below_half"] =
        stats.first_below_half ? json(*stats.first_below_half) : json(nullptr);
    g["first_below_tenth"] =
        stats.first_below_tenth ? json(*stats.first_below_tenth) : json(nullptr);
    g["mean_accuracy_2_31"] = stats.mean_accuracy_2_31;
    json fj;
    fj["ok"] = fit.ok;
    fj["steepness"] = fit.steepness;
    fj["midpoint"] = fit.midpoint;
    fj["r_squared"] = fit.r_squared;
    g["sigmoid"] = fj;
    g["curve"] = curve_json(curve);
    report["groups"].push_back(g);

    if (!curve_csv.empty()) {
      std::string path = curve_csv;
      if (groups.size() > 1)
        path = insert_suffix(curve_csv, "-" + std::get<0>(key) + "-" + std::get<1>(key) + "-" +
                                            std::to_string(std::get<2>(key)));
      opforge::write_curve_csv(path, curve);
    }
  }

  // With repeated samples per problem, accuracy at N attempts counts a
  // problem solved when any of its first N samples graded correct.
  if (max_sample > 0) {
    json by_n = json::array();
    std::vector<std::pair<int, double>> auc_by_n;
    for (int n = 1; n <= max_sample + 1; n *= 2) {
      // (op, problem) -> any-correct over graded samples below n
      std::map<std::pair<int, std::string>, std::optional<bool>> any;
      for (const auto& r : records) {
        if (r.sample_index >= n || r.failure == "infrastructure") continue;
        auto& slot = any[{r.op, r.problem_id}];
        slot = slot.value_or(false) || r.correct;
      }
      opforge::AccuracyCurve curve;
      for (const auto& [key, solved] : any) curve.add(key.first, solved.value());
      auto auc = opforge::auc_to_threshold(curve, threshold);
      json row;
      row["n"] = n;
      row["auc"] = auc.auc;
      row["right_censored"] = auc.right_censored;
      by_n.push_back(row);
      auc_by_n.push_back({n, auc.auc});
    }
    json rs;
    rs["by_n"] = by_n;
    if (auc_by_n.size() >= 2) {
      auto trend = opforge::auc_vs_log2n(auc_by_n);
      rs["auc_per_doubling"] = trend.slope;
      rs["trend_r_squared"] = trend.r_squared;
    }
    report["repeated_sampling"] = rs;
  }

  std::string text = report.dump(2) + "\n";
  if (out == "-") {
    std::cout << text;
  } else {
    opforge::write_text_file(out, text);
  }
  return errors.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// audit: are distractors separable from load-bearing statements?
// ---------------------------------------------------------------------------

int run_audit(const std::string& in, const std::string& sidecar,
              const std::string& embedding_config, int dimensions) {
  auto problems = opforge::read_problems(in);
  if (!sidecar.empty()) opforge::apply_sidecar(problems, opforge::read_sidecar(sidecar));
  std::unique_ptr<opforge::EmbeddingClient> client =
      embedding_config.empty()
          ? opforge::make_hash_embedding_client(dimensions)
          : opforge::make_http_embedding_client(embedding_endpoint_from_file(embedding_config));
  auto report = opforge::noise_separability(problems, *client);
  json j;
  j["model"] = client->model_name();
  j["problems"] = report.problems;
  j["core_statements"] = report.core_statements;
  j["noise_statements"] = report.noise_statements;
  j["probability_core_closer"] = report.probability_core_closer;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic math-reasoning benchmark generator and evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", OPFORGE_VERSION);

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "Generate a problem dataset");
  gen->add_option("--subtask", gen_args.subtask, "symbolic, medium or hard")
      ->check(CLI::IsMember({"symbolic", "medium", "hard"}));
  gen->add_option("--mode", gen_args.mode, "forward, reverse or mixed")
      ->check(CLI::IsMember({"forward", "reverse", "mixed"}));
  gen->add_option("--ops", gen_args.ops, "op count: N or A..B (inclusive)");
  gen->add_option("--per-op", gen_args.per_op, "problems per op value")->check(CLI::PositiveNumber);
  gen->add_option("--context", gen_args.context, "distractor token budget, 0 for clean problems");
  gen->add_option("--noise-kind", gen_args.noise_kind, "graph (on-template) or filler (off-topic)")
      ->check(CLI::IsMember({"graph", "filler"}));
  gen->add_option("--template", gen_args.templates, "template id, repeatable; round-robin");
  gen->add_option("--template-file", gen_args.template_files, "extra template JSON, repeatable");
  gen->add_option("--seed", gen_args.seed, "run seed");
  gen->add_option("--out", gen_args.out, "output JSONL path, - for stdout");
  gen->add_option("--sidecar", gen_args.sidecar, "core-statement-index sidecar JSONL path");
  gen->add_option("--manifest", gen_args.manifest, "write a run manifest JSON here");
  gen->add_flag("--strict-noise", gen_args.strict_noise, "keep distractor values inside [1, 999]");
  gen->add_option("--spider-fraction", gen_args.spider_fraction,
                  "minimum fraction of distractor edges hanging off the core")
      ->check(CLI::Range(0.0, 1.0));

  std::string solve_in;
  std::vector<std::string> solve_template_files;
  auto* solve = app.add_subcommand("solve", "Re-derive answers from problem text and compare");
  solve->add_option("--in", solve_in, "problems JSONL")->required();
  solve->add_option("--template-file", solve_template_files, "extra template JSON, repeatable");

  std::string render_in;
  int render_index = 0;
  auto* render = app.add_subcommand("render", "Print one problem with its gold derivation");
  render->add_option("--in", render_in, "problems JSONL")->required();
  render->add_option("--index", render_index, "0-based problem index");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Run problems through a model");
  evaluate->add_option("--in", eval_args.in, "problems JSONL")->required();
  evaluate->add_option("--endpoint", eval_args.endpoint, "endpoint config JSON path");
  evaluate->add_option("--mock", eval_args.mock, "gold-echo, always-wrong or sigmoid:S,M");
  evaluate->add_option("--mock-seed", eval_args.mock_seed, "seed for stochastic mocks");
  evaluate->add_option("--samples", eval_args.samples, "samples per problem")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--max-in-flight", eval_args.max_in_flight, "concurrent requests")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--out", eval_args.out, "records JSONL path, - for stdout");
  evaluate->add_option("--audit-log", eval_args.audit_log,
                       "HTTP audit log path (status/latency/sizes only)");
  evaluate->add_flag("--resume", eval_args.resume, "skip samples already present in --out");

  std::string grade_records;
  std::string grade_problems;
  std::string grade_out = "-";
  auto* grade = app.add_subcommand("grade", "Re-extract and re-grade stored completions");
  grade->add_option("--records", grade_records, "records JSONL")->required();
  grade->add_option("--problems", grade_problems, "problems JSONL with gold answers")->required();
  grade->add_option("--out", grade_out, "updated records JSONL path, - for stdout");

  std::string report_records;
  std::string report_out = "-";
  std::string report_csv;
  double report_threshold = 0.05;
  auto* report = app.add_subcommand("report", "Accuracy curves, AUC and sigmoid fits");
  report->add_option("--records", report_records, "records JSONL")->required();
  report->add_option("--out", report_out, "report JSON path, - for stdout");
  report->add_option("--curve-csv", report_csv, "accuracy curve CSV path (per group)");
  report->add_option("--threshold", report_threshold, "AUC accuracy cutoff")
      ->check(CLI::Range(0.0, 1.0));

  std::string audit_in;
  std::string audit_sidecar;
  std::string audit_embedding;
  int audit_dims = 256;
  auto* audit = app.add_subcommand("audit", "Check distractor separability with embeddings");
  audit->add_option("--in", audit_in, "problems JSONL")->required();
  audit->add_option("--sidecar", audit_sidecar, "core-statement-index sidecar JSONL")->required();
  audit->add_option("--embedding-endpoint", audit_embedding, "embeddings endpoint config JSON");
  audit->add_option("--dims", audit_dims, "hash embedding dimensions (offline default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return run_generate(gen_args);
    if (*solve) return run_solve(solve_in, solve_template_files);
    if (*render) return run_render(render_in, render_index);
    if (*evaluate) return run_evaluate(eval_args);
    if (*grade) return run_grade(grade_records, grade_problems, grade_out);
    if (*report) return run_report(report_records, report_out, report_csv, report_threshold);
    if (*audit) return run_audit(audit_in, audit_sidecar, audit_embedding, audit_dims);
  } catch (const opforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const opforge::InfraError& e) {
    std::cerr << "infrastructure error: " << e.what() << "\n";
    return 3;
  } catch (const opforge::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const opforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
