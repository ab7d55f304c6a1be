#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opforge/eval.hpp"
#include "opforge/gen.hpp"

namespace opforge {

// Connection settings for an OpenAI-style chat completions endpoint. The API
// key is read once from the named environment variable; its value never
// appears in logs, records or error messages.
struct ModelEndpoint {
  std::string base_url;  // "http://host:port" or "https://host:port"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string auth_env;  // environment variable holding the bearer token
  int max_output_tokens = 1024;
  double temperature = 0.0;
  int timeout_seconds = 120;
  int max_in_flight = 4;
  int retry_count = 3;
  int retry_backoff_ms = 500;
};

struct Completion {
  std::string text;
  bool infrastructure_failure = false;
  std::string error;  // transport/status detail when failed
  int retries = 0;
  double latency_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

// One model behind a uniform interface. complete() must be safe to call from
// several threads at once; sample_index distinguishes repeated draws on the
// same prompt so stochastic mocks stay deterministic under any scheduling.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual Completion complete(const std::string& prompt, int sample_index) = 0;
  virtual std::string model_name() const = 0;
};

// HTTP-backed client. Transport errors, HTTP 429 and 5xx retry with linear
// backoff up to endpoint.retry_count times; other statuses fail immediately
// as infrastructure failures. When `audit_log_path` is non-empty, one JSON
// line per attempt (status, latency, sizes; never payloads or keys) is
// appended there. Throws ConfigError for a malformed URL or a missing auth
// variable.
std::unique_ptr<CompletionClient> make_http_client(const ModelEndpoint& endpoint,
                                                   const std::string& audit_log_path = {});

// Offline mocks, all with zero latency and no failures.
//
// Gold echo answers every prompt with its problem's gold answer sentence.
std::unique_ptr<CompletionClient> make_gold_echo_client(const std::vector<Problem>& problems);

// Always-wrong answers with a value (or variable set) no generated problem
// uses.
std::unique_ptr<CompletionClient> make_always_wrong_client();

// Sigmoid responder: correct with probability 1/(1+exp(s*(op-m))), drawn
// deterministically from (problem id, sample index, seed).
std::unique_ptr<CompletionClient> make_sigmoid_client(const std::vector<Problem>& problems,
                                                      double steepness, double midpoint,
                                                      std::uint64_t seed);

struct EvalRunOptions {
  int samples = 1;
  int max_in_flight = 4;
  // Called with each finished record, in (problem, sample) submission order
  // regardless of completion order; useful for streaming output.
  std::function<void(const EvalRecord&)> on_record;
  // Problem ids already evaluated (with their sample counts) skip the model
  // call entirely; used to resume interrupted runs.
  std::function<bool(const std::string& problem_id, int sample_index)> already_done;
};

// Runs every (problem, sample) pair through the client with a bounded worker
// pool and returns records in submission order. Grading happens here:
// extraction failures count as wrong, infrastructure failures carry no grade
// and are excluded from accuracy denominators downstream.
std::vector<EvalRecord> run_evaluation(const std::vector<Problem>& problems,
                                       CompletionClient& client,
                                       const EvalRunOptions& options = {});

}  // namespace opforge
