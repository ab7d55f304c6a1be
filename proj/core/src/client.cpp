#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "opforge/client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "opforge/rng.hpp"

namespace opforge {

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_since(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
}

std::string gold_answer_text(const GoldAnswer& answer) {
  if (!answer.symbolic) return "Answer: " + std::to_string(answer.value) + ".";
  std::string names;
  for (const auto& name : answer.names) names += (names.empty() ? "" : ", ") + name;
  return "Answer: " + (names.empty() ? "none" : names) + ".";
}

// No generated problem answers 0 or uses a one-digit variable id, so these
// always grade as incorrect without colliding with a real answer.
std::string wrong_answer_text(const std::string& prompt) {
  const bool symbolic = prompt.find("<context>") != std::string::npos;
  return symbolic ? "Answer: V0." : "Answer: 0.";
}

class HttpCompletionClient final : public CompletionClient {
 public:
  HttpCompletionClient(ModelEndpoint endpoint, std::string audit_log_path)
      : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.rfind("http://", 0) != 0 &&
        endpoint_.base_url.rfind("https://", 0) != 0) {
      throw ConfigError("endpoint base_url must start with http:// or https://");
    }
    if (!endpoint_.auth_env.empty()) {
      const char* value = std::getenv(endpoint_.auth_env.c_str());
      if (value == nullptr || *value == '\0') {
        throw ConfigError("auth environment variable is not set: " + endpoint_.auth_env);
      }
      bearer_ = value;
    }
    if (!audit_log_path.empty()) {
      audit_.open(audit_log_path, std::ios::app);
      if (!audit_) throw ConfigError("cannot open audit log: " + audit_log_path);
    }
  }

  std::string model_name() const override { return endpoint_.model; }

  Completion complete(const std::string& prompt, int /*sample_index*/) override {
    nlohmann::ordered_json body{
        {"model", endpoint_.model},
        {"messages", nlohmann::ordered_json::array(
                         {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}})},
        {"max_tokens", endpoint_.max_output_tokens},
        {"temperature", endpoint_.temperature},
    };
    const std::string payload = body.dump();

    Completion out;
    const auto start = SteadyClock::now();
    for (int attempt = 0; attempt <= endpoint_.retry_count; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long long>(endpoint_.retry_backoff_ms) * attempt));
        out.retries = attempt;
      }
      const auto attempt_start = SteadyClock::now();
      httplib::Client http(endpoint_.base_url);
      http.set_connection_timeout(endpoint_.timeout_seconds, 0);
      http.set_read_timeout(endpoint_.timeout_seconds, 0);
      http.set_write_timeout(endpoint_.timeout_seconds, 0);
      httplib::Headers headers;
      if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

      auto result = http.Post(endpoint_.path, headers, payload, "application/json");
      const double attempt_ms = ms_since(attempt_start);

      if (!result) {
        const int code = static_cast<int>(result.error());
        audit_line(attempt, std::nullopt, code, attempt_ms, payload.size(), 0);
        out.error = "transport error " + std::to_string(code);
        continue;  // retryable
      }
      const int status = result->status;
      audit_line(attempt, status, std::nullopt, attempt_ms, payload.size(), result->body.size());
      if (status == 429 || status >= 500) {
        out.error = "http " + std::to_string(status);
        continue;  // retryable
      }
      out.latency_ms = ms_since(start);
      if (status != 200) {
        out.error = "http " + std::to_string(status);
        out.infrastructure_failure = true;
        return out;
      }
      try {
        const auto json = nlohmann::json::parse(result->body);
        out.text = json.at("choices").at(0).at("message").at("content").get<std::string>();
        if (json.contains("usage")) {
          out.prompt_tokens = json["usage"].value("prompt_tokens", 0);
          out.completion_tokens = json["usage"].value("completion_tokens", 0);
        }
        out.error.clear();
      } catch (const nlohmann::json::exception& e) {
        out.error = std::string("malformed response body: ") + e.what();
        out.infrastructure_failure = true;
      }
      return out;
    }
    out.latency_ms = ms_since(start);
    out.infrastructure_failure = true;
    if (out.error.empty()) out.error = "retries exhausted";
    return out;
  }

 private:
  void audit_line(int attempt, std::optional<int> status, std::optional<int> transport_error,
                  double latency_ms, std::size_t request_bytes, std::size_t response_bytes) {
    if (!audit_.is_open()) return;
    nlohmann::ordered_json line{
        {"ts_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count()},
        {"model", endpoint_.model},
        {"path", endpoint_.path},
        {"attempt", attempt},
        {"status", status ? nlohmann::ordered_json(*status) : nlohmann::ordered_json(nullptr)},
        {"transport_error", transport_error ? nlohmann::ordered_json(*transport_error)
                                            : nlohmann::ordered_json(nullptr)},
        {"latency_ms", latency_ms},
        {"request_bytes", request_bytes},
        {"response_bytes", response_bytes},
    };
    std::lock_guard<std::mutex> lock(audit_mutex_);
    audit_ << line.dump() << '\n';
    audit_.flush();
  }

  ModelEndpoint endpoint_;
  std::string bearer_;
  std::ofstream audit_;
  std::mutex audit_mutex_;
};

// Shared lookup for prompt-keyed mocks.
class PromptIndex {
 public:
  explicit PromptIndex(const std::vector<Problem>& problems) {
    for (const auto& problem : problems) by_question_.emplace(problem.question, &problem);
  }

  const Problem* find(const std::string& prompt) const {
    auto it = by_question_.find(prompt);
    return it == by_question_.end() ? nullptr : it->second;
  }

 private:
  std::map<std::string, const Problem*> by_question_;
};

class GoldEchoClient final : public CompletionClient {
 public:
  explicit GoldEchoClient(const std::vector<Problem>& problems) : index_(problems) {}

  std::string model_name() const override { return "mock-gold-echo"; }

  Completion complete(const std::string& prompt, int /*sample_index*/) override {
    Completion out;
    const Problem* problem = index_.find(prompt);
    if (problem == nullptr) {
      out.infrastructure_failure = true;
      out.error = "prompt not in the evaluated problem set";
      return out;
    }
    out.text = gold_answer_text(problem->answer);
    return out;
  }

 private:
  PromptIndex index_;
};

class AlwaysWrongClient final : public CompletionClient {
 public:
  std::string model_name() const override { return "mock-always-wrong"; }

  Completion complete(const std::string& prompt, int /*sample_index*/) override {
    Completion out;
    out.text = wrong_answer_text(prompt);
    return out;
  }
};

class SigmoidClient final : public CompletionClient {
 public:
  SigmoidClient(const std::vector<Problem>& problems, double steepness, double midpoint,
                std::uint64_t seed)
      : index_(problems), steepness_(steepness), midpoint_(midpoint), seed_(seed) {}

  std::string model_name() const override { return "mock-sigmoid"; }

  Completion complete(const std::string& prompt, int sample_index) override {
    Completion out;
    const Problem* problem = index_.find(prompt);
    if (problem == nullptr) {
      out.infrastructure_failure = true;
      out.error = "prompt not in the evaluated problem set";
      return out;
    }
    const double p =
        1.0 / (1.0 + std::exp(steepness_ * (static_cast<double>(problem->op) - midpoint_)));
    std::uint64_t state =
        fnv1a64(problem->id + "#" + std::to_string(sample_index)) ^ seed_;
    const double draw = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    out.text = draw < p ? gold_answer_text(problem->answer) : wrong_answer_text(prompt);
    return out;
  }

 private:
  PromptIndex index_;
  double steepness_;
  double midpoint_;
  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<CompletionClient> make_http_client(const ModelEndpoint& endpoint,
                                                   const std::string& audit_log_path) {
  return std::make_unique<HttpCompletionClient>(endpoint, audit_log_path);
}

std::unique_ptr<CompletionClient> make_gold_echo_client(const std::vector<Problem>& problems) {
  return std::make_unique<GoldEchoClient>(problems);
}

std::unique_ptr<CompletionClient> make_always_wrong_client() {
  return std::make_unique<AlwaysWrongClient>();
}

std::unique_ptr<CompletionClient> make_sigmoid_client(const std::vector<Problem>& problems,
                                                      double steepness, double midpoint,
                                                      std::uint64_t seed) {
  return std::make_unique<SigmoidClient>(problems, steepness, midpoint, seed);
}

std::vector<EvalRecord> run_evaluation(const std::vector<Problem>& problems,
                                       CompletionClient& client,
                                       const EvalRunOptions& options) {
  if (options.samples < 1) throw ConfigError("evaluation needs at least one sample");

  struct Task {
    const Problem* problem;
    int sample;
  };
  std::vector<Task> tasks;
  for (const auto& problem : problems) {
    for (int sample = 0; sample < options.samples; ++sample) {
      if (options.already_done && options.already_done(problem.id, sample)) continue;
      tasks.push_back({&problem, sample});
    }
  }
  std::vector<EvalRecord> out(tasks.size());
  if (tasks.empty()) return out;

  const std::string model = client.model_name();
  std::atomic<std::size_t> next{0};
  std::mutex flush_mutex;
  std::vector<char> done(tasks.size(), 0);
  std::size_t flushed = 0;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];

      EvalRecord record;
      record.problem_id = task.problem->id;
      record.subtask = task.problem->subtask;
      record.mode = task.problem->mode;
      record.op = task.problem->op;
      record.context_target = task.problem->context_target;
      record.model = model;
      record.sample_index = task.sample;
      try {
        const Completion completion = client.complete(task.problem->question, task.sample);
        record.completion = completion.text;
        record.retries = completion.retries;
        record.latency_ms = completion.latency_ms;
        record.prompt_tokens = completion.prompt_tokens;
        record.completion_tokens = completion.completion_tokens;
        if (completion.infrastructure_failure) {
          record.failure = "infrastructure";
        } else {
          record.extracted = extract_answer(completion.text, task.problem->answer.symbolic);
          if (!record.extracted.found) record.failure = "extraction";
          record.correct = grade(record.extracted, task.problem->answer);
        }
      } catch (const std::exception&) {
        record.failure = "infrastructure";
        record.correct = false;
        record.completion.clear();
      }

      std::lock_guard<std::mutex> lock(flush_mutex);
      out[i] = std::move(record);
      done[i] = 1;
      while (flushed < tasks.size() && done[flushed]) {
        if (options.on_record) options.on_record(out[flushed]);
        ++flushed;
      }
    }
  };

  const int worker_count = std::clamp<int>(options.max_in_flight, 1,
                                           static_cast<int>(tasks.size()));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(worker_count));
  for (int i = 0; i < worker_count; ++i) workers.emplace_back(worker);
  for (auto& thread : workers) thread.join();
  return out;
}

}  // namespace opforge
