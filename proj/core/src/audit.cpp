#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "opforge/audit.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "opforge/eval.hpp"
#include "opforge/rng.hpp"

namespace opforge {

namespace {

class HttpEmbeddingClient final : public EmbeddingClient {
 public:
  explicit HttpEmbeddingClient(EmbeddingEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.rfind("http://", 0) != 0 &&
        endpoint_.base_url.rfind("https://", 0) != 0) {
      throw ConfigError("embedding base_url must start with http:// or https://");
    }
    if (!endpoint_.auth_env.empty()) {
      const char* value = std::getenv(endpoint_.auth_env.c_str());
      if (value == nullptr || *value == '\0') {
        throw ConfigError("auth environment variable is not set: " + endpoint_.auth_env);
      }
      bearer_ = value;
    }
  }

  std::string model_name() const override { return endpoint_.model; }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    nlohmann::ordered_json body{{"model", endpoint_.model}, {"input", texts}};
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= endpoint_.retry_count; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            static_cast<long long>(endpoint_.retry_backoff_ms) * attempt));
      }
      httplib::Client http(endpoint_.base_url);
      http.set_connection_timeout(endpoint_.timeout_seconds, 0);
      http.set_read_timeout(endpoint_.timeout_seconds, 0);
      httplib::Headers headers;
      if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

      auto result = http.Post(endpoint_.path, headers, payload, "application/json");
      if (!result) {
        last_error = "transport error " + std::to_string(static_cast<int>(result.error()));
        continue;
      }
      if (result->status == 429 || result->status >= 500) {
        last_error = "http " + std::to_string(result->status);
        continue;
      }
      if (result->status != 200) {
        throw InfraError("embedding request failed: http " + std::to_string(result->status));
      }
      try {
        const auto json = nlohmann::json::parse(result->body);
        std::vector<std::vector<double>> out(texts.size());
        for (const auto& item : json.at("data")) {
          const std::size_t index = item.at("index").get<std::size_t>();
          if (index >= out.size()) throw InfraError("embedding response index out of range");
          out[index] = item.at("embedding").get<std::vector<double>>();
        }
        return out;
      } catch (const nlohmann::json::exception& e) {
        throw InfraError(std::string("malformed embedding response: ") + e.what());
      }
    }
    throw InfraError("embedding request failed after retries: " + last_error);
  }

 private:
  EmbeddingEndpoint endpoint_;
  std::string bearer_;
};

class HashEmbeddingClient final : public EmbeddingClient {
 public:
  explicit HashEmbeddingClient(int dimensions) : dimensions_(dimensions) {
    if (dimensions_ < 8) throw ConfigError("hash embedding needs at least 8 dimensions");
  }

  std::string model_name() const override { return "hash-trigram"; }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(embed_one(text));
    return out;
  }

 private:
  std::vector<double> embed_one(const std::string& text) const {
    std::vector<double> v(static_cast<std::size_t>(dimensions_), 0.0);
    if (text.size() >= 3) {
      for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
        const std::uint64_t h = fnv1a64(std::string_view(text).substr(i, 3));
        v[h % static_cast<std::uint64_t>(dimensions_)] += 1.0;
      }
    }
    double norm = 0;
    for (const double x : v) norm += x * x;
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

  int dimensions_;
};

// The clause the model is actually asked about, without the statement run.
std::string question_clause(const Problem& problem) {
  const std::string& q = problem.question;
  if (auto pos = q.find(" Question: "); pos != std::string::npos) {
    return q.substr(pos + 11);
  }
  if (auto pos = q.find("\n</context>\n\n"); pos != std::string::npos) {
    return q.substr(pos + 13);
  }
  return q;
}

}  // namespace

std::unique_ptr<EmbeddingClient> make_http_embedding_client(const EmbeddingEndpoint& endpoint) {
  return std::make_unique<HttpEmbeddingClient>(endpoint);
}

std::unique_ptr<EmbeddingClient> make_hash_embedding_client(int dimensions) {
  return std::make_unique<HashEmbeddingClient>(dimensions);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SeparabilityReport noise_separability(const std::vector<Problem>& problems,
                                      EmbeddingClient& embeddings) {
  SeparabilityReport report;
  std::vector<double> core_scores;
  std::vector<double> noise_scores;

  for (const auto& problem : problems) {
    const std::set<int> core_indices(problem.core_statement_indices.begin(),
                                     problem.core_statement_indices.end());
    // Without the sidecar mask there is nothing to compare; an all-core
    // problem has nothing to hide.
    if (core_indices.empty() || core_indices.size() == problem.statements.size()) continue;

    std::vector<std::string> texts{question_clause(problem)};
    texts.insert(texts.end(), problem.statements.begin(), problem.statements.end());
    const auto vectors = embeddings.embed(texts);
    if (vectors.size() != texts.size()) {
      throw InfraError("embedding batch size mismatch");
    }

    ++report.problems;
    for (std::size_t i = 0; i < problem.statements.size(); ++i) {
      const double score = cosine_similarity(vectors[0], vectors[i + 1]);
      if (core_indices.count(static_cast<int>(i))) {
        core_scores.push_back(score);
        ++report.core_statements;
      } else {
        noise_scores.push_back(score);
        ++report.noise_statements;
      }
    }
  }

  if (!core_scores.empty() && !noise_scores.empty()) {
    report.probability_core_closer = mann_whitney_auc(core_scores, noise_scores);
  }
  return report;
}

}  // namespace opforge
