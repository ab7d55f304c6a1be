#pragma once

#include <memory>
#include <string>
#include <vector>

#include "opforge/gen.hpp"

namespace opforge {

// Text embedding behind a uniform interface; one call embeds a batch in
// input order.
class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string model_name() const = 0;
};

struct EmbeddingEndpoint {
  std::string base_url;
  std::string path = "/v1/embeddings";
  std::string model;
  std::string auth_env;  // environment variable holding the bearer token
  int timeout_seconds = 120;
  int retry_count = 3;
  int retry_backoff_ms = 500;
};

// OpenAI-style embeddings endpoint; same retry policy and key handling as the
// completion client. Throws InfraError when retries are exhausted.
std::unique_ptr<EmbeddingClient> make_http_embedding_client(const EmbeddingEndpoint& endpoint);

// Offline embedding: hashed character trigrams, L2-normalized. Deterministic,
// crude, and sufficient to catch distractors drawn from a different
// vocabulary than the core.
std::unique_ptr<EmbeddingClient> make_hash_embedding_client(int dimensions = 256);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Distractor camouflage audit. Each statement is scored by cosine similarity
// to the problem's question clause; the report's probability is the
// Mann-Whitney AUC of core scores over noise scores. 0.5 means statements
// carry no signal about which are load-bearing; values near 1.0 mean the
// noise is trivially separable and the context extension is not testing
// retrieval.
struct SeparabilityReport {
  int problems = 0;
  int core_statements = 0;
  int noise_statements = 0;
  double probability_core_closer = 0.5;
};

SeparabilityReport noise_separability(const std::vector<Problem>& problems,
                                      EmbeddingClient& embeddings);

}  // namespace opforge
