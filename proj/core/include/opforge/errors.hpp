#pragma once

#include <stdexcept>
#include <string>

namespace opforge {

// Base class for all library errors. Subclasses map onto CLI exit codes:
// DataError -> 1, ConfigError -> 2, InfraError -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data (bad graph, unparseable problem text,
// corrupt JSONL line, gold-answer mismatch).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: out-of-range generation spec, unknown template id,
// bad CLI flag combination, missing endpoint fields.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Transport-level failures talking to an external endpoint after retries.
class InfraError : public Error {
 public:
  using Error::Error;
};

// Structural graph violations: dangling node ids, duplicate definitions.
class GraphError : public DataError {
 public:
  using DataError::DataError;
};

// Problem text that does not match any known statement schema.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// Statement that cannot be rendered: implicit relation, cross-unit operands,
// path shape without a naming pattern.
class RenderError : public DataError {
 public:
  using DataError::DataError;
};

// Retry budgets exhausted while growing or valuing a graph.
class GenerationExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace opforge
