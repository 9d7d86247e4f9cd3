#pragma once

#include <stdexcept>
#include <string>

namespace llmforest {

/// Malformed input data: schema mismatch, unparseable cells, empty files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A graph operation was asked to do something its structure cannot support.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace llmforest
