#pragma once

#include <stdexcept>
#include <string>

namespace dann {

// Contract violations (bad arguments to library calls) throw
// std::invalid_argument. The two types below separate user-facing failures
// so the CLI can map them to exit codes.

/// Malformed or inconsistent configuration: grids, specs, CLI flags.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Problems with input data: unreadable files, bad cells, constant columns.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Training diverged (non-finite loss) or otherwise could not complete.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dann
