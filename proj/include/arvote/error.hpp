#pragma once

#include <stdexcept>
#include <string>

namespace arvote {

/// Failure categories. Each maps onto a CLI exit code.
enum class ErrorKind {
  kConfig,       // invalid configuration or arguments
  kData,         // malformed or inconsistent input data
  kEnvironment,  // missing runtime, adapter or file-system problem
  kContract,     // API misuse (wrong backbone kind, shape mismatch)
  kTraining,     // numerical failure during optimization
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

struct EnvironmentError : Error {
  explicit EnvironmentError(const std::string& what) : Error(ErrorKind::kEnvironment, what) {}
};

struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error(ErrorKind::kContract, what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(ErrorKind::kTraining, what) {}
};

/// 0 success, 2 config, 3 data, 4 environment, 1 anything else.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kData:
      return 3;
    case ErrorKind::kEnvironment:
      return 4;
    default:
      return 1;
  }
}

}  // namespace arvote
