#pragma once

#include <stdexcept>
#include <string>

namespace mbrlab {

// Stable process exit codes for the command-line tool.
enum class ExitCode : int { kOk = 0, kInput = 1, kProtocol = 2 };

// All library failures are reported through this exception. `kind()` is a
// short machine-parsable class ("dimension", "malformed", ...); `exit_code()`
// tells the CLI which stable exit status to use.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message, ExitCode code = ExitCode::kInput)
      : std::runtime_error(message), kind_(std::move(kind)), code_(code) {}

  const std::string& kind() const noexcept { return kind_; }
  ExitCode exit_code() const noexcept { return code_; }

 private:
  std::string kind_;
  ExitCode code_;
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message, std::string kind = "protocol")
      : Error(std::move(kind), message, ExitCode::kProtocol) {}
};

}  // namespace mbrlab
