#pragma once

#include <stdexcept>
#include <string>

namespace rsevi {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kInput,        ///< malformed or missing input (exit 2)
  kConsistency,  ///< inputs parse but disagree with each other (exit 3)
  kNumeric,      ///< non-finite values encountered (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& msg) {
  throw Error(ErrorKind::kInput, msg);
}

[[noreturn]] inline void fail_consistency(const std::string& msg) {
  throw Error(ErrorKind::kConsistency, msg);
}

[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::kNumeric, msg);
}

}  // namespace rsevi
