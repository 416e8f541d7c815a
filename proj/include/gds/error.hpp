#pragma once

#include <stdexcept>
#include <string>

namespace gds {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  Numeric = 4,
  RankDeficient = 5,
  NoConvergence = 6,
  Internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gds
