#pragma once

#include <stdexcept>
#include <string>

namespace snla {

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  NotConverged = 3,
  RankDeficient = 4,
  Parse = 5,
  Io = 6,
  Inapplicable = 7,
  Internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace snla
