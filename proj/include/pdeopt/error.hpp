#pragma once

#include <stdexcept>
#include <string>

namespace pdeopt {

/// Failure categories; each maps one-to-one onto a C API status code.
enum class ErrorCode {
    InvalidArgument = 1,
    GridTooSmall,
    ShapeMismatch,
    NonFinite,
    LineSearchFailure,
    SingularSystem,
    OracleRejected,
    Io,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) fail(code, what);
}

} // namespace pdeopt
