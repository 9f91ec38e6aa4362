#pragma once

#include <stdexcept>
#include <string>

namespace lift5 {

enum class ErrorKind {
  InvalidArgument,
  Range,
  Format,
  Truncated,
  GridMismatch,
  Io,
  Numeric,
  Regime,
  Resolution,
  UnsupportedGrid,
  Schema,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

}  // namespace lift5
