#pragma once

#include <stdexcept>
#include <string>

namespace pco {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  Config,
  Data,
};

/// Library exception; the kind lets front ends map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

/// Warnings go through a replaceable sink (stderr by default).
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace pco
