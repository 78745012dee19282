#pragma once

#include <stdexcept>
#include <string>

namespace hdg {

/// Failure categories surfaced to the C API and the command line driver.
enum class ErrorKind {
  config,     ///< invalid configuration or input
  parse,      ///< malformed mesh file
  topology,   ///< non-manifold or degenerate mesh
  numerical,  ///< singular or indefinite system, rank ambiguity
  contract,   ///< a property the construction guarantees was violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hdg
