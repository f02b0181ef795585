#ifndef URBANFUSE_ERROR_HPP
#define URBANFUSE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace urbanfuse {

enum class ErrorKind {
  invalid_argument,
  io,
  format,     // malformed or truncated file contents
  dimension,  // feature or matrix dimensions disagree
  data,       // well-formed input that violates a dataset invariant
  numeric,    // solver failure or non-finite values
  state,      // object used before it is ready (e.g. unfitted model)
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace urbanfuse

#endif
