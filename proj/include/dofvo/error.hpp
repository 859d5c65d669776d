#pragma once

#include <stdexcept>
#include <string>

namespace dofvo {

/// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  Usage,      // bad arguments or contract violations by the caller
  Data,       // missing files, malformed rows, empty overlaps
  Numerical,  // degenerate geometry, divergence, non-finite values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::Usage, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::Data, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }

}  // namespace dofvo
