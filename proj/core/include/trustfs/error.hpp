#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trustfs {

enum class ErrorKind {
  kInvalidArgument,
  kShapeMismatch,
  kParse,
  kIo,
  kFullyMissing,
  kNonFinite,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind so the
// CLI can report it as JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trustfs
