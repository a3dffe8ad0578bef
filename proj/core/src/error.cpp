#include "trustfs/error.hpp"

namespace trustfs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kParse: return "parse_error";
    case ErrorKind::kIo: return "io_error";
    case ErrorKind::kFullyMissing: return "fully_missing";
    case ErrorKind::kNonFinite: return "non_finite";
  }
  return "unknown";
}

}  // namespace trustfs
