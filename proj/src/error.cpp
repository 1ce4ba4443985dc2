#include "fpindex/error.hpp"

namespace fpindex {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::format: return "format error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::training: return "training error";
    case ErrorKind::empty_template: return "empty-template error";
    case ErrorKind::degenerate_vector: return "degenerate-vector error";
    case ErrorKind::out_of_bounds: return "out-of-bounds error";
    case ErrorKind::conflict: return "conflict error";
    case ErrorKind::not_found: return "not-found error";
    case ErrorKind::evaluation: return "evaluation error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fpindex
