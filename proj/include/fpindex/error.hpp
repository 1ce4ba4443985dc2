#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpindex {

enum class ErrorKind {
  parameter,
  format,
  io,
  training,
  empty_template,
  degenerate_vector,
  out_of_bounds,
  conflict,
  not_found,
  evaluation,
};

std::string_view to_string(ErrorKind kind);

// Base of every error thrown by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// A Gabor sampling point whose kernel support leaves the image.
class OutOfBoundsError : public Error {
 public:
  OutOfBoundsError(int point_index, const std::string& what)
      : Error(ErrorKind::out_of_bounds, what), point_index_(point_index) {}

  int point_index() const noexcept { return point_index_; }

 private:
  int point_index_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace fpindex
