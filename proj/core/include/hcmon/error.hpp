#pragma once

#include <stdexcept>
#include <string>

namespace hcmon {

enum class ErrorKind {
  invalid_argument,
  not_found,
  parse,
  ordering,
  validation,
  undefined_ttc,
  no_overtake_possible,
  no_manoeuvre,
  velocity_undefined,
  stream,
  invalid_spec,
  type_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse/validation error located in a source document. `location` is either
// "line:col" for text sources, a record index for JSON-lines, or a JSON path.
class LocatedError : public Error {
 public:
  LocatedError(ErrorKind kind, std::string location, const std::string& message)
      : Error(kind, location + ": " + message),
        location_(std::move(location)),
        bare_message_(message) {}

  const std::string& location() const noexcept { return location_; }
  const std::string& bare_message() const noexcept { return bare_message_; }

 private:
  std::string location_;
  std::string bare_message_;
};

}  // namespace hcmon
