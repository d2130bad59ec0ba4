#include "hcmon/error.hpp"

namespace hcmon {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::ordering: return "ordering-error";
    case ErrorKind::validation: return "validation-error";
    case ErrorKind::undefined_ttc: return "undefined-ttc";
    case ErrorKind::no_overtake_possible: return "no-overtake-possible";
    case ErrorKind::no_manoeuvre: return "no-manoeuvre";
    case ErrorKind::velocity_undefined: return "velocity-undefined";
    case ErrorKind::stream: return "stream-error";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::type_error: return "type-error";
  }
  return "error";
}

}  // namespace hcmon
