#include "wildgen/error.hpp"

namespace wildgen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kNumerical: return "numerical_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kShortfall: return "shortfall";
  }
  return "unknown";
}

}  // namespace wildgen
