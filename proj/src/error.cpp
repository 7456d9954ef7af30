#include "tmca/error.hpp"

namespace tmca {

  std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
      case ErrorCode::empty_shift:
        return "EMPTY_SHIFT";
      case ErrorCode::unknown_symbol:
        return "UNKNOWN_SYMBOL";
      case ErrorCode::duplicate_symbol:
        return "DUPLICATE_SYMBOL";
      case ErrorCode::depth_too_large:
        return "DEPTH_TOO_LARGE";
      case ErrorCode::not_allowed:
        return "NOT_ALLOWED";
      case ErrorCode::not_closed:
        return "NOT_CLOSED";
      case ErrorCode::structure_violation:
        return "STRUCTURE_VIOLATION";
      case ErrorCode::not_bijective:
        return "NOT_BIJECTIVE";
      case ErrorCode::product_failed:
        return "PRODUCT_FAILED";
      case ErrorCode::hypothesis_failed:
        return "HYPOTHESIS_FAILED";
      case ErrorCode::search_exceeded:
        return "SEARCH_EXCEEDED";
      case ErrorCode::not_irreducible:
        return "NOT_IRREDUCIBLE";
      case ErrorCode::incomplete_cover:
        return "INCOMPLETE_COVER";
      case ErrorCode::invalid_measure:
        return "INVALID_MEASURE";
      case ErrorCode::invalid_argument:
        return "INVALID_ARGUMENT";
      case ErrorCode::schema:
        return "SCHEMA";
    }
    return "UNKNOWN";
  }

}  // namespace tmca
