#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmca {

  // Stable machine-readable error codes. The CLI prints these verbatim, so
  // existing names must not change.
  enum class ErrorCode {
    empty_shift,
    unknown_symbol,
    duplicate_symbol,
    depth_too_large,
    not_allowed,
    not_closed,
    structure_violation,
    not_bijective,
    product_failed,
    hypothesis_failed,
    search_exceeded,
    not_irreducible,
    incomplete_cover,
    invalid_measure,
    invalid_argument,
    schema,
  };

  std::string_view to_string(ErrorCode code) noexcept;

  class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, std::string const& message)
        : std::runtime_error(message), _code(code) {}

    [[nodiscard]] ErrorCode code() const noexcept {
      return _code;
    }

   private:
    ErrorCode _code;
  };

}  // namespace tmca
