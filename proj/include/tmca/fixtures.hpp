#pragma once

// Built-in Cayley tables available by name.

#include <optional>
#include <string_view>
#include <vector>

#include "tmca/algebra.hpp"

namespace tmca {

  // 12-symbol medial quasigroup over {a,b,c,d} x {1,2,3}.
  inline constexpr std::string_view fixture_latin_12 = "paper-latin-12";
  // 8-symbol right-cancellable, Psi-associative table over a..h.
  inline constexpr std::string_view fixture_table_8 = "paper-table-8";

  [[nodiscard]] std::vector<std::string_view> fixture_names();
  [[nodiscard]] std::optional<CayleyTable>    fixture_table(std::string_view name);

}  // namespace tmca
