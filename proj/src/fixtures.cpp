#include "tmca/fixtures.hpp"

#include <array>
#include <string>

namespace tmca {

  namespace {

    // Rows are split on spaces.
    std::vector<std::string> split(std::string_view row) {
      std::vector<std::string> out;
      std::size_t              pos = 0;
      while (pos < row.size()) {
        auto end = row.find(' ', pos);
        if (end == std::string_view::npos) {
          end = row.size();
        }
        if (end > pos) {
          out.emplace_back(row.substr(pos, end - pos));
        }
        pos = end + 1;
      }
      return out;
    }

    constexpr std::array<std::string_view, 12> latin_12_rows{
        "a3 b3 c3 d3 a2 b2 c2 d2 a1 b1 c1 d1",
        "b3 a3 d3 c3 b2 a2 d2 c2 b1 a1 d1 c1",
        "c3 d3 a3 b3 c2 d2 a2 b2 c1 d1 a1 b1",
        "d3 c3 b3 a3 d2 c2 b2 a2 d1 c1 b1 a1",
        "a2 b2 c2 d2 a1 b1 c1 d1 a3 b3 c3 d3",
        "b2 a2 d2 c2 b1 a1 d1 c1 b3 a3 d3 c3",
        "c2 d2 a2 b2 c1 d1 a1 b1 c3 d3 a3 b3",
        "d2 c2 b2 a2 d1 c1 b1 a1 d3 c3 b3 a3",
        "a1 b1 c1 d1 a3 b3 c3 d3 a2 b2 c2 d2",
        "b1 a1 d1 c1 b3 a3 d3 c3 b2 a2 d2 c2",
        "c1 d1 a1 b1 c3 d3 a3 b3 c2 d2 a2 b2",
        "d1 c1 b1 a1 d3 c3 b3 a3 d2 c2 b2 a2",
    };

    constexpr std::array<std::string_view, 8> table_8_rows{
        "b a d c f e h g",
        "b a d c f e h g",
        "d c b a h g f e",
        "d c b a h g f e",
        "f e h g b a d c",
        "f e h g b a d c",
        "h g f e d c b a",
        "h g f e d c b a",
    };

    template <std::size_t N>
    CayleyTable build(std::string_view symbols, std::array<std::string_view, N> const& rows) {
      std::vector<std::vector<std::string>> cells;
      for (auto r : rows) {
        cells.push_back(split(r));
      }
      return CayleyTable::from_names(Alphabet(split(symbols)), cells);
    }

  }  // namespace

  std::vector<std::string_view> fixture_names() {
    return {fixture_latin_12, fixture_table_8};
  }

  std::optional<CayleyTable> fixture_table(std::string_view name) {
    if (name == fixture_latin_12) {
      return build("a1 b1 c1 d1 a2 b2 c2 d2 a3 b3 c3 d3", latin_12_rows);
    }
    if (name == fixture_table_8) {
      return build("a b c d e f g h", table_8_rows);
    }
    return std::nullopt;
  }

}  // namespace tmca
