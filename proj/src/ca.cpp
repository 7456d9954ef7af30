#include <map>
#include <set>

#include "tmca/ca.hpp"
#include "tmca/error.hpp"

namespace tmca {

  ScCheck check_sc(MarkovShift const& shift, CayleyTable const& table) {
    auto const&         names = shift.alphabet();
    std::vector<Symbol> to_table(shift.size());
    for (Symbol s = 0; s < shift.size(); ++s) {
      to_table[s] = table.alphabet().at(names.name(s));
    }
    std::vector<Symbol> to_shift(table.size(), no_symbol);
    for (Symbol s = 0; s < shift.size(); ++s) {
      to_shift[to_table[s]] = s;
    }
    ScCheck result;
    for (auto const& x : shift.edges()) {
      for (auto const& y : shift.edges()) {
        Symbol const a = table(to_table[x.first], to_table[y.first]);
        Symbol const b = table(to_table[x.second], to_table[y.second]);
        if (to_shift[a] == no_symbol || to_shift[b] == no_symbol
            || !shift.has_edge(to_shift[a], to_shift[b])) {
          result.compatible = false;
          result.witness    = {{to_table[x.first], to_table[x.second]},
                               {to_table[y.first], to_table[y.second]}};
          result.image      = {a, b};
          return result;
        }
      }
    }
    return result;
  }

  namespace {
    // Whether the rule is injective in window coordinate `free` when all
    // other coordinates are fixed.
    bool permutative_in(BlockCode const& code, std::size_t free) {
      std::map<Word, std::set<Symbol>> seen;
      bool                             ok = true;
      for_each_allowed_word(code.source(), code.window(), [&](std::span<Symbol const> w) {
        if (!ok) {
          return;
        }
        Word rest(w.begin(), w.end());
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(free));
        ok = seen[rest].insert(code.at(w)).second;
      });
      return ok;
    }

    CaFlags classify_code(BlockCode const& code) {
      CaFlags f;
      f.left_permutative  = left_permutative(code);
      f.right_permutative = right_permutative(code);
      f.bipermutative     = f.left_permutative && f.right_permutative;
      return f;
    }
  }  // namespace

  bool left_permutative(BlockCode const& code) {
    return permutative_in(code, 0);
  }

  bool right_permutative(BlockCode const& code) {
    return permutative_in(code, code.window() - 1);
  }

  CellularAutomaton::CellularAutomaton(BlockCode code) : _code(std::move(code)) {
    if (!(_code.source() == _code.target())) {
      throw Error(ErrorCode::invalid_argument,
                  "a cellular automaton needs equal source and target shifts");
    }
    _flags = classify_code(_code);
    _flags.structurally_compatible = !_code.image_edge_violation().has_value();
  }

  CellularAutomaton CellularAutomaton::from_table(MarkovShift const& shift,
                                                  CayleyTable const& table,
                                                  bool               strict) {
    std::vector<Symbol> symbols(shift.size());
    for (Symbol s = 0; s < shift.size(); ++s) {
      symbols[s] = table.alphabet().at(shift.alphabet().name(s));
    }
    auto const& tn = table.alphabet();
    auto        sc = check_sc(shift, table);
    if (!sc.compatible && strict) {
      auto const& [x, y] = *sc.witness;
      throw Error(ErrorCode::not_closed,
                  "not structurally compatible: edges (" + tn.name(x.first) + ","
                      + tn.name(x.second) + ") and (" + tn.name(y.first) + ","
                      + tn.name(y.second) + ") give (" + tn.name(sc.image.first)
                      + "," + tn.name(sc.image.second) + ")");
    }
    auto              restricted = restrict_table(table, symbols);
    CellularAutomaton ca;
    ca._code = BlockCode(shift, shift, 0, 1, [&](std::span<Symbol const> w) {
      return restricted(w[0], w[1]);
    });
    ca._flags                         = classify_code(ca._code);
    ca._flags.structurally_compatible = sc.compatible;
    ca._table                         = std::move(restricted);
    ca._full_table                    = table;
    ca._sc                            = std::move(sc);
    return ca;
  }

  CellularAutomaton CellularAutomaton::extension() const {
    if (!_full_table) {
      throw Error(ErrorCode::invalid_argument,
                  "extension needs a CA given by a Cayley table");
    }
    return from_table(MarkovShift::full(_full_table->alphabet()), *_full_table);
  }

  CellularAutomaton identity_ca(MarkovShift const& shift) {
    return CellularAutomaton(BlockCode(
        shift, shift, 0, 0, [](std::span<Symbol const> w) { return w[0]; }));
  }

  CellularAutomaton shift_ca(MarkovShift const& shift) {
    return CellularAutomaton(BlockCode(
        shift, shift, 0, 1, [](std::span<Symbol const> w) { return w[1]; }));
  }

  BlockCode power_rule(CellularAutomaton const& ca, std::size_t n) {
    if (n == 0) {
      throw Error(ErrorCode::invalid_argument, "power must be positive");
    }
    auto const& code = ca.code();
    if (n == 1) {
      return code;
    }
    auto const& shift = ca.shift();
    return BlockCode(shift,
                     shift,
                     n * code.memory(),
                     n * code.anticipation(),
                     [&](std::span<Symbol const> w) {
                       Word current = code.apply(w);
                       for (std::size_t step = 1; step < n; ++step) {
                         if (!shift.is_allowed(current)) {
                           throw Error(ErrorCode::not_closed,
                                       "iterate leaves the shift at '"
                                           + shift.alphabet().format(current)
                                           + "'");
                         }
                         current = code.apply(current);
                       }
                       return current.front();
                     });
  }

  ScalingCheck check_n_scaling(CellularAutomaton const& ca, std::size_t n) {
    if (!ca.table() || ca.code().memory() != 0 || ca.code().anticipation() != 1) {
      throw Error(ErrorCode::invalid_argument,
                  "N-scaling needs a radius-1 CA given by a Cayley table");
    }
    if (n == 0) {
      throw Error(ErrorCode::invalid_argument, "N must be positive");
    }
    auto const   power = power_rule(ca, n);
    auto const&  table = *ca.table();
    ScalingCheck result;
    for_each_allowed_word(ca.shift(), n + 1, [&](std::span<Symbol const> w) {
      if (result.holds && power.at(w) != table(w.front(), w.back())) {
        result.holds   = false;
        result.witness = Word(w.begin(), w.end());
      }
    });
    return result;
  }

}  // namespace tmca
