#pragma once

// Finite binary operations given by Cayley tables.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tmca/tmc.hpp"

namespace tmca {

  class CayleyTable {
   public:
    CayleyTable() = default;
    // Row-major entries: entries[a * n + b] = a • b. Throws unknown_symbol if
    // an entry is out of range, schema if the shape is wrong.
    CayleyTable(Alphabet alphabet, std::vector<Symbol> entries);
    // Rows of names, indexed by the left operand.
    static CayleyTable
    from_names(Alphabet const&                              alphabet,
               std::vector<std::vector<std::string>> const& rows);

    [[nodiscard]] Alphabet const& alphabet() const noexcept {
      return _alphabet;
    }
    [[nodiscard]] std::size_t size() const noexcept {
      return _alphabet.size();
    }
    [[nodiscard]] Symbol operator()(Symbol a, Symbol b) const noexcept {
      return _entries[a * size() + b];
    }
    [[nodiscard]] std::vector<Symbol> const& entries() const noexcept {
      return _entries;
    }
    [[nodiscard]] std::vector<std::vector<std::string>> rows() const;

    friend bool operator==(CayleyTable const&, CayleyTable const&) = default;

   private:
    Alphabet            _alphabet;
    std::vector<Symbol> _entries;
  };

  // Result of one exhaustive property scan. The witness is empty iff the
  // property holds; its layout is documented per property in AlgebraReport.
  struct Property {
    bool holds = true;
    Word witness;
  };

  struct AlgebraReport {
    // left_cancellable: a•c = b•c implies a = b. Witness (a, b, c).
    Property left_cancellable;
    // right_cancellable: c•a = c•b implies a = b. Witness (c, a, b).
    Property right_cancellable;
    // Witness copied from whichever cancellation law fails first (left).
    Property quasigroup;
    // Witness (a, b) with a•b != b•a.
    Property commutative;
    // Witness (a, b, c) with (a•b)•c != a•(b•c).
    Property associative;
    // Witness (a, b, c, d) with (a•b)•(c•d) != (a•c)•(b•d).
    Property medial;
  };

  [[nodiscard]] AlgebraReport classify_table(CayleyTable const& table);

  struct PsiResult {
    // Psi as a symbol map, present iff (a•b)•c = Psi(a•(b•c)) for all triples
    // with Psi a permutation.
    std::optional<std::vector<Symbol>> psi;
    // False when some symbol never occurs as a•(b•c); such points are filled
    // with the unused values in increasing order.
    bool unique = true;
    // Set on absence: a triple pair forcing two values, or a collision.
    std::string diagnostic;
    Word        witness;
  };

  [[nodiscard]] PsiResult find_psi(CayleyTable const& table);

  struct ToyodaDecomposition {
    CayleyTable         group;  // abelian group operation +
    Symbol              zero = 0;
    std::vector<Symbol> eta;
    std::vector<Symbol> rho;
    Symbol              constant = 0;
    // Orders of the cyclic factors of prime power order, ascending by prime
    // then exponent, e.g. {2, 2, 3} for Z2 + Z2 + Z3.
    std::vector<unsigned> primary_factors;
  };

  struct ToyodaResult {
    std::optional<ToyodaDecomposition> decomposition;
    std::string                        reason;  // set on absence
  };

  // Affine form a•b = eta(a) + rho(b) + c of a medial quasigroup. The group
  // is built directly from the table: with a pivot z, x + y = (x/z)•(z\y) has
  // identity z•z; eta and rho are read off the row and column of the
  // identity. Every identity of the result is verified before returning.
  [[nodiscard]] ToyodaResult toyoda_decompose(CayleyTable const& table);

  // Prime-power cyclic factor orders of a finite abelian group given by its
  // table and identity.
  [[nodiscard]] std::vector<unsigned>
  abelian_primary_factors(CayleyTable const& group, Symbol zero);

  // True iff `table` is an abelian group operation with identity `zero`.
  [[nodiscard]] bool is_abelian_group(CayleyTable const& table, Symbol zero);

  enum class StructureMode { psi_associative, n_scaling };

  struct RightStructure {
    StructureMode mode = StructureMode::psi_associative;
    // Row-equality classes, each sorted, ordered by smallest member.
    std::vector<std::vector<Symbol>> classes;
    std::vector<std::size_t>         class_of;
    // Operation on classes; singleton classes keep the symbol's name, others
    // are named "{a,b}".
    CayleyTable         class_table;
    std::vector<Symbol> idempotent;    // a -> e_a
    std::vector<Symbol> identity_set;  // B, ascending
    // s_B on B; entries for symbols outside B are no_symbol.
    std::vector<Symbol>                s_b;
    std::optional<std::vector<Symbol>> psi;
  };

  // Throws structure_violation with a witness in the message when the table
  // is not right-cancellable, the class operation is ill defined, e_a is not
  // unique, s_B depends on the chosen multiplier, or e_{a•b} != s_B(e_b).
  [[nodiscard]] RightStructure right_structure(CayleyTable const& table,
                                               StructureMode      mode);

  // Least edge set containing `seed` closed under (a,b),(a',b') ->
  // (a•a', b•b'), returned as a shift over the table's alphabet with
  // non-bi-extendable symbols pruned.
  [[nodiscard]] MarkovShift sc_closure(CayleyTable const&       table,
                                       std::vector<Edge> const& seed);

  // Table restricted to `symbols` (ascending), which must be closed under •.
  // Throws not_closed naming an escaping product.
  [[nodiscard]] CayleyTable restrict_table(CayleyTable const&         table,
                                           std::vector<Symbol> const& symbols);

}  // namespace tmca
