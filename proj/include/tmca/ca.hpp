#pragma once

// Sliding block codes between Markov shifts and cellular automata built from
// Cayley tables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tmca/algebra.hpp"
#include "tmca/tmc.hpp"

namespace tmca {

  // A block code with memory l and anticipation r: the image of x at i is
  // rule(x[i-l .. i+r]). The rule is stored for every source-allowed window.
  class BlockCode {
   public:
    using Rule = std::function<Symbol(std::span<Symbol const>)>;

    BlockCode() = default;
    // Evaluates `rule` on every allowed window of length l+r+1. Throws
    // depth_too_large past the enumeration cap, unknown_symbol if the rule
    // leaves the target alphabet.
    BlockCode(MarkovShift        source,
              MarkovShift        target,
              std::size_t        memory,
              std::size_t        anticipation,
              Rule const&        rule);

    // Explicit rule; throws schema if some allowed window is missing.
    static BlockCode from_map(MarkovShift                    source,
                              MarkovShift                    target,
                              std::size_t                    memory,
                              std::size_t                    anticipation,
                              std::vector<std::pair<Word, Symbol>> const& rule);
    // 1-block code x_i -> map[x_i].
    static BlockCode from_symbol_map(MarkovShift                source,
                                     MarkovShift                target,
                                     std::vector<Symbol> const& map);

    [[nodiscard]] MarkovShift const& source() const noexcept {
      return _source;
    }
    [[nodiscard]] MarkovShift const& target() const noexcept {
      return _target;
    }
    [[nodiscard]] std::size_t memory() const noexcept {
      return _memory;
    }
    [[nodiscard]] std::size_t anticipation() const noexcept {
      return _anticipation;
    }
    [[nodiscard]] std::size_t window() const noexcept {
      return _memory + _anticipation + 1;
    }

    // Image of one window; nullopt if the window is not source-allowed.
    [[nodiscard]] std::optional<Symbol>
    find(std::span<Symbol const> window) const noexcept;
    // Throws not_allowed.
    [[nodiscard]] Symbol at(std::span<Symbol const> window) const;
    // Image of a finite word; length |word| - l - r. Throws not_allowed,
    // invalid_argument if the word is shorter than a window.
    [[nodiscard]] Word apply(std::span<Symbol const> word) const;

    // First allowed word of length window()+1 whose image is not a target
    // edge, if any.
    [[nodiscard]] std::optional<Word> image_edge_violation() const;

    // All (window, image) pairs in lexicographic window order.
    [[nodiscard]] std::vector<std::pair<Word, Symbol>> entries() const;

   private:
    [[nodiscard]] std::optional<std::uint64_t>
    key(std::span<Symbol const> window) const noexcept;

    MarkovShift _source;
    MarkovShift _target;
    std::size_t _memory       = 0;
    std::size_t _anticipation = 0;
    // Windows are keyed in base |source| (first symbol most significant).
    // Small key spaces use a dense array with no_symbol holes.
    bool                                       _dense = true;
    std::vector<Symbol>                        _table;
    std::vector<std::pair<std::uint64_t, Symbol>> _sparse;
  };

  struct ScCheck {
    bool compatible = true;
    // Edges (x0,x1), (y0,y1) whose componentwise product (image) is not an
    // edge; in the table's symbol numbering.
    std::optional<std::pair<Edge, Edge>> witness;
    Edge                                 image{};
  };

  // Edge-pair scan. Symbols are matched by name; the table's alphabet must
  // contain the shift's. Throws unknown_symbol.
  [[nodiscard]] ScCheck check_sc(MarkovShift const& shift,
                                 CayleyTable const& table);

  struct CaFlags {
    bool left_permutative        = false;
    bool right_permutative       = false;
    bool bipermutative           = false;
    bool structurally_compatible = false;
  };

  class CellularAutomaton {
   public:
    CellularAutomaton() = default;
    // General CA from a code with equal source and target. Throws
    // invalid_argument otherwise. structurally_compatible records that the
    // image of every allowed word is allowed.
    explicit CellularAutomaton(BlockCode code);

    // Radius-1 CA x_i -> x_i • x_{i+1} on `shift`. The shift's symbols must
    // be among the table's and closed under • (not_closed otherwise). A
    // failing SC check throws not_closed in strict mode and is recorded in
    // lax mode.
    static CellularAutomaton from_table(MarkovShift const& shift,
                                        CayleyTable const& table,
                                        bool               strict = true);

    [[nodiscard]] BlockCode const& code() const noexcept {
      return _code;
    }
    [[nodiscard]] MarkovShift const& shift() const noexcept {
      return _code.source();
    }
    [[nodiscard]] CaFlags const& flags() const noexcept {
      return _flags;
    }
    // Table restricted to the shift's alphabet, for table CAs.
    [[nodiscard]] std::optional<CayleyTable> const& table() const noexcept {
      return _table;
    }
    [[nodiscard]] std::optional<CayleyTable> const& full_table() const noexcept {
      return _full_table;
    }
    [[nodiscard]] ScCheck const& sc_check() const noexcept {
      return _sc;
    }
    // The same rule on the full shift over the full table's alphabet. Throws
    // invalid_argument for CAs without a table.
    [[nodiscard]] CellularAutomaton extension() const;

   private:
    BlockCode                  _code;
    CaFlags                    _flags;
    std::optional<CayleyTable> _table;
    std::optional<CayleyTable> _full_table;
    ScCheck                    _sc;
  };

  // Permutativity of a code's rule in its first (left) or last (right)
  // window coordinate, over allowed windows.
  [[nodiscard]] bool left_permutative(BlockCode const& code);
  [[nodiscard]] bool right_permutative(BlockCode const& code);

  // Identity (x_i) and shift (x_{i+1}) CAs on a shift.
  [[nodiscard]] CellularAutomaton identity_ca(MarkovShift const& shift);
  [[nodiscard]] CellularAutomaton shift_ca(MarkovShift const& shift);

  // Local rule of the n-th iterate, memory n*l and anticipation n*r. Throws
  // depth_too_large, not_closed if an intermediate image leaves the shift.
  [[nodiscard]] BlockCode power_rule(CellularAutomaton const& ca, std::size_t n);

  // Composition outer∘inner as one block code.
  [[nodiscard]] BlockCode compose(BlockCode const& outer, BlockCode const& inner);

  struct ScalingCheck {
    bool                holds = true;
    std::optional<Word> witness;  // first failing (N+1)-word
  };

  // Whether Phi^N(x)_0 = x_0 • x_N on every allowed (N+1)-word. Requires a
  // radius-1 table CA.
  [[nodiscard]] ScalingCheck check_n_scaling(CellularAutomaton const& ca,
                                             std::size_t              n);

  // Source-allowed words v with |v| = |word| + l + r and code(v) = word, in
  // lexicographic order. Throws not_allowed, depth_too_large.
  [[nodiscard]] std::vector<Word>
  preimage_cylinder(BlockCode const& code, std::span<Symbol const> word);

}  // namespace tmca
