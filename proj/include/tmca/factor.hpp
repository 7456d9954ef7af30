#pragma once

// Decomposition of right-permutative CAs into a class factor times a
// translation, and finite-depth conjugacy checks.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tmca/algebra.hpp"
#include "tmca/ca.hpp"

namespace tmca {

  // u(a) = (class of a, e_a) together with the induced operation on K x B.
  struct HmmCode {
    RightStructure structure;
    // Alphabet of K x B, ordered class-major; names "(k,e)".
    Alphabet product_alphabet;
    // a -> index of u(a) in product_alphabet.
    std::vector<Symbol> u;
    // (k1,e1)•(k2,e2) = (k1∘k2, s_B(e2)).
    CayleyTable product_table;
  };

  // Throws structure_violation (from right_structure or a failed
  // homomorphism check) or not_bijective with a colliding pair.
  [[nodiscard]] HmmCode hmm_code(CayleyTable const& table, StructureMode mode);

  struct ConjugacyCheck {
    bool        verified = false;
    std::size_t depth    = 0;
    // "commutation", "image_not_allowed", "not_injective", "inverse",
    // "not_surjective"; empty when verified.
    std::string         failure;
    std::optional<Word> witness;  // source word
  };

  // Checks code∘Phi_A = Phi_B∘code on every allowed source word of length
  // <= depth (first failure in length-then-lexicographic order), that the
  // sliding code is injective (exactly, via the pair graph of windows with
  // equal image), that its image covers the target's words of length
  // <= min(depth, 4), and, if given, that inverse∘code is the identity on
  // words of length <= depth.
  [[nodiscard]] ConjugacyCheck
  verify_conjugacy(CellularAutomaton const& a,
                   CellularAutomaton const& b,
                   BlockCode const&         code,
                   std::size_t              depth,
                   BlockCode const*         inverse = nullptr);

  struct DecompositionCertificate {
    StructureMode              mode = StructureMode::psi_associative;
    std::optional<std::size_t> scaling_n;
    HmmCode                    hmm;
    MarkovShift                lambda;  // u-image of the CA's shift
    BlockCode                  u_code;
    BlockCode                  u_inverse;
    MarkovShift                k_shift;
    MarkovShift                b_shift;
    CellularAutomaton          class_ca;
    CellularAutomaton          translation;  // x_i -> s_B(x_{i+1})
    CellularAutomaton          product_ca;   // on lambda
    unsigned                   period_m   = 1;
    unsigned                   exponent_l = 1;
    bool                       product_verified = false;
    std::optional<std::pair<Edge, Edge>> missing_edge;  // (K edge, B edge)
    // Identity of the class table if it is an abelian group.
    std::optional<Symbol> class_identity;
    std::vector<unsigned> class_group_factors;
    ConjugacyCheck        conjugacy;
  };

  struct DecomposeOptions {
    // n_scaling mode: test only this N; otherwise search 2..max_scaling.
    std::optional<std::size_t> scaling_n;
    std::size_t                max_scaling = 16;
    std::size_t                depth       = 8;
    // Return a certificate with product_verified = false instead of
    // throwing product_failed.
    bool allow_product_failure = false;
  };

  // Throws hypothesis_failed (not SC / not right-permutative / no N-scaling
  // found, wrapping upstream errors), product_failed.
  [[nodiscard]] DecompositionCertificate
  decompose(CellularAutomaton const& ca,
            StructureMode            mode,
            DecomposeOptions const&  options = {});

  // Order of the permutation s_B restricted to B.
  [[nodiscard]] unsigned permutation_period(std::vector<Symbol> const& map,
                                            std::vector<Symbol> const& domain);

  // lcm over a of the order of c -> c∘a. Throws structure_violation if some
  // right multiplication is not a permutation.
  [[nodiscard]] unsigned right_multiplication_exponent(CayleyTable const& table);

  inline constexpr std::uint64_t default_search_budget = 10'000'000;

  // Backtracking search for a conjugacy from a to b: first over bijective
  // symbol maps (canonical order, identity first), then, if max_window >= 2,
  // over memory-1 window maps. Candidates are verified at depth
  // 2 * window + 4. Throws search_exceeded past `budget` nodes.
  [[nodiscard]] std::optional<BlockCode>
  search_conjugacy(CellularAutomaton const& a,
                   CellularAutomaton const& b,
                   std::size_t              max_window,
                   std::uint64_t            budget = default_search_budget);

}  // namespace tmca
