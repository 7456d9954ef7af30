#pragma once

// Stationary finite-memory measures on Markov shifts.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tmca/ca.hpp"
#include "tmca/tmc.hpp"

namespace tmca {

  inline constexpr double probability_tolerance = 1e-12;

  // A measure whose conditional law of x_0 given the past depends only on the
  // last d symbols. States are the allowed d-words in lexicographic order
  // (the empty word when d = 0).
  class FiniteMemoryMeasure {
   public:
    FiniteMemoryMeasure() = default;

    // kernel[s][a] = mu_{state s}(a). A missing initial law is computed as
    // the stationary law of the kernel. Throws invalid_measure when a row
    // leaves the follower set, a row or the initial law does not sum to 1,
    // or the initial law is not stationary (all within 1e-12).
    static FiniteMemoryMeasure
    from_kernel(MarkovShift                             shift,
                std::size_t                             depth,
                std::vector<std::vector<double>>        kernel,
                std::optional<std::vector<double>> const& initial = std::nullopt);

    // Product measure with marginal p; symbols with positive mass must be
    // pairwise connected by edges.
    static FiniteMemoryMeasure bernoulli(MarkovShift const&         shift,
                                         std::vector<double> const& p);

    [[nodiscard]] MarkovShift const& shift() const noexcept {
      return _shift;
    }
    [[nodiscard]] std::size_t depth() const noexcept {
      return _depth;
    }
    [[nodiscard]] std::vector<Word> const& states() const noexcept {
      return _states;
    }
    [[nodiscard]] std::optional<std::size_t>
    state_index(std::span<Symbol const> past) const;
    [[nodiscard]] std::vector<std::vector<double>> const& kernel() const noexcept {
      return _kernel;
    }
    [[nodiscard]] std::vector<double> const& initial() const noexcept {
      return _initial;
    }
    // mu_w(a) > 0 exactly on the followers of the last symbol of every w.
    [[nodiscard]] bool complete_connections() const noexcept {
      return _complete_connections;
    }

   private:
    MarkovShift                      _shift;
    std::size_t                      _depth = 0;
    std::vector<Word>                _states;
    std::map<Word, std::size_t>      _index;
    std::vector<std::vector<double>> _kernel;
    std::vector<double>              _initial;
    bool                             _complete_connections = false;
  };

  // p(a -> b) = A_ab v_b / (lambda v_a), stationary law proportional to
  // u_a v_a. Throws not_irreducible.
  [[nodiscard]] FiniteMemoryMeasure parry_measure(MarkovShift const& shift);

  // Entropy rate (natural log).
  [[nodiscard]] double measure_entropy(FiniteMemoryMeasure const& m);

  // Throws not_allowed. The empty word has probability 1.
  [[nodiscard]] double cylinder_prob(FiniteMemoryMeasure const& m,
                                     std::span<Symbol const>    word);

  // gamma_1 .. gamma_{m_max}: the largest max/min - 1 of mu_w(a) over pasts w
  // agreeing on their last m symbols. Zero for m >= depth. Throws
  // invalid_measure without complete connections.
  [[nodiscard]] std::vector<double> gamma_sequence(FiniteMemoryMeasure const& m,
                                                   std::size_t m_max);

  // Sum of cylinder_prob over preimage_cylinder(code, word).
  [[nodiscard]] double pushforward_cylinder(FiniteMemoryMeasure const& m,
                                            BlockCode const&           code,
                                            std::span<Symbol const>    word);

  // For a 1-block code theta that is constant on every predecessor set and
  // such that x -> (f(x), theta(x)) is injective, with f(x) the common value
  // of theta on the predecessors of x: the memory-1 inverse
  // (y_{-1}, y_0) -> x. Nullopt if a condition fails or some target edge has
  // no preimage.
  [[nodiscard]] std::optional<BlockCode> memory_one_inverse(BlockCode const& code);

  // Image of a depth-d measure under such a code, as an exact depth-(d+1)
  // measure: mu'_{y_{-d-1}..y_{-1}}(b) = mu_{x_{-d}..x_{-1}}(g(y_{-1}, b)).
  // Throws hypothesis_failed if memory_one_inverse fails.
  [[nodiscard]] FiniteMemoryMeasure pushforward_measure(FiniteMemoryMeasure const& m,
                                                        BlockCode const& code);

  struct InvarianceReport {
    bool                                invariant     = true;
    double                              max_deviation = 0;
    std::optional<Word>                 worst;
    std::vector<std::pair<Word, double>> deviations;  // all words, by length then lex
  };

  // |mu(code^{-1}[w]) - mu[w]| for every allowed w with |w| <= depth.
  [[nodiscard]] InvarianceReport check_invariance(FiniteMemoryMeasure const& m,
                                                  BlockCode const&           code,
                                                  std::size_t                depth,
                                                  double                     tol);

  // Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

  class Sampler {
   public:
    explicit Sampler(FiniteMemoryMeasure const& m);
    // Throws invalid_argument if length < depth.
    [[nodiscard]] Word sample(std::size_t length, std::mt19937_64& rng) const;
    void sample_into(std::span<Symbol> out, std::mt19937_64& rng) const;

   private:
    std::size_t                         _depth = 0;
    std::vector<Word>                   _states;
    std::vector<double>                 _initial_cdf;
    std::vector<std::vector<double>>    _row_cdf;
    std::vector<std::vector<std::size_t>> _next;  // state x symbol -> state
  };

  [[nodiscard]] Word sample_path(FiniteMemoryMeasure const& m,
                                 std::size_t                length,
                                 std::uint64_t              seed);

}  // namespace tmca
