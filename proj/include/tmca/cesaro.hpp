#pragma once

// Cesàro means (1/N) sum_{n<N} mu(Phi^{-n}[w]) of cylinder probabilities.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "tmca/ca.hpp"
#include "tmca/measure.hpp"

namespace tmca {

  struct CesaroSeries {
    Word                word;
    std::vector<double> values;    // step n = 0 .. N-1
    std::vector<double> averages;  // running Cesàro mean after n+1 steps
    // Per-step 3-sigma half-width; zero for exactly computed steps.
    std::vector<double> half_widths;
    std::vector<bool>   exact;
    std::optional<double> parry;
  };

  enum class CesaroMode { exact, monte_carlo };

  struct CesaroOptions {
    CesaroMode    mode = CesaroMode::exact;
    // Exact mode: stop at the first infeasible step instead of switching to
    // Monte Carlo for the remaining steps.
    bool          strict_exact = false;
    std::size_t   samples      = 100'000;
    std::uint64_t seed         = 1;
    unsigned      threads      = 0;  // 0: hardware concurrency
    // Hypothesis labels supplied with a decomposition certificate.
    std::optional<bool> regular;
    std::optional<bool> simple;
  };

  struct CesaroReport {
    CesaroMode  mode = CesaroMode::exact;
    // "affine", "enumeration", "monte_carlo", or "enumeration+monte_carlo".
    std::string               engine;
    std::size_t               steps   = 0;
    std::size_t               samples = 0;
    std::uint64_t             seed    = 0;
    std::vector<CesaroSeries> series;
    bool                      truncated = false;
    std::optional<std::size_t> first_infeasible_step;
    // max_w |Cesàro_N(w) - Parry(w)|, when the shift is irreducible.
    std::optional<double> final_deviation;
    std::optional<bool>   regular;
    std::optional<bool>   simple;
  };

  inline constexpr double cesaro_z = 3.0;

  // Exact per-step values. Affine table rules use a dynamic program over
  // partial sums in the underlying abelian group (any N); other rules
  // enumerate preimages while the source words fit the enumeration cap and
  // then fall back to Monte Carlo (or truncate with strict_exact).
  [[nodiscard]] CesaroReport cesaro_exact(FiniteMemoryMeasure const& measure,
                                          CellularAutomaton const&   ca,
                                          std::vector<Word> const&   words,
                                          std::size_t                n_steps,
                                          CesaroOptions const&       options = {});

  // Indicator frequencies over sampled paths, iterating the CA on finite
  // words. Deterministic given the seed, independent of the thread count.
  // Throws invalid_argument if samples < 1000.
  [[nodiscard]] CesaroReport
  cesaro_monte_carlo(FiniteMemoryMeasure const& measure,
                     CellularAutomaton const&   ca,
                     std::vector<Word> const&   words,
                     std::size_t                n_steps,
                     CesaroOptions const&       options = {});

  // mu(Phi^{-n}[w]) for one step by the exact engines; nullopt when neither
  // applies within the enumeration cap.
  [[nodiscard]] std::optional<double> exact_step(FiniteMemoryMeasure const& measure,
                                                 CellularAutomaton const&   ca,
                                                 std::span<Symbol const>    word,
                                                 std::size_t                n);

  enum class Verdict { converged, trending, not_converged, not_applicable };

  [[nodiscard]] std::string_view to_string(Verdict v) noexcept;

  struct Comparison {
    Verdict             verdict = Verdict::not_applicable;
    std::size_t         word_length = 0;
    double              final_deviation = 0;
    std::vector<double> deviations;  // after each step
  };

  // Throws incomplete_cover unless, for some k, every allowed k-word of the
  // shift has a series in the report.
  [[nodiscard]] Comparison compare_to_parry(CesaroReport const& report,
                                            MarkovShift const&  shift,
                                            double              tol);

}  // namespace tmca
