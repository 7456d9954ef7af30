#include "tmca/cesaro.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <set>
#include <cmath>
#include <thread>

#include "tmca/algebra.hpp"
#include "tmca/error.hpp"

namespace tmca {

  namespace {

    ////////////////////////////////////////////////////////////////////////
    // Affine engine
    ////////////////////////////////////////////////////////////////////////

    // Phi(x)_j = eta(x_j) + rho(x_{j+1}) + c over an abelian group.
    struct AffineForm {
      std::size_t         order = 0;
      CayleyTable         group;
      Symbol              zero = 0;
      std::vector<Symbol> eta, rho;
      Symbol              c        = 0;
      unsigned            exponent = 1;
    };

    std::optional<AffineForm> affine_form(CellularAutomaton const& ca) {
      if (!ca.table() || ca.code().memory() != 0 || ca.code().anticipation() != 1) {
        return std::nullopt;
      }
      auto result = toyoda_decompose(*ca.table());
      if (!result.decomposition) {
        return std::nullopt;
      }
      auto&      d = *result.decomposition;
      AffineForm f;
      f.order = d.group.size();
      f.group = d.group;
      f.zero  = d.zero;
      f.eta   = d.eta;
      f.rho   = d.rho;
      f.c     = d.constant;
      for (auto q : d.primary_factors) {
        f.exponent = std::lcm(f.exponent, q);
      }
      return f;
    }

    std::vector<Symbol> compose_maps(std::vector<Symbol> const& outer,
                                     std::vector<Symbol> const& inner) {
      std::vector<Symbol> out(inner.size());
      for (std::size_t x = 0; x < inner.size(); ++x) {
        out[x] = outer[inner[x]];
      }
      return out;
    }

    inline constexpr std::size_t affine_state_limit = std::size_t{1} << 22;

    // mu(Phi^{-n}[w]) by a forward pass over source positions carrying the
    // partial sums of all k outputs and the measure state.
    std::optional<double> affine_step(FiniteMemoryMeasure const& m,
                                      AffineForm const&          f,
                                      std::span<Symbol const>    w,
                                      std::size_t                n) {
      auto const g     = f.order;
      auto const k     = w.size();
      auto const d     = m.depth();
      auto const len   = n + k;
      auto const nsym  = m.shift().size();
      if (len < d) {
        return std::nullopt;
      }
      std::size_t sum_space = 1;
      for (std::size_t j = 0; j < k; ++j) {
        sum_space *= g;
        if (sum_space * m.states().size() > affine_state_limit) {
          return std::nullopt;
        }
      }
      auto const& add = f.group;

      // coefficient maps A_m = C(n, m) * eta^(n-m) rho^m.
      std::vector<unsigned> binom{1 % f.exponent};
      for (std::size_t row = 1; row <= n; ++row) {
        std::vector<unsigned> next(row + 1, 0);
        for (std::size_t i = 0; i <= row; ++i) {
          unsigned v = 0;
          if (i > 0) {
            v += binom[i - 1];
          }
          if (i < row) {
            v += binom[i];
          }
          next[i] = v % f.exponent;
        }
        binom = std::move(next);
      }
      std::vector<Symbol> identity(g);
      for (Symbol x = 0; x < g; ++x) {
        identity[x] = x;
      }
      std::vector<std::vector<Symbol>> eta_pow{identity}, rho_pow{identity};
      for (std::size_t i = 1; i <= n; ++i) {
        eta_pow.push_back(compose_maps(f.eta, eta_pow.back()));
        rho_pow.push_back(compose_maps(f.rho, rho_pow.back()));
      }
      std::vector<std::vector<Symbol>> coeff(n + 1, std::vector<Symbol>(g));
      for (std::size_t mm = 0; mm <= n; ++mm) {
        for (Symbol x = 0; x < g; ++x) {
          Symbol const base = eta_pow[n - mm][rho_pow[mm][x]];
          Symbol       y    = f.zero;
          for (unsigned t = 0; t < binom[mm]; ++t) {
            y = add(y, base);
          }
          coeff[mm][x] = y;
        }
      }
      Symbol cn = f.zero;
      for (std::size_t t = 0; t < n; ++t) {
        cn = add(add(f.eta[cn], f.rho[cn]), f.c);
      }

      // The shift's symbols are the group's symbols in the same order.
      std::vector<std::size_t> power(k, 1);
      for (std::size_t j = 1; j < k; ++j) {
        power[j] = power[j - 1] * g;
      }
      auto digit = [&](std::size_t key, std::size_t j) {
        return static_cast<Symbol>((key / power[j]) % g);
      };
      auto with_digit = [&](std::size_t key, std::size_t j, Symbol v) {
        return key - digit(key, j) * power[j] + v * power[j];
      };
      // Adds symbol a at position i; returns nullopt if a completed output
      // misses its target.
      auto advance = [&](std::size_t key, std::size_t i, Symbol a)
          -> std::optional<std::size_t> {
        std::size_t const lo = i >= n ? i - n : 0;
        std::size_t const hi = std::min(k - 1, i);
        for (std::size_t j = lo; j <= hi; ++j) {
          key = with_digit(key, j, add(digit(key, j), coeff[i - j][a]));
        }
        if (i >= n && i - n < k) {
          auto const j = i - n;
          if (add(digit(key, j), cn) != w[j]) {
            return std::nullopt;
          }
          key = with_digit(key, j, f.zero);
        }
        return key;
      };
      // Every partial sum starts at the group's zero.
      std::size_t empty_key = 0;
      for (std::size_t j = 0; j < k; ++j) {
        empty_key += f.zero * power[j];
      }

      auto const          states = m.states().size();
      std::vector<double> current(states * sum_space, 0.0);
      for (std::size_t s = 0; s < states; ++s) {
        double const p = m.initial()[s];
        if (p == 0) {
          continue;
        }
        std::optional<std::size_t> key  = empty_key;
        auto const&                word = m.states()[s];
        for (std::size_t i = 0; i < d && key; ++i) {
          key = advance(*key, i, word[i]);
        }
        if (key) {
          current[s * sum_space + *key] += p;
        }
      }
      std::vector<std::vector<std::size_t>> next_state(states,
                                                       std::vector<std::size_t>(nsym, 0));
      if (d > 0) {
        for (std::size_t s = 0; s < states; ++s) {
          Word succ(m.states()[s].begin() + 1, m.states()[s].end());
          succ.push_back(0);
          for (auto a : m.shift().followers(m.states()[s].back())) {
            succ.back()      = a;
            next_state[s][a] = *m.state_index(succ);
          }
        }
      }
      for (std::size_t i = d; i < len; ++i) {
        std::vector<double> step(states * sum_space, 0.0);
        for (std::size_t s = 0; s < states; ++s) {
          for (std::size_t key = 0; key < sum_space; ++key) {
            double const p = current[s * sum_space + key];
            if (p == 0) {
              continue;
            }
            for (Symbol a = 0; a < nsym; ++a) {
              double const q = m.kernel()[s][a];
              if (q == 0) {
                continue;
              }
              if (auto moved = advance(key, i, a)) {
                step[next_state[s][a] * sum_space + *moved] += p * q;
              }
            }
          }
        }
        current = std::move(step);
      }
      double total = 0;
      for (auto p : current) {
        total += p;
      }
      return total;
    }

    ////////////////////////////////////////////////////////////////////////
    // Enumeration engine
    ////////////////////////////////////////////////////////////////////////

    // Depth-first over source words, filling the space-time triangle one
    // diagonal per appended symbol and pruning on the top level.
    class TriangleEnumerator {
     public:
      TriangleEnumerator(FiniteMemoryMeasure const& m,
                         BlockCode const&           code,
                         std::span<Symbol const>    w,
                         std::size_t                n)
          : _m(m),
            _code(code),
            _w(w),
            _n(n),
            _len(n * (code.memory() + code.anticipation()) + w.size()),
            _levels(n + 1, Word(_len)) {}

      double run() {
        double total = 0;
        for (Symbol s = 0; s < _m.shift().size(); ++s) {
          total += visit(0, s, 1.0);
        }
        return total;
      }

     private:
      double visit(std::size_t i, Symbol s, double prefix) {
        _levels[0][i] = s;
        auto const d  = _m.depth();
        double     p;
        if (i + 1 <= d) {
          p = cylinder_prob(_m, std::span<Symbol const>(_levels[0]).first(i + 1));
        } else {
          auto const state
              = *_m.state_index(std::span<Symbol const>(_levels[0]).subspan(i - d, d));
          p = prefix * _m.kernel()[state][s];
        }
        if (p == 0) {
          return 0;
        }
        auto const l = _code.memory(), r = _code.anticipation();
        for (std::size_t t = 1; t <= _n; ++t) {
          if (i < t * r || i - t * r < t * l) {
            break;
          }
          auto const pos = i - t * r;
          auto const v   = _code.find(
              std::span<Symbol const>(_levels[t - 1]).subspan(pos - l, l + r + 1));
          if (!v) {
            throw Error(ErrorCode::not_closed,
                        "iterate leaves the shift during preimage enumeration");
          }
          _levels[t][pos] = *v;
          if (t == _n && _levels[t][pos] != _w[pos - _n * l]) {
            return 0;
          }
        }
        if (_n == 0 && s != _w[i]) {
          return 0;
        }
        if (i + 1 == _len) {
          return p;
        }
        double total = 0;
        for (auto next : _m.shift().followers(s)) {
          total += visit(i + 1, next, p);
        }
        return total;
      }

      FiniteMemoryMeasure const& _m;
      BlockCode const&           _code;
      std::span<Symbol const>    _w;
      std::size_t                _n;
      std::size_t                _len;
      std::vector<Word>          _levels;
    };

    bool enumeration_feasible(FiniteMemoryMeasure const& m,
                              BlockCode const&           code,
                              std::size_t                k,
                              std::size_t                n) {
      auto const len = n * (code.memory() + code.anticipation()) + k;
      return count_allowed_words(m.shift(), len) <= enumeration_cap();
    }

    double enumeration_step(FiniteMemoryMeasure const& m,
                            BlockCode const&           code,
                            std::span<Symbol const>    w,
                            std::size_t                n) {
      return TriangleEnumerator(m, code, w, n).run();
    }

    void require_compatible(FiniteMemoryMeasure const& m,
                            CellularAutomaton const&   ca,
                            std::vector<Word> const&   words) {
      if (!(m.shift() == ca.shift())) {
        throw Error(ErrorCode::invalid_argument,
                    "measure and CA live on different shifts");
      }
      if (words.empty()) {
        throw Error(ErrorCode::invalid_argument, "at least one word is required");
      }
      for (auto const& w : words) {
        if (w.empty() || !ca.shift().is_allowed(w)) {
          throw Error(ErrorCode::not_allowed,
                      "word '" + ca.shift().alphabet().format(w) + "' is not allowed");
        }
      }
    }

    void finish(CesaroReport& report, MarkovShift const& shift) {
      std::optional<FiniteMemoryMeasure> parry;
      if (is_irreducible(shift)) {
        parry = parry_measure(shift);
      }
      for (auto& s : report.series) {
        s.averages.resize(s.values.size());
        double running = 0;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
          running += s.values[i];
          s.averages[i] = running / static_cast<double>(i + 1);
        }
        if (parry) {
          s.parry = cylinder_prob(*parry, s.word);
        }
      }
      if (parry && report.steps > 0 && !report.series.empty()
          && !report.series.front().averages.empty()) {
        double dev = 0;
        for (auto const& s : report.series) {
          dev = std::max(dev, std::abs(s.averages.back() - *s.parry));
        }
        report.final_deviation = dev;
      }
    }

    std::uint64_t splitmix64(std::uint64_t x) {
      x += 0x9E3779B97F4A7C15ULL;
      x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
      x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
      return x ^ (x >> 31);
    }

    inline constexpr std::size_t mc_block = 4096;

  }  // namespace

  std::optional<double> exact_step(FiniteMemoryMeasure const& m,
                                   CellularAutomaton const&   ca,
                                   std::span<Symbol const>    w,
                                   std::size_t                n) {
    if (auto f = affine_form(ca)) {
      if (auto v = affine_step(m, *f, w, n)) {
        return v;
      }
    }
    if (enumeration_feasible(m, ca.code(), w.size(), n)) {
      return enumeration_step(m, ca.code(), w, n);
    }
    return std::nullopt;
  }

  CesaroReport cesaro_exact(FiniteMemoryMeasure const& m,
                            CellularAutomaton const&   ca,
                            std::vector<Word> const&   words,
                            std::size_t                n_steps,
                            CesaroOptions const&       options) {
    require_compatible(m, ca, words);
    CesaroReport report;
    report.mode    = CesaroMode::exact;
    report.steps   = n_steps;
    report.regular = options.regular;
    report.simple  = options.simple;
    auto const form = affine_form(ca);

    std::size_t feasible = n_steps;
    for (auto const& w : words) {
      CesaroSeries s;
      s.word = w;
      for (std::size_t n = 0; n < n_steps; ++n) {
        std::optional<double> v;
        if (form) {
          v = affine_step(m, *form, w, n);
        }
        if (!v && n < feasible && enumeration_feasible(m, ca.code(), w.size(), n)) {
          v = enumeration_step(m, ca.code(), w, n);
        }
        if (!v) {
          feasible = std::min(feasible, n);
          break;
        }
        s.values.push_back(*v);
        s.exact.push_back(true);
        s.half_widths.push_back(0.0);
      }
      report.series.push_back(std::move(s));
    }
    // All series share the exact prefix.
    for (auto& s : report.series) {
      s.values.resize(std::min(s.values.size(), feasible));
      s.exact.resize(s.values.size());
      s.half_widths.resize(s.values.size());
    }
    report.engine = form ? "affine" : "enumeration";
    if (feasible < n_steps) {
      report.first_infeasible_step = feasible;
      if (options.strict_exact) {
        report.truncated = true;
        report.steps     = feasible;
      } else {
        auto mc        = cesaro_monte_carlo(m, ca, words, n_steps, options);
        report.engine  = form ? "affine+monte_carlo" : "enumeration+monte_carlo";
        report.samples = mc.samples;
        report.seed    = mc.seed;
        for (std::size_t i = 0; i < words.size(); ++i) {
          auto&       s  = report.series[i];
          auto const& ms = mc.series[i];
          for (std::size_t n = feasible; n < n_steps; ++n) {
            s.values.push_back(ms.values[n]);
            s.half_widths.push_back(ms.half_widths[n]);
            s.exact.push_back(false);
          }
        }
      }
    }
    finish(report, ca.shift());
    return report;
  }

  CesaroReport cesaro_monte_carlo(FiniteMemoryMeasure const& m,
                                  CellularAutomaton const&   ca,
                                  std::vector<Word> const&   words,
                                  std::size_t                n_steps,
                                  CesaroOptions const&       options) {
    require_compatible(m, ca, words);
    if (options.samples < 1000) {
      throw Error(ErrorCode::invalid_argument, "Monte Carlo needs at least 1000 samples");
    }
    CesaroReport report;
    report.mode    = CesaroMode::monte_carlo;
    report.engine  = "monte_carlo";
    report.steps   = n_steps;
    report.samples = options.samples;
    report.seed    = options.seed;
    report.regular = options.regular;
    report.simple  = options.simple;

    auto const& code   = ca.code();
    auto const  spread = code.memory() + code.anticipation();
    std::size_t kmax   = 0;
    for (auto const& w : words) {
      kmax = std::max(kmax, w.size());
    }
    auto const length = n_steps == 0 ? kmax : (n_steps - 1) * spread + kmax;
    auto const blocks = (options.samples + mc_block - 1) / mc_block;
    Sampler const sampler(m);

    // counts[block][word * n_steps + n]
    std::vector<std::vector<std::uint64_t>> counts(
        blocks, std::vector<std::uint64_t>(words.size() * n_steps, 0));
    std::atomic<std::size_t> next_block{0};
    std::exception_ptr       failure;
    std::mutex               failure_mutex;
    auto                     worker = [&] {
      Word path(std::max(length, m.depth()));
      try {
        for (std::size_t b = next_block++; b < blocks; b = next_block++) {
          std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(b)));
          auto const      first = b * mc_block;
          auto const      count = std::min(mc_block, options.samples - first);
          auto&           out   = counts[b];
          for (std::size_t i = 0; i < count; ++i) {
            sampler.sample_into(path, rng);
            std::size_t live = length;
            for (std::size_t n = 0; n < n_steps; ++n) {
              for (std::size_t wi = 0; wi < words.size(); ++wi) {
                auto const& w = words[wi];
                if (std::equal(w.begin(), w.end(), path.begin())) {
                  ++out[wi * n_steps + n];
                }
              }
              if (n + 1 == n_steps) {
                break;
              }
              auto const next_live = live - spread;
              for (std::size_t p = 0; p < next_live; ++p) {
                path[p] = code.at(std::span<Symbol const>(path).subspan(p, spread + 1));
              }
              live = next_live;
            }
          }
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        failure = std::current_exception();
      }
    };
    unsigned threads = options.threads != 0 ? options.threads
                                            : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
      t.join();
    }
    if (failure) {
      std::rethrow_exception(failure);
    }

    auto const s_count = static_cast<double>(options.samples);
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      CesaroSeries s;
      s.word = words[wi];
      for (std::size_t n = 0; n < n_steps; ++n) {
        std::uint64_t hits = 0;
        for (auto const& c : counts) {
          hits += c[wi * n_steps + n];
        }
        double const p = static_cast<double>(hits) / s_count;
        s.values.push_back(p);
        s.half_widths.push_back(cesaro_z * std::sqrt(p * (1 - p) / (s_count - 1)));
        s.exact.push_back(false);
      }
      report.series.push_back(std::move(s));
    }
    finish(report, ca.shift());
    return report;
  }

  std::string_view to_string(Verdict v) noexcept {
    switch (v) {
      case Verdict::converged:
        return "CONVERGED";
      case Verdict::trending:
        return "TRENDING";
      case Verdict::not_converged:
        return "NOT_CONVERGED";
      case Verdict::not_applicable:
        return "NOT_APPLICABLE";
    }
    return "NOT_APPLICABLE";
  }

  Comparison compare_to_parry(CesaroReport const& report,
                              MarkovShift const&  shift,
                              double              tol) {
    Comparison result;
    if (!is_irreducible(shift)) {
      result.verdict = Verdict::not_applicable;
      return result;
    }
    std::set<std::size_t> lengths;
    for (auto const& s : report.series) {
      lengths.insert(s.word.size());
    }
    std::vector<CesaroSeries const*> cover;
    for (auto k : lengths) {
      if (count_allowed_words(shift, k) > report.series.size()) {
        continue;
      }
      std::vector<CesaroSeries const*> found;
      bool                             complete = true;
      for (auto const& w : allowed_words(shift, k)) {
        auto it = std::find_if(report.series.begin(),
                               report.series.end(),
                               [&](CesaroSeries const& s) { return s.word == w; });
        if (it == report.series.end()) {
          complete = false;
          break;
        }
        found.push_back(&*it);
      }
      if (complete) {
        result.word_length = k;
        cover              = std::move(found);
        break;
      }
    }
    if (cover.empty()) {
      throw Error(ErrorCode::incomplete_cover,
                  "the report does not cover every allowed word of any length");
    }
    auto const parry = parry_measure(shift);
    auto const steps = cover.front()->averages.size();
    for (std::size_t t = 0; t < steps; ++t) {
      double dev = 0;
      for (auto const* s : cover) {
        dev = std::max(dev, std::abs(s->averages[t] - cylinder_prob(parry, s->word)));
      }
      result.deviations.push_back(dev);
    }
    if (steps == 0) {
      result.verdict = Verdict::not_converged;
      return result;
    }
    result.final_deviation = result.deviations.back();
    if (result.final_deviation <= tol) {
      result.verdict = Verdict::converged;
      return result;
    }
    auto const half       = steps / 2;
    bool       decreasing = result.deviations.back() < result.deviations[half];
    for (std::size_t t = half + 1; t < steps && decreasing; ++t) {
      decreasing = result.deviations[t] <= result.deviations[t - 1];
    }
    result.verdict = decreasing ? Verdict::trending : Verdict::not_converged;
    return result;
  }

}  // namespace tmca
