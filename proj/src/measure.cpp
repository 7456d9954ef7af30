#include "tmca/measure.hpp"

#include <algorithm>
#include <cmath>

#include "tmca/error.hpp"

namespace tmca {

  namespace {
    [[noreturn]] void invalid(std::string const& message) {
      throw Error(ErrorCode::invalid_measure, message);
    }

    std::vector<std::vector<std::size_t>>
    transitions(MarkovShift const&                 shift,
                std::vector<Word> const&           states,
                std::map<Word, std::size_t> const& index,
                std::size_t                        depth) {
      std::vector<std::vector<std::size_t>> next(
          states.size(), std::vector<std::size_t>(shift.size(), 0));
      if (depth == 0) {
        return next;
      }
      for (std::size_t s = 0; s < states.size(); ++s) {
        Word w(states[s].begin() + 1, states[s].end());
        w.push_back(0);
        for (auto a : shift.followers(states[s].back())) {
          w.back()   = a;
          next[s][a] = index.at(w);
        }
      }
      return next;
    }

    // Stationary law of the state chain: Gaussian elimination on
    // pi (P - I) = 0 with one equation replaced by sum(pi) = 1, falling back
    // to lazy power iteration when the system is singular.
    std::vector<double>
    stationary(std::vector<std::vector<double>> const&      kernel,
               std::vector<std::vector<std::size_t>> const& next,
               std::size_t                                  n_symbols) {
      auto const                       m = kernel.size();
      std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
      for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t x = 0; x < n_symbols; ++x) {
          if (kernel[s][x] > 0) {
            a[next[s][x]][s] += kernel[s][x];
          }
        }
        a[s][s] -= 1.0;
      }
      for (std::size_t s = 0; s < m; ++s) {
        a[m - 1][s] = 1.0;
      }
      a[m - 1][m] = 1.0;
      bool singular = false;
      for (std::size_t col = 0; col < m && !singular; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r) {
          if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
            pivot = r;
          }
        }
        if (std::abs(a[pivot][col]) < 1e-13) {
          singular = true;
          break;
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < m; ++r) {
          if (r != col && a[r][col] != 0.0) {
            double const f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) {
              a[r][c] -= f * a[col][c];
            }
          }
        }
      }
      std::vector<double> pi(m, 1.0 / static_cast<double>(m));
      if (!singular) {
        for (std::size_t s = 0; s < m; ++s) {
          pi[s] = std::max(0.0, a[s][m] / a[s][s]);
        }
      } else {
        for (std::size_t it = 0; it < 1'000'000; ++it) {
          std::vector<double> step(m, 0.0);
          for (std::size_t s = 0; s < m; ++s) {
            step[s] += 0.5 * pi[s];
            for (std::size_t x = 0; x < n_symbols; ++x) {
              if (kernel[s][x] > 0) {
                step[next[s][x]] += 0.5 * pi[s] * kernel[s][x];
              }
            }
          }
          double diff = 0;
          for (std::size_t s = 0; s < m; ++s) {
            diff = std::max(diff, std::abs(step[s] - pi[s]));
          }
          pi.swap(step);
          if (diff < 1e-16) {
            break;
          }
        }
      }
      double total = 0;
      for (auto p : pi) {
        total += p;
      }
      for (auto& p : pi) {
        p /= total;
      }
      return pi;
    }
  }  // namespace

  FiniteMemoryMeasure
  FiniteMemoryMeasure::from_kernel(MarkovShift                               shift,
                                   std::size_t                               depth,
                                   std::vector<std::vector<double>>          kernel,
                                   std::optional<std::vector<double>> const& initial) {
    FiniteMemoryMeasure m;
    m._shift = std::move(shift);
    m._depth = depth;
    if (depth == 0) {
      m._states = {Word{}};
    } else {
      m._states = allowed_words(m._shift, depth);
    }
    for (std::size_t s = 0; s < m._states.size(); ++s) {
      m._index.emplace(m._states[s], s);
    }
    auto const  n     = m._shift.size();
    auto const& names = m._shift.alphabet();
    if (kernel.size() != m._states.size()) {
      invalid("kernel has " + std::to_string(kernel.size()) + " rows, expected one per "
              "allowed " + std::to_string(depth) + "-word ("
              + std::to_string(m._states.size()) + ")");
    }
    m._complete_connections = true;
    for (std::size_t s = 0; s < kernel.size(); ++s) {
      auto const& row   = kernel[s];
      auto const  label = "'" + names.format(m._states[s]) + "'";
      if (row.size() != n) {
        invalid("kernel row " + label + " has the wrong length");
      }
      double total = 0;
      for (Symbol a = 0; a < n; ++a) {
        if (!(row[a] >= 0.0) || row[a] > 1.0) {
          invalid("kernel entry for " + label + " -> " + names.name(a)
                  + " is not a probability");
        }
        bool const follower = depth == 0 || m._shift.has_edge(m._states[s].back(), a);
        if (row[a] > 0 && !follower) {
          invalid("kernel row " + label + " gives mass to " + names.name(a)
                  + ", which cannot follow it");
        }
        if (follower && row[a] == 0) {
          m._complete_connections = false;
        }
        total += row[a];
      }
      if (std::abs(total - 1.0) > probability_tolerance) {
        invalid("kernel row " + label + " sums to " + std::to_string(total));
      }
    }
    if (depth == 0) {
      auto const& p = kernel.front();
      for (Symbol a = 0; a < n; ++a) {
        for (Symbol b = 0; b < n; ++b) {
          if (p[a] > 0 && p[b] > 0 && !m._shift.has_edge(a, b)) {
            invalid("product measure charges the forbidden word "
                    + names.format(Word{a, b}));
          }
        }
      }
      m._complete_connections = m._complete_connections && m._shift.is_full();
    }
    m._kernel = std::move(kernel);

    auto const next = transitions(m._shift, m._states, m._index, depth);
    if (initial) {
      if (initial->size() != m._states.size()) {
        invalid("initial law has the wrong number of entries");
      }
      m._initial = *initial;
    } else {
      m._initial = stationary(m._kernel, next, n);
    }
    double total = 0;
    for (auto p : m._initial) {
      if (!(p >= 0.0)) {
        invalid("initial law has a negative entry");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > probability_tolerance) {
      invalid("initial law sums to " + std::to_string(total));
    }
    std::vector<double> image(m._states.size(), 0.0);
    for (std::size_t s = 0; s < m._states.size(); ++s) {
      for (Symbol a = 0; a < n; ++a) {
        if (m._kernel[s][a] > 0) {
          image[next[s][a]] += m._initial[s] * m._kernel[s][a];
        }
      }
    }
    for (std::size_t s = 0; s < m._states.size(); ++s) {
      if (std::abs(image[s] - m._initial[s]) > probability_tolerance) {
        invalid("initial law is not stationary at '" + names.format(m._states[s])
                + "'");
      }
    }
    return m;
  }

  FiniteMemoryMeasure FiniteMemoryMeasure::bernoulli(MarkovShift const&         shift,
                                                     std::vector<double> const& p) {
    return from_kernel(shift, 0, {p});
  }

  std::optional<std::size_t>
  FiniteMemoryMeasure::state_index(std::span<Symbol const> past) const {
    auto it = _index.find(Word(past.begin(), past.end()));
    if (it == _index.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  FiniteMemoryMeasure parry_measure(MarkovShift const& shift) {
    auto const                       perron = perron_data(shift);
    auto const                       n      = shift.size();
    std::vector<std::vector<double>> kernel(n, std::vector<double>(n, 0.0));
    for (Symbol a = 0; a < n; ++a) {
      double total = 0;
      for (auto b : shift.followers(a)) {
        kernel[a][b] = perron.right[b] / (perron.root * perron.right[a]);
        total += kernel[a][b];
      }
      for (auto b : shift.followers(a)) {
        kernel[a][b] /= total;
      }
    }
    return FiniteMemoryMeasure::from_kernel(shift, 1, std::move(kernel));
  }

  double measure_entropy(FiniteMemoryMeasure const& m) {
    double h = 0;
    for (std::size_t s = 0; s < m.states().size(); ++s) {
      for (auto p : m.kernel()[s]) {
        if (p > 0) {
          h -= m.initial()[s] * p * std::log(p);
        }
      }
    }
    return h;
  }

  double cylinder_prob(FiniteMemoryMeasure const& m, std::span<Symbol const> word) {
    if (word.empty()) {
      return 1.0;
    }
    if (!m.shift().is_allowed(word)) {
      throw Error(ErrorCode::not_allowed,
                  "word is not allowed in the measure's shift");
    }
    auto const d = m.depth();
    if (word.size() < d) {
      double total = 0;
      for (std::size_t s = 0; s < m.states().size(); ++s) {
        auto const& st = m.states()[s];
        if (std::equal(word.begin(), word.end(), st.begin())) {
          total += m.initial()[s];
        }
      }
      return total;
    }
    double p = m.initial()[*m.state_index(word.first(d))];
    for (std::size_t i = d; i < word.size() && p > 0; ++i) {
      p *= m.kernel()[*m.state_index(word.subspan(i - d, d))][word[i]];
    }
    return p;
  }

  std::vector<double> gamma_sequence(FiniteMemoryMeasure const& m, std::size_t m_max) {
    if (m_max == 0) {
      throw Error(ErrorCode::invalid_argument, "m_max must be positive");
    }
    if (!m.complete_connections()) {
      invalid("gamma needs a measure with complete connections");
    }
    auto const          d = m.depth();
    std::vector<double> gamma(m_max, 0.0);
    for (std::size_t k = 1; k <= m_max && k < d; ++k) {
      // Group pasts by their last k symbols.
      std::map<Word, std::vector<std::size_t>> groups;
      for (std::size_t s = 0; s < m.states().size(); ++s) {
        auto const& w = m.states()[s];
        groups[Word(w.end() - static_cast<std::ptrdiff_t>(k), w.end())].push_back(s);
      }
      double worst = 0;
      for (auto const& [suffix, members] : groups) {
        for (auto a : m.shift().followers(suffix.back())) {
          double lo = 1, hi = 0;
          for (auto s : members) {
            lo = std::min(lo, m.kernel()[s][a]);
            hi = std::max(hi, m.kernel()[s][a]);
          }
          worst = std::max(worst, hi / lo - 1.0);
        }
      }
      gamma[k - 1] = worst;
    }
    return gamma;
  }

  double pushforward_cylinder(FiniteMemoryMeasure const& m,
                              BlockCode const&           code,
                              std::span<Symbol const>    word) {
    if (!(code.source() == m.shift())) {
      throw Error(ErrorCode::invalid_argument,
                  "code source differs from the measure's shift");
    }
    double total = 0;
    for (auto const& v : preimage_cylinder(code, word)) {
      total += cylinder_prob(m, v);
    }
    return total;
  }

  std::optional<BlockCode> memory_one_inverse(BlockCode const& code) {
    if (code.memory() != 0 || code.anticipation() != 0) {
      return std::nullopt;
    }
    auto const&         s = code.source();
    auto const&         t = code.target();
    std::vector<Symbol> theta(s.size()), f(s.size());
    for (Symbol x = 0; x < s.size(); ++x) {
      theta[x] = code.at(std::span<Symbol const>(&x, 1));
    }
    for (auto const& [x, y] : s.edges()) {
      if (!t.has_edge(theta[x], theta[y])) {
        return std::nullopt;
      }
    }
    for (Symbol x = 0; x < s.size(); ++x) {
      auto const& pred = s.predecessors(x);
      f[x]             = theta[pred.front()];
      for (auto p : pred) {
        if (theta[p] != f[x]) {
          return std::nullopt;
        }
      }
    }
    std::map<Edge, Symbol> g;
    for (Symbol x = 0; x < s.size(); ++x) {
      if (!g.emplace(Edge{f[x], theta[x]}, x).second) {
        return std::nullopt;
      }
    }
    for (auto const& e : t.edges()) {
      if (g.count(e) == 0) {
        return std::nullopt;
      }
    }
    // Consecutive inverse images must be source edges.
    for (auto const& [y0, y1] : t.edges()) {
      for (auto y2 : t.followers(y1)) {
        if (!s.has_edge(g.at({y0, y1}), g.at({y1, y2}))) {
          return std::nullopt;
        }
      }
    }
    return BlockCode(t, s, 1, 0, [&](std::span<Symbol const> w) {
      return g.at({w[0], w[1]});
    });
  }

  FiniteMemoryMeasure pushforward_measure(FiniteMemoryMeasure const& m,
                                          BlockCode const&           code) {
    auto inverse = memory_one_inverse(code);
    if (!inverse) {
      throw Error(ErrorCode::hypothesis_failed,
                  "code is not a 1-block code with a memory-1 inverse that is "
                  "constant on predecessor sets");
    }
    if (!(code.source() == m.shift())) {
      throw Error(ErrorCode::invalid_argument,
                  "code source differs from the measure's shift");
    }
    auto const& t      = code.target();
    auto const  d      = m.depth();
    auto const  states = allowed_words(t, d + 1);
    std::vector<std::vector<double>> kernel(states.size(),
                                            std::vector<double>(t.size(), 0.0));
    std::vector<double>              initial(states.size());
    Word                             past(d);
    for (std::size_t s = 0; s < states.size(); ++s) {
      auto const& w = states[s];
      for (std::size_t i = 0; i < d; ++i) {
        past[i] = inverse->at(std::span<Symbol const>(w).subspan(i, 2));
      }
      auto const state = *m.state_index(past);
      for (auto b : t.followers(w.back())) {
        Symbol const pair[2] = {w.back(), b};
        kernel[s][b]         = m.kernel()[state][inverse->at(pair)];
      }
      initial[s] = pushforward_cylinder(m, code, w);
    }
    return FiniteMemoryMeasure::from_kernel(t, d + 1, std::move(kernel), initial);
  }

  InvarianceReport check_invariance(FiniteMemoryMeasure const& m,
                                    BlockCode const&           code,
                                    std::size_t                depth,
                                    double                     tol) {
    InvarianceReport report;
    for (std::size_t k = 1; k <= depth; ++k) {
      for (auto const& w : allowed_words(code.target(), k)) {
        double const dev
            = std::abs(pushforward_cylinder(m, code, w) - cylinder_prob(m, w));
        report.deviations.emplace_back(w, dev);
        if (dev > report.max_deviation) {
          report.max_deviation = dev;
          report.worst         = w;
        }
      }
    }
    report.invariant = report.max_deviation <= tol;
    return report;
  }

  ////////////////////////////////////////////////////////////////////////
  // Sampling
  ////////////////////////////////////////////////////////////////////////

  namespace {
    std::vector<double> cdf(std::vector<double> const& p) {
      std::vector<double> c(p.size());
      double              total = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        total += p[i];
        c[i] = total;
      }
      return c;
    }

    std::size_t draw(std::vector<double> const& c, double u) {
      auto it = std::upper_bound(c.begin(), c.end(), u * c.back());
      auto i  = static_cast<std::size_t>(it - c.begin());
      if (i >= c.size()) {
        i = c.size() - 1;
      }
      // Skip zero-mass entries left of a rounding boundary.
      while (i > 0 && c[i] == c[i - 1]) {
        --i;
      }
      return i;
    }
  }  // namespace

  Sampler::Sampler(FiniteMemoryMeasure const& m)
      : _depth(m.depth()), _states(m.states()), _initial_cdf(cdf(m.initial())) {
    for (auto const& row : m.kernel()) {
      _row_cdf.push_back(cdf(row));
    }
    std::map<Word, std::size_t> index;
    for (std::size_t s = 0; s < _states.size(); ++s) {
      index.emplace(_states[s], s);
    }
    _next = transitions(m.shift(), _states, index, _depth);
  }

  void Sampler::sample_into(std::span<Symbol> out, std::mt19937_64& rng) const {
    if (out.size() < _depth) {
      throw Error(ErrorCode::invalid_argument,
                  "sample length is shorter than the measure depth");
    }
    std::size_t state = draw(_initial_cdf, unit_double(rng));
    std::copy(_states[state].begin(), _states[state].end(), out.begin());
    for (std::size_t i = _depth; i < out.size(); ++i) {
      auto const a = static_cast<Symbol>(draw(_row_cdf[state], unit_double(rng)));
      out[i]       = a;
      state        = _next[state][a];
    }
  }

  Word Sampler::sample(std::size_t length, std::mt19937_64& rng) const {
    Word w(length);
    sample_into(w, rng);
    return w;
  }

  Word sample_path(FiniteMemoryMeasure const& m, std::size_t length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return Sampler(m).sample(length, rng);
  }

}  // namespace tmca
