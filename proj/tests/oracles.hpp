#pragma once

// Brute-force reference computations and random instance generators. These
// avoid the library's enumerators and block codes on purpose.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tmca/algebra.hpp"
#include "tmca/error.hpp"
#include "tmca/measure.hpp"
#include "tmca/tmc.hpp"

namespace oracle {

  using tmca::Symbol;
  using tmca::Word;

  inline tmca::Alphabet digits(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back(std::string(1, static_cast<char>(i < 10 ? '0' + i : 'a' + i - 10)));
    }
    return tmca::Alphabet(names);
  }

  // Every word of length len over n symbols, lexicographic.
  inline std::vector<Word> all_words(std::size_t n, std::size_t len) {
    std::vector<Word> out;
    Word              w(len, 0);
    while (true) {
      out.push_back(w);
      std::size_t i = len;
      while (i > 0 && w[i - 1] + 1 == n) {
        w[--i] = 0;
      }
      if (i == 0) {
        return out;
      }
      ++w[i - 1];
    }
  }

  inline bool allowed(tmca::MarkovShift const& s, std::span<Symbol const> w) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (!s.has_edge(w[i - 1], w[i])) {
        return false;
      }
    }
    return true;
  }

  // Entries of A^p by repeated integer matrix products.
  inline std::vector<std::uint64_t> matrix_power(tmca::MarkovShift const& s, std::size_t p) {
    auto const                 n = s.size();
    std::vector<std::uint64_t> acc(n * n, 0), a(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i * n + i] = 1;
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] = s.has_edge(static_cast<Symbol>(i), static_cast<Symbol>(j));
      }
    }
    for (std::size_t step = 0; step < p; ++step) {
      std::vector<std::uint64_t> next(n * n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < n; ++m) {
          for (std::size_t j = 0; j < n; ++j) {
            next[i * n + j] += acc[i * n + m] * a[m * n + j];
          }
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

  // |G_k| as the sum of the entries of A^(k-1).
  inline std::uint64_t matrix_word_count(tmca::MarkovShift const& s, std::size_t k) {
    std::uint64_t total = 0;
    for (auto v : matrix_power(s, k - 1)) {
      total += v;
    }
    return total;
  }

  // Cylinder probability straight from the kernel: sum over length-d
  // extensions for short words, chained conditionals otherwise.
  inline double cylinder(tmca::FiniteMemoryMeasure const& m, Word const& w) {
    auto const d = m.depth();
    auto const n = m.shift().size();
    if (w.size() < d) {
      double total = 0;
      for (auto const& tail : all_words(n, d - w.size())) {
        Word x = w;
        x.insert(x.end(), tail.begin(), tail.end());
        if (allowed(m.shift(), x)) {
          total += cylinder(m, x);
        }
      }
      return total;
    }
    if (!allowed(m.shift(), w)) {
      return 0;
    }
    std::size_t state = 0;
    for (; state < m.states().size(); ++state) {
      if (std::equal(m.states()[state].begin(), m.states()[state].end(), w.begin())) {
        break;
      }
    }
    double p = m.initial()[state];
    for (std::size_t i = d; i < w.size(); ++i) {
      Word const past(w.begin() + static_cast<long>(i - d), w.begin() + static_cast<long>(i));
      std::size_t s = 0;
      while (m.states()[s] != past) {
        ++s;
      }
      p *= m.kernel()[s][w[i]];
    }
    return p;
  }

  using LocalRule = std::function<Symbol(std::span<Symbol const>)>;

  // Image of a finite word under a local rule with window `width`.
  inline Word apply(LocalRule const& rule, std::size_t width, Word const& x) {
    Word out;
    for (std::size_t i = 0; i + width <= x.size(); ++i) {
      out.push_back(rule(std::span<Symbol const>(x).subspan(i, width)));
    }
    return out;
  }

  // mu(Phi^{-n}[w]) by scanning every word of the right length.
  inline double preimage_probability(tmca::FiniteMemoryMeasure const& m,
                                     LocalRule const&                 rule,
                                     std::size_t                      width,
                                     Word const&                      w,
                                     std::size_t                      n) {
    auto const len   = w.size() + n * (width - 1);
    double     total = 0;
    for (auto const& x : all_words(m.shift().size(), len)) {
      if (!allowed(m.shift(), x)) {
        continue;
      }
      Word y = x;
      for (std::size_t t = 0; t < n; ++t) {
        y = apply(rule, width, y);
      }
      if (y == w) {
        total += cylinder(m, x);
      }
    }
    return total;
  }

  // mu_0.3(Phi^{-n}[1]) for x_i + x_{i+1} mod 2 under Bernoulli(0.3): the
  // image symbol is a sum of 2^{s(n)} independent bits, s = binary digit sum.
  inline double xor_closed_form(std::size_t n) {
    auto const s = static_cast<double>(std::popcount(n));
    return (1.0 - std::pow(0.4, std::pow(2.0, s))) / 2.0;
  }

  inline tmca::CayleyTable cyclic_sum(std::size_t n) {
    std::vector<Symbol> e(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        e[a * n + b] = static_cast<Symbol>((a + b) % n);
      }
    }
    return tmca::CayleyTable(digits(n), e);
  }

  // Random edge relation; each pair kept with probability `density`.
  inline tmca::MarkovShift random_shift(std::mt19937_64& rng, std::size_t n, double density) {
    std::bernoulli_distribution keep(density);
    while (true) {
      std::vector<tmca::Edge> edges;
      for (Symbol a = 0; a < n; ++a) {
        for (Symbol b = 0; b < n; ++b) {
          if (keep(rng)) {
            edges.emplace_back(a, b);
          }
        }
      }
      try {
        return tmca::MarkovShift::from_edges(digits(n), edges);
      } catch (tmca::Error const&) {
      }
    }
  }

  inline tmca::CayleyTable random_table(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(n - 1));
    std::vector<Symbol>                   e(n * n);
    for (auto& v : e) {
      v = pick(rng);
    }
    return tmca::CayleyTable(digits(n), e);
  }

  // Random Latin square from a cyclic group by independent row, column and
  // symbol permutations (an isotope of Z_n).
  inline tmca::CayleyTable random_isotope(std::mt19937_64& rng, std::size_t n) {
    std::vector<Symbol> p(n), q(n), r(n);
    for (Symbol i = 0; i < n; ++i) {
      p[i] = q[i] = r[i] = i;
    }
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(q.begin(), q.end(), rng);
    std::shuffle(r.begin(), r.end(), rng);
    std::vector<Symbol> e(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        e[a * n + b] = r[(p[a] + q[b]) % n];
      }
    }
    return tmca::CayleyTable(digits(n), e);
  }

  // Uniform random walk of length len on the edge graph.
  inline Word random_walk(std::mt19937_64& rng, tmca::MarkovShift const& s, std::size_t len) {
    Word w;
    w.push_back(std::uniform_int_distribution<Symbol>(0, static_cast<Symbol>(s.size() - 1))(rng));
    while (w.size() < len) {
      auto const& next = s.followers(w.back());
      w.push_back(next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)]);
    }
    return w;
  }

  // Sequence-level compatibility: componentwise products of sampled pairs of
  // walks stay allowed. Shift symbols are matched to table symbols by name.
  inline bool sampled_sc(std::mt19937_64&         rng,
                         tmca::MarkovShift const& s,
                         tmca::CayleyTable const& t,
                         std::size_t              samples,
                         std::size_t              len) {
    for (std::size_t i = 0; i < samples; ++i) {
      auto const x = random_walk(rng, s, len);
      auto const y = random_walk(rng, s, len);
      Word       z;
      for (std::size_t k = 0; k < len; ++k) {
        auto const p = t(t.alphabet().at(s.alphabet().name(x[k])),
                         t.alphabet().at(s.alphabet().name(y[k])));
        auto const q = s.alphabet().find(t.alphabet().name(p));
        if (!q) {
          return false;
        }
        z.push_back(*q);
      }
      if (!allowed(s, z)) {
        return false;
      }
    }
    return true;
  }

  // Random stationary depth-d kernel with positive mass on every follower.
  inline tmca::FiniteMemoryMeasure random_measure(std::mt19937_64&         rng,
                                                  tmca::MarkovShift const& s,
                                                  std::size_t              d) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    auto const states = d == 0 ? std::vector<Word>{Word{}} : tmca::allowed_words(s, d);
    std::vector<std::vector<double>> kernel(states.size(), std::vector<double>(s.size(), 0.0));
    for (std::size_t i = 0; i < states.size(); ++i) {
      double total = 0;
      for (Symbol a = 0; a < s.size(); ++a) {
        bool const ok = d == 0 || s.has_edge(states[i].back(), a);
        if (ok) {
          kernel[i][a] = u(rng);
          total += kernel[i][a];
        }
      }
      for (auto& v : kernel[i]) {
        v /= total;
      }
    }
    return tmca::FiniteMemoryMeasure::from_kernel(s, d, kernel);
  }

}  // namespace oracle
