#include "tmca/algebra.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "tmca/error.hpp"

namespace tmca {

  ////////////////////////////////////////////////////////////////////////
  // CayleyTable
  ////////////////////////////////////////////////////////////////////////

  CayleyTable::CayleyTable(Alphabet alphabet, std::vector<Symbol> entries)
      : _alphabet(std::move(alphabet)), _entries(std::move(entries)) {
    auto const n = _alphabet.size();
    if (_entries.size() != n * n) {
      throw Error(ErrorCode::schema,
                  "table must have " + std::to_string(n * n) + " entries");
    }
    for (auto v : _entries) {
      if (v >= n) {
        throw Error(ErrorCode::unknown_symbol, "table entry out of range");
      }
    }
  }

  CayleyTable
  CayleyTable::from_names(Alphabet const&                              alphabet,
                          std::vector<std::vector<std::string>> const& rows) {
    auto const n = alphabet.size();
    if (rows.size() != n) {
      throw Error(ErrorCode::schema,
                  "table: expected " + std::to_string(n) + " rows, got "
                      + std::to_string(rows.size()));
    }
    std::vector<Symbol> entries;
    entries.reserve(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      if (rows[a].size() != n) {
        throw Error(ErrorCode::schema,
                    "table: row " + alphabet.name(static_cast<Symbol>(a))
                        + " has " + std::to_string(rows[a].size())
                        + " entries, expected " + std::to_string(n));
      }
      for (auto const& name : rows[a]) {
        entries.push_back(alphabet.at(name));
      }
    }
    return CayleyTable(alphabet, std::move(entries));
  }

  std::vector<std::vector<std::string>> CayleyTable::rows() const {
    std::vector<std::vector<std::string>> out(size());
    for (Symbol a = 0; a < size(); ++a) {
      for (Symbol b = 0; b < size(); ++b) {
        out[a].push_back(_alphabet.name((*this)(a, b)));
      }
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // classify_table
  ////////////////////////////////////////////////////////////////////////

  namespace {
    void fail(Property& p, Word witness) {
      if (p.holds) {
        p.holds   = false;
        p.witness = std::move(witness);
      }
    }
  }  // namespace

  AlgebraReport classify_table(CayleyTable const& t) {
    auto const    n = static_cast<Symbol>(t.size());
    AlgebraReport r;
    for (Symbol a = 0; a < n && r.left_cancellable.holds; ++a) {
      for (Symbol b = a + 1; b < n && r.left_cancellable.holds; ++b) {
        for (Symbol c = 0; c < n; ++c) {
          if (t(a, c) == t(b, c)) {
            fail(r.left_cancellable, {a, b, c});
            break;
          }
        }
      }
    }
    for (Symbol c = 0; c < n && r.right_cancellable.holds; ++c) {
      for (Symbol a = 0; a < n && r.right_cancellable.holds; ++a) {
        for (Symbol b = a + 1; b < n; ++b) {
          if (t(c, a) == t(c, b)) {
            fail(r.right_cancellable, {c, a, b});
            break;
          }
        }
      }
    }
    if (!r.left_cancellable.holds) {
      fail(r.quasigroup, r.left_cancellable.witness);
    } else if (!r.right_cancellable.holds) {
      fail(r.quasigroup, r.right_cancellable.witness);
    }
    for (Symbol a = 0; a < n && r.commutative.holds; ++a) {
      for (Symbol b = a + 1; b < n; ++b) {
        if (t(a, b) != t(b, a)) {
          fail(r.commutative, {a, b});
          break;
        }
      }
    }
    for (Symbol a = 0; a < n && r.associative.holds; ++a) {
      for (Symbol b = 0; b < n && r.associative.holds; ++b) {
        for (Symbol c = 0; c < n; ++c) {
          if (t(t(a, b), c) != t(a, t(b, c))) {
            fail(r.associative, {a, b, c});
            break;
          }
        }
      }
    }
    for (Symbol a = 0; a < n && r.medial.holds; ++a) {
      for (Symbol b = 0; b < n && r.medial.holds; ++b) {
        for (Symbol c = 0; c < n && r.medial.holds; ++c) {
          auto const ab = t(a, b), ac = t(a, c);
          for (Symbol d = 0; d < n; ++d) {
            if (t(ab, t(c, d)) != t(ac, t(b, d))) {
              fail(r.medial, {a, b, c, d});
              break;
            }
          }
        }
      }
    }
    return r;
  }

  ////////////////////////////////////////////////////////////////////////
  // find_psi
  ////////////////////////////////////////////////////////////////////////

  PsiResult find_psi(CayleyTable const& t) {
    auto const          n = static_cast<Symbol>(t.size());
    PsiResult           result;
    std::vector<Symbol> forced(n, no_symbol);
    std::vector<Word>   source(n);
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol b = 0; b < n; ++b) {
        for (Symbol c = 0; c < n; ++c) {
          auto const inner = t(a, t(b, c));
          auto const outer = t(t(a, b), c);
          if (forced[inner] == no_symbol) {
            forced[inner] = outer;
            source[inner] = {a, b, c};
          } else if (forced[inner] != outer) {
            auto const& s     = source[inner];
            result.diagnostic = "not psi-associative: a•(b•c) = "
                                + t.alphabet().name(inner)
                                + " for two triples with different (a•b)•c";
            result.witness    = {s[0], s[1], s[2], a, b, c};
            return result;
          }
        }
      }
    }
    std::vector<bool> used(n, false);
    for (Symbol v = 0; v < n; ++v) {
      if (forced[v] == no_symbol) {
        continue;
      }
      if (used[forced[v]]) {
        auto const other
            = static_cast<Symbol>(std::find(forced.begin(), forced.end(), forced[v])
                                  - forced.begin());
        result.diagnostic = "NotPermutative: forced map sends "
                            + t.alphabet().name(other) + " and "
                            + t.alphabet().name(v) + " to "
                            + t.alphabet().name(forced[v]);
        result.witness = {other, v};
        return result;
      }
      used[forced[v]] = true;
    }
    Symbol next = 0;
    for (Symbol v = 0; v < n; ++v) {
      if (forced[v] != no_symbol) {
        continue;
      }
      result.unique = false;
      while (used[next]) {
        ++next;
      }
      forced[v]  = next;
      used[next] = true;
    }
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol b = 0; b < n; ++b) {
        for (Symbol c = 0; c < n; ++c) {
          if (t(t(a, b), c) != forced[t(a, t(b, c))]) {
            result.diagnostic = "psi verification failed";
            result.witness    = {a, b, c};
            return result;
          }
        }
      }
    }
    result.psi = std::move(forced);
    return result;
  }

  ////////////////////////////////////////////////////////////////////////
  // Abelian groups and Toyoda
  ////////////////////////////////////////////////////////////////////////

  bool is_abelian_group(CayleyTable const& g, Symbol zero) {
    auto const n = static_cast<Symbol>(g.size());
    if (zero >= n) {
      return false;
    }
    for (Symbol a = 0; a < n; ++a) {
      if (g(zero, a) != a || g(a, zero) != a) {
        return false;
      }
      bool has_inverse = false;
      for (Symbol b = 0; b < n; ++b) {
        if (g(a, b) != g(b, a)) {
          return false;
        }
        has_inverse = has_inverse || g(a, b) == zero;
        for (Symbol c = 0; c < n; ++c) {
          if (g(g(a, b), c) != g(a, g(b, c))) {
            return false;
          }
        }
      }
      if (!has_inverse) {
        return false;
      }
    }
    return true;
  }

  std::vector<unsigned> abelian_primary_factors(CayleyTable const& g,
                                                Symbol             zero) {
    auto const            n = static_cast<Symbol>(g.size());
    std::vector<unsigned> order(n, 1);
    for (Symbol a = 0; a < n; ++a) {
      Symbol x = a;
      while (x != zero) {
        x = g(x, a);
        ++order[a];
      }
    }
    std::vector<unsigned> factors;
    unsigned              rest = n;
    for (unsigned p = 2; rest > 1; ++p) {
      if (rest % p != 0) {
        continue;
      }
      unsigned part = 1;
      while (rest % p == 0) {
        rest /= p;
        part *= p;
      }
      // rank[k] = number of cyclic p-factors of order at least p^k.
      std::vector<unsigned> rank{0};
      unsigned              power = 1;
      unsigned              below = 1;
      while (below < part) {
        power *= p;
        unsigned count = 0;
        for (Symbol a = 0; a < n; ++a) {
          count += power % order[a] == 0 ? 1 : 0;
        }
        unsigned t = 0;
        for (unsigned q = count / below; q > 1; q /= p) {
          ++t;
        }
        rank.push_back(t);
        below = count;
      }
      rank.push_back(0);
      unsigned pk = 1;
      for (std::size_t k = 1; k + 1 < rank.size(); ++k) {
        pk *= p;
        for (unsigned i = rank[k + 1]; i < rank[k]; ++i) {
          factors.push_back(pk);
        }
      }
    }
    return factors;
  }

  ToyodaResult toyoda_decompose(CayleyTable const& t) {
    ToyodaResult result;
    auto const   report = classify_table(t);
    if (!report.quasigroup.holds) {
      result.reason = "not a quasigroup";
      return result;
    }
    if (!report.medial.holds) {
      result.reason = "not medial";
      return result;
    }
    auto const          n     = static_cast<Symbol>(t.size());
    Symbol const        pivot = 0;
    std::vector<Symbol> left_div(n), right_div(n);
    for (Symbol x = 0; x < n; ++x) {
      left_div[t(pivot, x)]  = x;  // pivot \ y
      right_div[t(x, pivot)] = x;  // y / pivot
    }
    std::vector<Symbol> sum(static_cast<std::size_t>(n) * n);
    for (Symbol x = 0; x < n; ++x) {
      for (Symbol y = 0; y < n; ++y) {
        sum[x * n + y] = t(right_div[x], left_div[y]);
      }
    }
    ToyodaDecomposition d;
    d.group = CayleyTable(t.alphabet(), std::move(sum));
    d.zero  = t(pivot, pivot);
    if (!is_abelian_group(d.group, d.zero)) {
      result.reason = "derived operation is not an abelian group";
      return result;
    }
    auto const&         g = d.group;
    std::vector<Symbol> negate(n);
    for (Symbol x = 0; x < n; ++x) {
      for (Symbol y = 0; y < n; ++y) {
        if (g(x, y) == d.zero) {
          negate[x] = y;
        }
      }
    }
    d.constant = t(d.zero, d.zero);
    d.eta.resize(n);
    d.rho.resize(n);
    for (Symbol x = 0; x < n; ++x) {
      d.eta[x] = g(t(x, d.zero), negate[d.constant]);
      d.rho[x] = g(t(d.zero, x), negate[d.constant]);
    }
    for (auto const* map : {&d.eta, &d.rho}) {
      std::vector<Symbol> sorted = *map;
      std::sort(sorted.begin(), sorted.end());
      for (Symbol x = 0; x < n; ++x) {
        if (sorted[x] != x) {
          result.reason = "derived map is not a permutation";
          return result;
        }
      }
      for (Symbol x = 0; x < n; ++x) {
        for (Symbol y = 0; y < n; ++y) {
          if ((*map)[g(x, y)] != g((*map)[x], (*map)[y])) {
            result.reason = "derived map is not an automorphism";
            return result;
          }
        }
      }
    }
    for (Symbol x = 0; x < n; ++x) {
      if (d.eta[d.rho[x]] != d.rho[d.eta[x]]) {
        result.reason = "eta and rho do not commute";
        return result;
      }
      for (Symbol y = 0; y < n; ++y) {
        if (g(g(d.eta[x], d.rho[y]), d.constant) != t(x, y)) {
          result.reason = "reconstruction failed";
          return result;
        }
      }
    }
    d.primary_factors     = abelian_primary_factors(d.group, d.zero);
    result.decomposition = std::move(d);
    return result;
  }

  ////////////////////////////////////////////////////////////////////////
  // right_structure
  ////////////////////////////////////////////////////////////////////////

  namespace {
    [[noreturn]] void violation(std::string const& message) {
      throw Error(ErrorCode::structure_violation, message);
    }

    std::string class_name(Alphabet const& a, std::vector<Symbol> const& members) {
      if (members.size() == 1) {
        return a.name(members.front());
      }
      std::string name = "{";
      for (std::size_t i = 0; i < members.size(); ++i) {
        name += (i == 0 ? "" : ",") + a.name(members[i]);
      }
      return name + "}";
    }
  }  // namespace

  RightStructure right_structure(CayleyTable const& t, StructureMode mode) {
    auto const  n     = static_cast<Symbol>(t.size());
    auto const& names = t.alphabet();
    auto        nm    = [&](Symbol s) { return names.name(s); };

    auto const report = classify_table(t);
    if (!report.right_cancellable.holds) {
      auto const& w = report.right_cancellable.witness;
      violation("not right-cancellable: " + nm(w[0]) + "•" + nm(w[1]) + " = "
                + nm(w[0]) + "•" + nm(w[2]));
    }

    RightStructure rs;
    rs.mode = mode;
    rs.class_of.assign(n, 0);
    std::map<std::vector<Symbol>, std::size_t> by_row;
    for (Symbol a = 0; a < n; ++a) {
      std::vector<Symbol> row(t.entries().begin() + a * n,
                              t.entries().begin() + (a + 1) * n);
      auto [it, inserted] = by_row.emplace(std::move(row), rs.classes.size());
      if (inserted) {
        rs.classes.emplace_back();
      }
      rs.classes[it->second].push_back(a);
      rs.class_of[a] = it->second;
    }

    auto const               k = rs.classes.size();
    std::vector<std::string> class_names;
    for (auto const& c : rs.classes) {
      class_names.push_back(class_name(names, c));
    }
    std::vector<Symbol> class_entries(k * k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        class_entries[i * k + j] = static_cast<Symbol>(
            rs.class_of[t(rs.classes[i].front(), rs.classes[j].front())]);
      }
    }
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol b = 0; b < n; ++b) {
        if (rs.class_of[t(a, b)]
            != class_entries[rs.class_of[a] * k + rs.class_of[b]]) {
          violation("class operation ill defined at " + nm(a) + "•" + nm(b));
        }
      }
    }
    rs.class_table = CayleyTable(Alphabet(class_names), std::move(class_entries));

    rs.idempotent.assign(n, no_symbol);
    if (mode == StructureMode::psi_associative) {
      auto psi = find_psi(t);
      if (!psi.psi) {
        violation("not psi-associative: " + psi.diagnostic);
      }
      rs.psi = std::move(psi.psi);
      for (Symbol a = 0; a < n; ++a) {
        for (Symbol e = 0; e < n; ++e) {
          if (t(a, e) == a) {
            rs.idempotent[a] = e;
            break;
          }
        }
        if (rs.idempotent[a] == no_symbol) {
          violation("no e with " + nm(a) + "•e = " + nm(a));
        }
      }
    } else {
      std::vector<bool> candidate(n, false);
      for (std::size_t i = 0; i < k; ++i) {
        if (rs.class_table(static_cast<Symbol>(i), static_cast<Symbol>(i)) == i) {
          for (auto s : rs.classes[i]) {
            candidate[s] = true;
          }
        }
      }
      for (Symbol a = 0; a < n; ++a) {
        std::set<Symbol> hits;
        for (Symbol x = 0; x < n; ++x) {
          if (candidate[t(x, a)]) {
            hits.insert(t(x, a));
          }
        }
        if (hits.size() != 1) {
          violation("e_" + nm(a) + " is not unique: "
                    + std::to_string(hits.size())
                    + " idempotent-class values in column " + nm(a));
        }
        rs.idempotent[a] = *hits.begin();
      }
    }

    std::set<Symbol> b_set(rs.idempotent.begin(), rs.idempotent.end());
    rs.identity_set.assign(b_set.begin(), b_set.end());
    rs.s_b.assign(n, no_symbol);
    for (auto e1 : rs.identity_set) {
      auto const value = t(rs.identity_set.front(), e1);
      for (auto e2 : rs.identity_set) {
        if (t(e2, e1) != value) {
          violation("s_B(" + nm(e1) + ") depends on the multiplier: "
                    + nm(rs.identity_set.front()) + " vs " + nm(e2));
        }
      }
      if (b_set.count(value) == 0) {
        violation("s_B(" + nm(e1) + ") = " + nm(value) + " lies outside B");
      }
      rs.s_b[e1] = value;
    }
    std::set<Symbol> image;
    for (auto e : rs.identity_set) {
      image.insert(rs.s_b[e]);
    }
    if (image.size() != rs.identity_set.size()) {
      violation("s_B is not a permutation of B");
    }
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol b = 0; b < n; ++b) {
        if (rs.idempotent[t(a, b)] != rs.s_b[rs.idempotent[b]]) {
          violation("e_(" + nm(a) + "•" + nm(b) + ") != s_B(e_" + nm(b) + ")");
        }
      }
    }
    return rs;
  }

  ////////////////////////////////////////////////////////////////////////
  // Closure and restriction
  ////////////////////////////////////////////////////////////////////////

  MarkovShift sc_closure(CayleyTable const& t, std::vector<Edge> const& seed) {
    auto const        n = t.size();
    std::vector<bool> present(n * n, false);
    std::vector<Edge> edges;
    auto              add = [&](Edge e) {
      if (e.first >= n || e.second >= n) {
        throw Error(ErrorCode::unknown_symbol, "seed edge out of range");
      }
      if (!present[e.first * n + e.second]) {
        present[e.first * n + e.second] = true;
        edges.push_back(e);
      }
    };
    for (auto const& e : seed) {
      add(e);
    }
    // Every edge is combined with every edge at or before it, both orders.
    for (std::size_t i = 0; i < edges.size(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        auto const x = edges[i], y = edges[j];
        add({t(x.first, y.first), t(x.second, y.second)});
        add({t(y.first, x.first), t(y.second, x.second)});
      }
    }
    return MarkovShift::from_edges(t.alphabet(), edges);
  }

  CayleyTable restrict_table(CayleyTable const&         t,
                             std::vector<Symbol> const& symbols) {
    std::vector<Symbol> position(t.size(), no_symbol);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      position[symbols[i]] = static_cast<Symbol>(i);
      names.push_back(t.alphabet().name(symbols[i]));
    }
    std::vector<Symbol> entries;
    for (auto a : symbols) {
      for (auto b : symbols) {
        auto const v = t(a, b);
        if (position[v] == no_symbol) {
          throw Error(ErrorCode::not_closed,
                      t.alphabet().name(a) + "•" + t.alphabet().name(b) + " = "
                          + t.alphabet().name(v)
                          + " leaves the shift's alphabet");
        }
        entries.push_back(position[v]);
      }
    }
    return CayleyTable(Alphabet(std::move(names)), std::move(entries));
  }

}  // namespace tmca
