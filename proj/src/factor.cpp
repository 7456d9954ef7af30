#include "tmca/factor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tmca/error.hpp"

namespace tmca {

  ////////////////////////////////////////////////////////////////////////
  // hmm_code
  ////////////////////////////////////////////////////////////////////////

  HmmCode hmm_code(CayleyTable const& t, StructureMode mode) {
    HmmCode     h;
    h.structure     = right_structure(t, mode);
    auto const& rs  = h.structure;
    auto const  n   = static_cast<Symbol>(t.size());
    auto const  k   = rs.classes.size();
    auto const  nb  = rs.identity_set.size();
    auto const& tn  = t.alphabet();
    auto const& kn  = rs.class_table.alphabet();

    std::vector<Symbol> b_pos(n, no_symbol);
    for (std::size_t i = 0; i < nb; ++i) {
      b_pos[rs.identity_set[i]] = static_cast<Symbol>(i);
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) {
      for (auto e : rs.identity_set) {
        names.push_back("(" + kn.name(static_cast<Symbol>(c)) + "," + tn.name(e)
                        + ")");
      }
    }
    h.product_alphabet = Alphabet(names);

    h.u.assign(n, no_symbol);
    std::vector<Symbol> preimage(k * nb, no_symbol);
    for (Symbol a = 0; a < n; ++a) {
      auto const v = static_cast<Symbol>(rs.class_of[a] * nb + b_pos[rs.idempotent[a]]);
      if (preimage[v] != no_symbol) {
        throw Error(ErrorCode::not_bijective,
                    "u(" + tn.name(preimage[v]) + ") = u(" + tn.name(a)
                        + ") = " + names[v]);
      }
      preimage[v] = a;
      h.u[a]      = v;
    }
    for (std::size_t v = 0; v < preimage.size(); ++v) {
      if (preimage[v] == no_symbol) {
        throw Error(ErrorCode::not_bijective,
                    "u is not onto K x B: nothing maps to " + names[v]);
      }
    }

    std::vector<Symbol> entries(k * nb * k * nb);
    auto const          m = k * nb;
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t y = 0; y < m; ++y) {
        auto const kx = static_cast<Symbol>(x / nb), ky = static_cast<Symbol>(y / nb);
        auto const ey = rs.identity_set[y % nb];
        entries[x * m + y]
            = static_cast<Symbol>(rs.class_table(kx, ky) * nb + b_pos[rs.s_b[ey]]);
      }
    }
    h.product_table = CayleyTable(h.product_alphabet, std::move(entries));
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol c = 0; c < n; ++c) {
        if (h.u[t(a, c)] != h.product_table(h.u[a], h.u[c])) {
          throw Error(ErrorCode::structure_violation,
                      "u(" + tn.name(a) + "•" + tn.name(c) + ") != u(" + tn.name(a)
                          + ")•u(" + tn.name(c) + ")");
        }
      }
    }
    return h;
  }

  ////////////////////////////////////////////////////////////////////////
  // verify_conjugacy
  ////////////////////////////////////////////////////////////////////////

  namespace {
    // Streams all allowed words up to `depth` depth-first, maintaining the
    // images of both compositions position by position, so every word costs
    // a constant number of lookups beyond its prefix.
    class CommutationScan {
     public:
      CommutationScan(BlockCode const& phi_a,
                      BlockCode const& phi_b,
                      BlockCode const& code,
                      BlockCode const* inverse,
                      std::size_t      depth)
          : _a(phi_a),
            _b(phi_b),
            _c(code),
            _inv(inverse),
            _depth(depth),
            _word(depth),
            _phi(depth),
            _code(depth),
            _lhs(depth),
            _rhs(depth) {}

      void run() {
        auto const& shift = _c.source();
        for (Symbol s = 0; s < shift.size(); ++s) {
          visit(0, s);
        }
      }

      std::optional<Word> witness;
      std::string         failure;

     private:
      using Pos = std::ptrdiff_t;

      void fail(std::size_t length, char const* kind) {
        if (!witness || witness->size() > length) {
          witness = Word(_word.begin(), _word.begin() + static_cast<Pos>(length));
          failure = kind;
        }
      }

      // Returns false if the word of length p+1 fails.
      bool step(Pos p) {
        auto span_of = [](std::vector<Symbol> const& v, Pos from, std::size_t len) {
          return std::span<Symbol const>(v.data() + from, len);
        };
        Pos const la = static_cast<Pos>(_a.memory()), ra = static_cast<Pos>(_a.anticipation());
        Pos const lb = static_cast<Pos>(_b.memory()), rb = static_cast<Pos>(_b.anticipation());
        Pos const lc = static_cast<Pos>(_c.memory()), rc = static_cast<Pos>(_c.anticipation());

        if (Pos q = p - ra; q >= la) {
          _phi[q] = _a.at(span_of(_word, q - la, _a.window()));
        }
        if (Pos q = p - rc; q >= lc) {
          _code[q] = _c.at(span_of(_word, q - lc, _c.window()));
          if (q > lc && !_c.target().has_edge(_code[q - 1], _code[q])) {
            fail(static_cast<std::size_t>(p + 1), "image_not_allowed");
            return false;
          }
        }
        if (Pos q = p - ra - rc; q >= la + lc) {
          _lhs[q] = _c.at(span_of(_phi, q - lc, _c.window()));
        }
        if (Pos q = p - rc - rb; q >= lc + lb) {
          auto v = _b.find(span_of(_code, q - lb, _b.window()));
          if (!v) {
            fail(static_cast<std::size_t>(p + 1), "image_not_allowed");
            return false;
          }
          _rhs[q] = *v;
        }
        if (Pos q = p - rc - std::max(ra, rb); q >= lc + std::max(la, lb)) {
          if (_lhs[q] != _rhs[q]) {
            fail(static_cast<std::size_t>(p + 1), "commutation");
            return false;
          }
        }
        if (_inv != nullptr) {
          Pos const li = static_cast<Pos>(_inv->memory());
          Pos const ri = static_cast<Pos>(_inv->anticipation());
          if (Pos q = p - rc - ri; q >= lc + li) {
            auto v = _inv->find(span_of(_code, q - li, _inv->window()));
            if (!v || *v != _word[q]) {
              fail(static_cast<std::size_t>(p + 1), "inverse");
              return false;
            }
          }
        }
        return true;
      }

      void visit(std::size_t p, Symbol s) {
        _word[p] = s;
        if (!step(static_cast<Pos>(p))) {
          return;
        }
        if (p + 1 == _depth || (witness && witness->size() <= p + 1)) {
          return;
        }
        for (auto next : _c.source().followers(s)) {
          visit(p + 1, next);
        }
      }

      BlockCode const&    _a;
      BlockCode const&    _b;
      BlockCode const&    _c;
      BlockCode const*    _inv;
      std::size_t         _depth;
      std::vector<Symbol> _word, _phi, _code, _lhs, _rhs;
    };

    // A vertex on a bi-infinite path of the pair graph with distinct
    // coordinates, i.e. two distinct points with one image.
    std::optional<Word> injectivity_witness(BlockCode const& c) {
      auto const        windows = c.entries();
      auto const        L       = c.window();
      std::map<Word, std::vector<std::size_t>> by_prefix;
      for (std::size_t i = 0; i < windows.size(); ++i) {
        by_prefix[Word(windows[i].first.begin(), windows[i].first.end() - 1)]
            .push_back(i);
      }
      std::vector<std::vector<std::size_t>> succ(windows.size());
      for (std::size_t i = 0; i < windows.size(); ++i) {
        auto const& w = windows[i].first;
        if (L == 1) {
          for (auto f : c.source().followers(w[0])) {
            succ[i].push_back(f);
          }
          continue;
        }
        auto it = by_prefix.find(Word(w.begin() + 1, w.end()));
        if (it != by_prefix.end()) {
          succ[i] = it->second;
        }
      }
      // For 1-windows the entries are indexed by their symbol.
      std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
      std::vector<std::pair<std::size_t, std::size_t>>          vertices;
      for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t j = 0; j < windows.size(); ++j) {
          if (windows[i].second == windows[j].second) {
            index[{i, j}] = vertices.size();
            vertices.emplace_back(i, j);
          }
        }
      }
      std::vector<std::vector<std::size_t>> out(vertices.size());
      std::vector<std::size_t>              indegree(vertices.size(), 0);
      for (std::size_t v = 0; v < vertices.size(); ++v) {
        auto [i, j] = vertices[v];
        for (auto si : succ[i]) {
          for (auto sj : succ[j]) {
            auto it = index.find({si, sj});
            if (it != index.end()) {
              out[v].push_back(it->second);
              ++indegree[it->second];
            }
          }
        }
      }
      std::vector<std::vector<std::size_t>> in(vertices.size());
      for (std::size_t v = 0; v < vertices.size(); ++v) {
        for (auto w : out[v]) {
          in[w].push_back(v);
        }
      }
      std::vector<bool>        alive(vertices.size(), true);
      std::vector<std::size_t> outdegree(vertices.size());
      std::vector<std::size_t> queue;
      for (std::size_t v = 0; v < vertices.size(); ++v) {
        outdegree[v] = out[v].size();
        if (outdegree[v] == 0 || indegree[v] == 0) {
          queue.push_back(v);
          alive[v] = false;
        }
      }
      while (!queue.empty()) {
        auto v = queue.back();
        queue.pop_back();
        for (auto w : out[v]) {
          if (alive[w] && --indegree[w] == 0) {
            alive[w] = false;
            queue.push_back(w);
          }
        }
        for (auto w : in[v]) {
          if (alive[w] && --outdegree[w] == 0) {
            alive[w] = false;
            queue.push_back(w);
          }
        }
      }
      for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (alive[v] && vertices[v].first != vertices[v].second) {
          return windows[vertices[v].first].first;
        }
      }
      return std::nullopt;
    }
  }  // namespace

  ConjugacyCheck verify_conjugacy(CellularAutomaton const& a,
                                  CellularAutomaton const& b,
                                  BlockCode const&         code,
                                  std::size_t              depth,
                                  BlockCode const*         inverse) {
    if (!(code.source() == a.shift()) || !(code.target() == b.shift())) {
      throw Error(ErrorCode::invalid_argument,
                  "code must map the first CA's shift to the second's");
    }
    if (inverse != nullptr
        && (!(inverse->source() == b.shift()) || !(inverse->target() == a.shift()))) {
      throw Error(ErrorCode::invalid_argument,
                  "inverse must map the second CA's shift to the first's");
    }
    if (depth == 0) {
      throw Error(ErrorCode::invalid_argument, "depth must be positive");
    }
    ConjugacyCheck  result;
    result.depth = depth;
    CommutationScan scan(a.code(), b.code(), code, inverse, depth);
    scan.run();
    if (scan.witness) {
      result.failure = scan.failure;
      result.witness = scan.witness;
      return result;
    }
    if (auto w = injectivity_witness(code)) {
      result.failure = "not_injective";
      result.witness = w;
      return result;
    }
    for (std::size_t k = 1; k <= std::min<std::size_t>(depth, 4); ++k) {
      auto const source_len = k + code.window() - 1;
      if (count_allowed_words(code.source(), source_len) > enumeration_cap()) {
        break;
      }
      std::set<Word> images;
      for_each_allowed_word(code.source(), source_len, [&](std::span<Symbol const> w) {
        images.insert(code.apply(w));
      });
      if (images.size() < count_allowed_words(code.target(), k)) {
        result.failure = "not_surjective";
        for_each_allowed_word(code.target(), k, [&](std::span<Symbol const> w) {
          if (!result.witness && images.count(Word(w.begin(), w.end())) == 0) {
            result.witness = Word(w.begin(), w.end());
          }
        });
        return result;
      }
    }
    result.verified = true;
    return result;
  }

  ////////////////////////////////////////////////////////////////////////
  // decompose
  ////////////////////////////////////////////////////////////////////////

  unsigned permutation_period(std::vector<Symbol> const& map,
                              std::vector<Symbol> const& domain) {
    unsigned period = 1;
    for (auto start : domain) {
      unsigned length = 1;
      for (Symbol x = map[start]; x != start; x = map[x]) {
        ++length;
        if (length > map.size()) {
          throw Error(ErrorCode::structure_violation, "map is not a permutation");
        }
      }
      period = std::lcm(period, length);
    }
    return period;
  }

  unsigned right_multiplication_exponent(CayleyTable const& t) {
    auto const n = static_cast<Symbol>(t.size());
    unsigned   l = 1;
    for (Symbol a = 0; a < n; ++a) {
      std::vector<Symbol> map(n);
      std::vector<bool>   hit(n, false);
      for (Symbol c = 0; c < n; ++c) {
        map[c] = t(c, a);
        if (hit[map[c]]) {
          throw Error(ErrorCode::structure_violation,
                      "right multiplication by " + t.alphabet().name(a)
                          + " is not a permutation");
        }
        hit[map[c]] = true;
      }
      std::vector<Symbol> all(n);
      std::iota(all.begin(), all.end(), Symbol{0});
      l = std::lcm(l, permutation_period(map, all));
    }
    return l;
  }

  namespace {
    [[noreturn]] void hypothesis(std::string const& message) {
      throw Error(ErrorCode::hypothesis_failed, message);
    }

    std::optional<Symbol> two_sided_identity(CayleyTable const& t) {
      auto const n = static_cast<Symbol>(t.size());
      for (Symbol z = 0; z < n; ++z) {
        bool ok = true;
        for (Symbol x = 0; x < n && ok; ++x) {
          ok = t(z, x) == x && t(x, z) == x;
        }
        if (ok) {
          return z;
        }
      }
      return std::nullopt;
    }
  }  // namespace

  DecompositionCertificate decompose(CellularAutomaton const& ca,
                                     StructureMode            mode,
                                     DecomposeOptions const&  options) {
    if (!ca.table()) {
      hypothesis("decomposition needs a CA given by a Cayley table");
    }
    if (!ca.flags().structurally_compatible) {
      hypothesis("CA is not structurally compatible");
    }
    if (!ca.flags().right_permutative) {
      hypothesis("CA is not right-permutative");
    }
    DecompositionCertificate cert;
    cert.mode = mode;

    if (mode == StructureMode::n_scaling) {
      auto const ext  = ca.extension();
      auto const size = ext.shift().size();
      std::vector<std::size_t> candidates;
      if (options.scaling_n) {
        candidates.push_back(*options.scaling_n);
      } else {
        for (std::size_t n = 2; n <= options.max_scaling; ++n) {
          candidates.push_back(n);
        }
      }
      for (auto n : candidates) {
        double const words = std::pow(static_cast<double>(size), static_cast<double>(n + 1));
        if (words > static_cast<double>(enumeration_cap())) {
          break;
        }
        if (check_n_scaling(ext, n).holds) {
          cert.scaling_n = n;
          break;
        }
      }
      if (!cert.scaling_n) {
        hypothesis("the full-shift extension is not N-scaling for any tested N");
      }
    }

    try {
      cert.hmm = hmm_code(*ca.table(), mode);
    } catch (Error const& e) {
      hypothesis(std::string(to_string(e.code())) + ": " + e.what());
    }
    auto const& h     = cert.hmm;
    auto const& rs    = h.structure;
    auto const& shift = ca.shift();
    auto const  nb    = rs.identity_set.size();

    std::vector<Edge> lambda_edges, k_edges, b_edges;
    std::vector<Symbol> b_pos(shift.size(), no_symbol);
    for (std::size_t i = 0; i < nb; ++i) {
      b_pos[rs.identity_set[i]] = static_cast<Symbol>(i);
    }
    for (auto const& [x, y] : shift.edges()) {
      lambda_edges.emplace_back(h.u[x], h.u[y]);
      k_edges.emplace_back(static_cast<Symbol>(rs.class_of[x]),
                           static_cast<Symbol>(rs.class_of[y]));
      b_edges.emplace_back(b_pos[rs.idempotent[x]], b_pos[rs.idempotent[y]]);
    }
    cert.lambda = MarkovShift::from_edges(h.product_alphabet, lambda_edges);
    cert.k_shift = MarkovShift::from_edges(rs.class_table.alphabet(), k_edges);
    std::vector<std::string> b_names;
    for (auto e : rs.identity_set) {
      b_names.push_back(shift.alphabet().name(e));
    }
    Alphabet const b_alphabet(b_names);
    cert.b_shift = MarkovShift::from_edges(b_alphabet, b_edges);

    std::vector<Symbol> inverse(h.u.size());
    for (Symbol a = 0; a < h.u.size(); ++a) {
      inverse[h.u[a]] = a;
    }
    cert.u_code    = BlockCode::from_symbol_map(shift, cert.lambda, h.u);
    cert.u_inverse = BlockCode::from_symbol_map(cert.lambda, shift, inverse);

    cert.class_ca = CellularAutomaton::from_table(cert.k_shift, rs.class_table, false);
    std::vector<Symbol> translation(nb * nb);
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = 0; j < nb; ++j) {
        translation[i * nb + j] = b_pos[rs.s_b[rs.identity_set[j]]];
      }
    }
    cert.translation = CellularAutomaton::from_table(
        cert.b_shift, CayleyTable(b_alphabet, std::move(translation)), false);
    cert.product_ca
        = CellularAutomaton::from_table(cert.lambda, h.product_table, false);

    cert.product_verified = true;
    auto const& kn        = cert.k_shift.alphabet();
    auto const& bn        = cert.b_shift.alphabet();
    auto const& ln        = cert.lambda.alphabet();
    for (auto const& ke : cert.k_shift.edges()) {
      for (auto const& be : cert.b_shift.edges()) {
        auto const x = ln.find("(" + kn.name(ke.first) + "," + bn.name(be.first) + ")");
        auto const y
            = ln.find("(" + kn.name(ke.second) + "," + bn.name(be.second) + ")");
        if (!x || !y || !cert.lambda.has_edge(*x, *y)) {
          cert.product_verified = false;
          cert.missing_edge     = {ke, be};
          if (!options.allow_product_failure) {
            throw Error(ErrorCode::product_failed,
                        "edge ((" + kn.name(ke.first) + "," + bn.name(be.first)
                            + "),(" + kn.name(ke.second) + ","
                            + bn.name(be.second) + ")) of K x B is missing from the image shift");
          }
          break;
        }
      }
      if (!cert.product_verified) {
        break;
      }
    }

    cert.period_m   = permutation_period(rs.s_b, rs.identity_set);
    cert.exponent_l = right_multiplication_exponent(rs.class_table);
    if (auto z = two_sided_identity(rs.class_table);
        z && is_abelian_group(rs.class_table, *z)) {
      cert.class_identity      = z;
      cert.class_group_factors = abelian_primary_factors(rs.class_table, *z);
    }
    cert.conjugacy = verify_conjugacy(
        ca, cert.product_ca, cert.u_code, options.depth, &cert.u_inverse);
    return cert;
  }

  ////////////////////////////////////////////////////////////////////////
  // search_conjugacy
  ////////////////////////////////////////////////////////////////////////

  namespace {
    class SearchBudget {
     public:
      explicit SearchBudget(std::uint64_t limit) : _limit(limit) {}
      void tick() {
        if (++_used > _limit) {
          throw Error(ErrorCode::search_exceeded,
                      "conjugacy search exceeded its budget of "
                          + std::to_string(_limit) + " nodes");
        }
      }

     private:
      std::uint64_t _limit;
      std::uint64_t _used = 0;
    };

    std::optional<BlockCode> search_symbol_maps(CellularAutomaton const& a,
                                                CellularAutomaton const& b,
                                                SearchBudget&            budget) {
      auto const& sa = a.shift();
      auto const& sb = b.shift();
      auto const  n  = static_cast<Symbol>(sa.size());
      if (sb.size() != n || sb.edges().size() != sa.edges().size()) {
        return std::nullopt;
      }
      auto const& ca = a.code();
      auto const& cb = b.code();
      bool const  radius_one = ca.memory() == 0 && ca.anticipation() == 1
                              && cb.memory() == 0 && cb.anticipation() == 1;
      std::vector<Symbol> theta(n, no_symbol);
      std::vector<bool>   used(n, false);

      auto consistent = [&](Symbol s) {
        for (Symbol t = 0; t <= s; ++t) {
          if (sa.has_edge(t, s) != sb.has_edge(theta[t], theta[s])
              || sa.has_edge(s, t) != sb.has_edge(theta[s], theta[t])) {
            return false;
          }
        }
        if (!radius_one) {
          return true;
        }
        for (auto const& [x, y] : sa.edges()) {
          Symbol const w[2] = {x, y};
          Symbol const z    = ca.at(w);
          if (x > s || y > s || z > s || (x != s && y != s && z != s)) {
            continue;
          }
          Symbol const img[2] = {theta[x], theta[y]};
          auto const   v      = cb.find(img);
          if (!v || *v != theta[z]) {
            return false;
          }
        }
        return true;
      };

      std::optional<BlockCode> found;
      auto                     rec = [&](auto& self, Symbol s) -> void {
        if (s == n) {
          auto code  = BlockCode::from_symbol_map(sa, sb, theta);
          auto check = verify_conjugacy(a, b, code, 2 * 1 + 4);
          if (check.verified) {
            found = std::move(code);
          }
          return;
        }
        for (Symbol v = 0; v < n && !found; ++v) {
          if (used[v]) {
            continue;
          }
          budget.tick();
          theta[s] = v;
          if (consistent(s)) {
            used[v] = true;
            self(self, s + 1);
            used[v] = false;
          }
          theta[s] = no_symbol;
        }
      };
      rec(rec, 0);
      return found;
    }

    std::optional<BlockCode> search_window_maps(CellularAutomaton const& a,
                                                CellularAutomaton const& b,
                                                SearchBudget&            budget) {
      auto const& sa      = a.shift();
      auto const& sb      = b.shift();
      auto const& windows = sa.edges();
      std::map<Edge, std::size_t> index;
      for (std::size_t i = 0; i < windows.size(); ++i) {
        index[windows[i]] = i;
      }
      std::vector<Symbol> theta(windows.size(), no_symbol);
      auto                consistent = [&](std::size_t i) {
        auto const [y, z] = windows[i];
        for (auto x : sa.predecessors(y)) {
          auto j = index.at({x, y});
          if (j < i && !sb.has_edge(theta[j], theta[i])) {
            return false;
          }
        }
        for (auto w : sa.followers(z)) {
          auto j = index.at({z, w});
          if (j <= i && !sb.has_edge(theta[i], theta[j])) {
            return false;
          }
        }
        return true;
      };
      std::optional<BlockCode> found;
      auto                     rec = [&](auto& self, std::size_t i) -> void {
        if (i == windows.size()) {
          auto code = BlockCode(sa, sb, 1, 0, [&](std::span<Symbol const> w) {
            return theta[index.at({w[0], w[1]})];
          });
          if (verify_conjugacy(a, b, code, 2 * 2 + 4).verified) {
            found = std::move(code);
          }
          return;
        }
        for (Symbol v = 0; v < sb.size() && !found; ++v) {
          budget.tick();
          theta[i] = v;
          if (consistent(i)) {
            self(self, i + 1);
          }
        }
        theta[i] = no_symbol;
      };
      rec(rec, 0);
      return found;
    }
  }  // namespace

  std::optional<BlockCode> search_conjugacy(CellularAutomaton const& a,
                                            CellularAutomaton const& b,
                                            std::size_t              max_window,
                                            std::uint64_t            budget) {
    if (a.shift().size() > 12 || b.shift().size() > 12) {
      throw Error(ErrorCode::invalid_argument,
                  "conjugacy search supports alphabets of at most 12 symbols");
    }
    if (max_window == 0 || max_window > 3) {
      throw Error(ErrorCode::invalid_argument, "max_window must be in 1..3");
    }
    // Entropy is a conjugacy invariant.
    if (std::abs(spectral_radius(a.shift()) - spectral_radius(b.shift())) > 1e-9) {
      return std::nullopt;
    }
    SearchBudget counter(budget);
    if (auto code = search_symbol_maps(a, b, counter)) {
      return code;
    }
    if (max_window >= 2) {
      return search_window_maps(a, b, counter);
    }
    return std::nullopt;
  }

}  // namespace tmca
