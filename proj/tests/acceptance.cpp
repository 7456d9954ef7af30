// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "tmca/cesaro.hpp"
#include "tmca/cli.hpp"
#include "tmca/factor.hpp"
#include "tmca/fixtures.hpp"

using namespace tmca;
using nlohmann::json;

namespace {

  struct Outcome {
    bool        pass = false;
    std::string detail;
  };

  json cli_json(std::vector<std::string> args) {
    std::ostringstream out, err;
    if (run_cli(std::move(args), out, err) != exit_ok) {
      throw std::runtime_error("cli failed: " + err.str());
    }
    return json::parse(out.str());
  }

  std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  MarkovShift full2() {
    return MarkovShift::full(oracle::digits(2));
  }
  MarkovShift golden() {
    return MarkovShift::from_edges(oracle::digits(2), {{0, 0}, {0, 1}, {1, 0}});
  }
  CellularAutomaton xor_ca() {
    return CellularAutomaton::from_table(full2(), oracle::cyclic_sum(2));
  }
  FiniteMemoryMeasure bern03() {
    return FiniteMemoryMeasure::bernoulli(full2(), {0.7, 0.3});
  }

  Outcome fixture_classification() {
    auto const c12 = cli_json({"algebra", "classify", "--fixture", std::string(fixture_latin_12)});
    auto const c8  = cli_json({"algebra", "classify", "--fixture", std::string(fixture_table_8)});
    auto const p8  = cli_json({"algebra", "psi", "--fixture", std::string(fixture_table_8)});
    bool const ok  = c12["quasigroup"] == true && c12["medial"] == true
                    && c8["right_cancellable"] == true && c8["left_cancellable"] == false
                    && c8["psi_associative"] == true && p8["cycles"] == "(ab)(cd)(ef)(gh)";
    return {ok, "psi " + p8["cycles"].get<std::string>()};
  }

  Outcome toyoda_round_trip() {
    auto const t = *fixture_table(fixture_latin_12);
    auto const r = toyoda_decompose(t);
    if (!r.decomposition) {
      return {false, "no decomposition: " + r.reason};
    }
    auto const& d = *r.decomposition;
    // Reconstruct every entry from eta(a) + rho(b) + c here.
    std::size_t matched = 0;
    for (Symbol a = 0; a < t.size(); ++a) {
      for (Symbol b = 0; b < t.size(); ++b) {
        matched += d.group(d.group(d.eta[a], d.rho[b]), d.constant) == t(a, b);
      }
    }
    bool commute = true;
    for (Symbol x = 0; x < t.size(); ++x) {
      commute = commute && d.eta[d.rho[x]] == d.rho[d.eta[x]];
    }
    return {matched == 144 && commute,
            std::to_string(matched) + "/144 entries, eta rho commute " + (commute ? "yes" : "no")};
  }

  Outcome decomposition_pipeline() {
    auto const t    = *fixture_table(fixture_table_8);
    auto const ca   = CellularAutomaton::from_table(MarkovShift::full(t.alphabet()), t);
    auto const cert = decompose(ca, StructureMode::psi_associative);
    auto const& rs  = cert.hmm.structure;
    bool const klein = cert.class_identity && is_abelian_group(rs.class_table, *cert.class_identity)
                       && cert.class_group_factors == std::vector<unsigned>{2, 2};
    std::vector<std::string> b_names;
    for (auto e : rs.identity_set) {
      b_names.push_back(t.alphabet().name(e));
    }
    bool const b_ok  = b_names == std::vector<std::string>{"a", "b"};
    bool const cycle = rs.s_b[rs.identity_set[0]] == rs.identity_set[1]
                       && rs.s_b[rs.identity_set[1]] == rs.identity_set[0];
    auto const check = verify_conjugacy(ca, cert.product_ca, cert.u_code, 8, &cert.u_inverse);
    bool const ok    = rs.classes.size() == 4 && klein && b_ok && cycle && cert.period_m == 2
                    && cert.product_verified && check.verified && check.depth == 8;
    return {ok, "|K|=" + std::to_string(rs.classes.size()) + " M=" + std::to_string(cert.period_m)
                    + " conjugacy depth " + std::to_string(check.depth)};
  }

  Outcome n_scaling() {
    auto const x     = xor_ca();
    auto const two   = check_n_scaling(x, 2);
    auto const four  = check_n_scaling(x, 4);
    auto const three = check_n_scaling(x, 3);
    bool       refuted = false;
    std::string witness;
    if (!three.holds && three.witness) {
      auto const&             w    = *three.witness;
      oracle::LocalRule const rule = [](std::span<Symbol const> v) { return v[0] ^ v[1]; };
      auto const y = oracle::apply(rule, 2, oracle::apply(rule, 2, oracle::apply(rule, 2, w)));
      refuted      = y.size() == 1 && y[0] != (w[0] ^ w[3]);
      witness      = full2().alphabet().format(w);
    }
    return {two.holds && four.holds && refuted, "3-scaling witness " + witness};
  }

  Outcome parry_correctness() {
    auto const g   = parry_measure(golden());
    auto const phi = std::numbers::phi;
    double const err = std::max({std::abs(g.kernel()[0][0] - 1 / phi),
                                 std::abs(g.kernel()[0][1] - 1 / (phi * phi)),
                                 std::abs(g.kernel()[1][0] - 1)});
    double const h   = measure_entropy(g);
    auto const   rep = shift_report(golden(), 2);
    auto const   inv = check_invariance(g, shift_ca(golden()).code(), 5, 1e-12);
    bool const   ok  = err <= 1e-9 && std::abs(h - rep.entropy) <= 1e-9
                    && std::abs(h - std::log(phi)) <= 1e-9 && std::abs(h - 0.481212) < 1e-6
                    && inv.invariant;
    return {ok, "kernel err " + fmt(err) + ", entropy " + std::to_string(h) + ", sigma dev "
                    + fmt(inv.max_deviation)};
  }

  CesaroReport const& criterion6_report() {
    static CesaroReport const r = cesaro_exact(bern03(), xor_ca(), {Word{0}, Word{1}}, 64);
    return r;
  }

  Outcome cesaro_convergence() {
    auto const& r   = criterion6_report();
    auto const  cmp = compare_to_parry(r, full2(), 0.02);
    double      worst = 0;
    for (std::size_t n = 0; n <= 16; ++n) {
      worst = std::max(worst, std::abs(r.series[1].values[n] - oracle::xor_closed_form(n)));
    }
    bool const ok = r.engine == "affine" && cmp.final_deviation <= 0.02 && worst <= 1e-12;
    return {ok, "deviation " + fmt(cmp.final_deviation) + " (" + std::string(to_string(cmp.verdict))
                    + "), oracle err " + fmt(worst)};
  }

  Outcome cross_engine() {
    auto const& exact = criterion6_report();
    CesaroOptions opt;
    opt.mode    = CesaroMode::monte_carlo;
    opt.samples = 100'000;
    opt.seed    = 1;
    auto const  mc      = cesaro_monte_carlo(bern03(), xor_ca(), {Word{0}, Word{1}}, 64, opt);
    std::size_t misses  = 0, total = 0;
    double      worst_z = 0;
    for (std::size_t i = 0; i < exact.series.size(); ++i) {
      for (std::size_t n = 0; n < 64; ++n) {
        auto const diff = std::abs(mc.series[i].values[n] - exact.series[i].values[n]);
        auto const hw   = mc.series[i].half_widths[n];
        ++total;
        misses += diff > hw;
        if (hw > 0) {
          worst_z = std::max(worst_z, 3 * diff / hw);
        }
      }
    }
    return {misses == 0, std::to_string(total - misses) + "/" + std::to_string(total)
                             + " steps inside 3 sigma, worst " + fmt(worst_z) + " sigma"};
  }

  // Every 1-block code from an irreducible shift on 2..4 symbols (all edge
  // sets, all symbol maps) with a memory-1 inverse, under one random depth-1
  // and one random depth-2 measure.
  Outcome gamma_index_shift() {
    std::mt19937_64 rng(8);
    std::size_t     codes = 0, pairs = 0, mismatches = 0;
    auto try_code = [&](MarkovShift const& s, std::vector<Symbol> theta) {
      std::vector<Symbol> used(theta);
      std::sort(used.begin(), used.end());
      used.erase(std::unique(used.begin(), used.end()), used.end());
      for (auto& v : theta) {
        v = static_cast<Symbol>(std::lower_bound(used.begin(), used.end(), v) - used.begin());
      }
      std::vector<Edge> edges;
      for (Symbol a = 0; a < s.size(); ++a) {
        for (auto b : s.followers(a)) {
          edges.emplace_back(theta[a], theta[b]);
        }
      }
      auto const target = MarkovShift::from_edges(oracle::digits(used.size()), edges);
      auto const code   = BlockCode::from_symbol_map(s, target, theta);
      if (!memory_one_inverse(code)) {
        return;
      }
      ++codes;
      for (std::size_t d = 1; d <= 2; ++d) {
        auto const m = oracle::random_measure(rng, s, d);
        auto const p = pushforward_measure(m, code);
        if (!p.complete_connections()) {
          continue;
        }
        auto const g  = gamma_sequence(m, 4);
        auto const gp = gamma_sequence(p, 4);
        for (std::size_t k = 2; k <= 4; ++k) {
          ++pairs;
          mismatches += gp[k - 1] != g[k - 2] && std::abs(gp[k - 1] - g[k - 2]) > 1e-12;
        }
      }
    };
    auto all_maps = [&](MarkovShift const& s) {
      auto const n = s.size();
      for (auto const& theta : oracle::all_words(n, n)) {
        try_code(s, theta);
      }
    };
    for (std::size_t n = 2; n <= 4; ++n) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n * n)); ++mask) {
        std::vector<Edge> edges;
        for (std::size_t e = 0; e < n * n; ++e) {
          if (mask >> e & 1) {
            edges.emplace_back(static_cast<Symbol>(e / n), static_cast<Symbol>(e % n));
          }
        }
        try {
          auto const s = MarkovShift::from_edges(oracle::digits(n), edges);
          if (s.size() == n && is_irreducible(s)) {
            all_maps(s);
          }
        } catch (Error const&) {
        }
      }
    }
    return {mismatches == 0 && codes > 0,
            std::to_string(codes) + " codes, " + std::to_string(pairs) + " gamma pairs, "
                + std::to_string(mismatches) + " mismatches"};
  }

  Outcome invariance() {
    auto const x  = xor_ca().code();
    auto const u  = FiniteMemoryMeasure::bernoulli(full2(), {0.5, 0.5});
    auto const ru = check_invariance(u, x, 6, 1e-12);
    auto const rb = check_invariance(bern03(), x, 2, 1e-12);
    double     on_one = -1;
    for (auto const& [w, dev] : rb.deviations) {
      if (w == Word{1}) {
        on_one = dev;
      }
    }
    bool const ok = ru.invariant && ru.max_deviation <= 1e-12 && !rb.invariant
                    && std::abs(on_one - 0.12) <= 1e-12;
    return {ok, "uniform dev " + fmt(ru.max_deviation) + ", Bernoulli(0.3) dev on [1] "
                    + fmt(on_one)};
  }

  Outcome oracle_equivalence() {
    std::mt19937_64 rng(32);
    std::size_t     agree = 0, negatives = 0;
    for (int trial = 0; trial < 50; ++trial) {
      auto const n = 2 + static_cast<std::size_t>(trial % 3);
      auto const s = oracle::random_shift(rng, n, 0.7);
      auto const t = oracle::random_table(rng, n);
      auto const c = check_sc(s, t);
      agree += c.compatible == oracle::sampled_sc(rng, s, t, 1000, 32);
      negatives += !c.compatible;
    }
    std::vector<BlockCode> corpus;
    auto const             x = xor_ca();
    corpus.push_back(x.code());
    corpus.push_back(power_rule(x, 3));
    corpus.push_back(identity_ca(golden()).code());
    corpus.push_back(shift_ca(golden()).code());
    for (auto name : fixture_names()) {
      auto const t = *fixture_table(name);
      corpus.push_back(CellularAutomaton::from_table(MarkovShift::full(t.alphabet()), t).code());
    }
    auto const z3 = oracle::cyclic_sum(3);
    corpus.push_back(CellularAutomaton::from_table(MarkovShift::full(z3.alphabet()), z3).code());
    std::size_t identities = 0, holding = 0;
    for (auto const& code : corpus) {
      auto const extra = code.memory() + code.anticipation();
      for (std::size_t m = 1; m <= 3; ++m) {
        if (count_allowed_words(code.source(), m + extra) > 50'000) {
          break;
        }
        std::uint64_t total = 0;
        for (auto const& w : allowed_words(code.target(), m)) {
          total += preimage_cylinder(code, w).size();
        }
        ++identities;
        holding += total == count_allowed_words(code.source(), m + extra);
      }
    }
    return {agree == 50 && holding == identities,
            std::to_string(agree) + "/50 sc instances (" + std::to_string(negatives)
                + " incompatible), " + std::to_string(holding) + "/"
                + std::to_string(identities) + " partition identities"};
  }

  struct Criterion {
    int                      id;
    char const*              name;
    double                   limit_seconds;  // 0: no limit
    std::function<Outcome()> run;
  };

}  // namespace

int main() {
  std::vector<Criterion> const criteria{
      {1, "fixture classification", 1, fixture_classification},
      {2, "toyoda round trip", 60, toyoda_round_trip},
      {3, "decomposition pipeline", 10, decomposition_pipeline},
      {4, "n-scaling", 1, n_scaling},
      {5, "parry correctness", 0, parry_correctness},
      {6, "cesaro convergence", 60, cesaro_convergence},
      {7, "cross-engine agreement", 0, cross_engine},
      {8, "pushforward gamma index shift", 0, gamma_index_shift},
      {9, "invariance", 0, invariance},
      {10, "oracle equivalence", 0, oracle_equivalence},
  };
  int failed = 0;
  for (auto const& c : criteria) {
    auto const start = std::chrono::steady_clock::now();
    Outcome    o;
    try {
      o = c.run();
    } catch (std::exception const& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += ", over the " + fmt(c.limit_seconds) + " s limit";
    }
    failed += !o.pass;
    std::printf("criterion %2d %-30s %s  %s [%.2f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
