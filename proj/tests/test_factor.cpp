#include <doctest.h>

#include "oracles.hpp"
#include "tmca/error.hpp"
#include "tmca/factor.hpp"
#include "tmca/fixtures.hpp"

using namespace tmca;

namespace {

  CayleyTable table8() {
    return *fixture_table(fixture_table_8);
  }

  CellularAutomaton full_ca(CayleyTable const& t) {
    return CellularAutomaton::from_table(MarkovShift::full(t.alphabet()), t);
  }

  // (k1,b1)•(k2,b2) = (k1 + 2k2 + 1 mod 3, 1 - b2) on Z3 x {0,1}; 3-scaling
  // but not Psi-associative.
  CayleyTable affine6() {
    std::vector<std::string> names;
    for (int k = 0; k < 3; ++k) {
      for (int beta = 0; beta < 2; ++beta) {
        names.push_back(std::to_string(k) + std::to_string(beta));
      }
    }
    std::vector<Symbol> e(36);
    for (Symbol x = 0; x < 6; ++x) {
      for (Symbol y = 0; y < 6; ++y) {
        auto const k = (x / 2 + 2 * (y / 2) + 1) % 3;
        e[x * 6 + y] = static_cast<Symbol>(k * 2 + (1 - y % 2));
      }
    }
    return CayleyTable(Alphabet(names), e);
  }

  // The table of pi(a) • pi(b) = pi(a • b).
  CayleyTable relabel(CayleyTable const& t, std::vector<Symbol> const& pi) {
    auto const          n = t.size();
    std::vector<Symbol> e(n * n);
    for (Symbol a = 0; a < n; ++a) {
      for (Symbol b = 0; b < n; ++b) {
        e[pi[a] * n + pi[b]] = pi[t(a, b)];
      }
    }
    return CayleyTable(t.alphabet(), e);
  }

}  // namespace

TEST_CASE("hmm code of the 8-symbol table") {
  auto const t = table8();
  auto const h = hmm_code(t, StructureMode::psi_associative);
  CHECK(h.product_alphabet.size() == 8);
  std::vector<std::pair<char const*, char const*>> const expected{
      {"a", "({a,b},b)"}, {"b", "({a,b},a)"}, {"c", "({c,d},b)"}, {"d", "({c,d},a)"},
      {"e", "({e,f},b)"}, {"f", "({e,f},a)"}, {"g", "({g,h},b)"}, {"h", "({g,h},a)"}};
  for (auto [from, to] : expected) {
    CHECK(h.product_alphabet.name(h.u[t.alphabet().at(from)]) == to);
  }
  std::vector<bool> hit(8, false);
  for (auto v : h.u) {
    hit[v] = true;
  }
  CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
  for (Symbol a = 0; a < 8; ++a) {
    for (Symbol c = 0; c < 8; ++c) {
      CHECK(h.u[t(a, c)] == h.product_table(h.u[a], h.u[c]));
    }
  }
  // u(c•e) = u(h) = ({g,h},a) = u(c)•u(e).
  auto const c = t.alphabet().at("c"), e = t.alphabet().at("e");
  CHECK(h.product_alphabet.name(h.product_table(h.u[c], h.u[e])) == "({g,h},a)");
}

TEST_CASE("hmm code of a group") {
  auto const t = oracle::cyclic_sum(3);
  auto const h = hmm_code(t, StructureMode::psi_associative);
  CHECK(h.product_alphabet.names() == std::vector<std::string>{"(0,0)", "(1,0)", "(2,0)"});
  CHECK(h.u == std::vector<Symbol>{0, 1, 2});
}

TEST_CASE("decompose the 8-symbol table on the full shift") {
  auto const t    = table8();
  auto const ca   = full_ca(t);
  auto const cert = decompose(ca, StructureMode::psi_associative);
  auto const& rs  = cert.hmm.structure;
  CHECK(rs.classes.size() == 4);
  CHECK(cert.k_shift.is_full());
  CHECK(cert.k_shift.size() == 4);
  REQUIRE(cert.class_identity);
  CHECK(rs.class_table.alphabet().name(*cert.class_identity) == "{a,b}");
  CHECK(cert.class_group_factors == std::vector<unsigned>{2, 2});
  CHECK(rs.identity_set == std::vector<Symbol>{0, 1});
  CHECK(rs.s_b[0] == 1);
  CHECK(rs.s_b[1] == 0);
  CHECK(cert.b_shift.is_full());
  CHECK(cert.period_m == 2);
  CHECK(cert.exponent_l == 2);
  CHECK(cert.product_verified);
  CHECK(cert.conjugacy.verified);
  CHECK(cert.conjugacy.depth == 8);
  CHECK(cert.class_ca.flags().bipermutative);
  // The translation is s_B applied to the right neighbour.
  for (auto const& [w, v] : cert.translation.code().entries()) {
    CHECK(v == 1 - w[1]);
  }
  // Class part returns after L right multiplications; s_B^M = id.
  for (Symbol k = 0; k < 4; ++k) {
    for (Symbol a = 0; a < 4; ++a) {
      Symbol x = k;
      for (unsigned i = 0; i < cert.exponent_l; ++i) {
        x = rs.class_table(x, a);
      }
      CHECK(x == k);
    }
  }
  for (auto e : rs.identity_set) {
    Symbol x = e;
    for (unsigned i = 0; i < cert.period_m; ++i) {
      x = rs.s_b[x];
    }
    CHECK(x == e);
  }
  // u is a conjugacy of the full CA with the product CA.
  auto const check = verify_conjugacy(ca, cert.product_ca, cert.u_code, 8, &cert.u_inverse);
  CHECK(check.verified);
}

TEST_CASE("decompose a group CA") {
  auto const t    = oracle::cyclic_sum(3);
  auto const cert = decompose(full_ca(t), StructureMode::psi_associative);
  CHECK(cert.hmm.structure.identity_set.size() == 1);
  CHECK(cert.period_m == 1);
  CHECK(cert.exponent_l == 3);
  CHECK(cert.class_ca.code().entries() == full_ca(t).code().entries());
  CHECK(cert.conjugacy.verified);
}

TEST_CASE("decompose on a compatible subshift") {
  auto const t  = table8();
  auto const s  = sc_closure(t, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  auto const ca = CellularAutomaton::from_table(s, t);
  auto const cert = decompose(ca, StructureMode::psi_associative);
  CHECK(cert.hmm.structure.classes.size() == 1);
  CHECK(cert.period_m == 2);
  CHECK(cert.product_verified);
  CHECK(cert.conjugacy.verified);
}

TEST_CASE("decompose in n_scaling mode") {
  auto const t  = affine6();
  auto const ca = full_ca(t);
  CHECK_FALSE(find_psi(t).psi);
  CHECK(check_n_scaling(ca, 3).holds);
  CHECK_FALSE(check_n_scaling(ca, 2).holds);
  auto const cert = decompose(ca, StructureMode::n_scaling);
  REQUIRE(cert.scaling_n);
  CHECK(*cert.scaling_n == 3);
  CHECK(cert.hmm.structure.identity_set.size() == 2);
  CHECK(cert.period_m == 2);
  CHECK(cert.product_verified);
  CHECK(cert.conjugacy.verified);
  try {
    (void)decompose(ca, StructureMode::psi_associative);
    FAIL("expected hypothesis_failed");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::hypothesis_failed);
  }
  try {
    (void)decompose(full_ca(table8()), StructureMode::n_scaling, {.scaling_n = 2});
    FAIL("expected hypothesis_failed");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::hypothesis_failed);
  }
}

TEST_CASE("decompose rejects inputs outside the hypotheses") {
  auto const golden = MarkovShift::from_edges(oracle::digits(2), {{0, 0}, {0, 1}, {1, 0}});
  auto const lax    = CellularAutomaton::from_table(golden, oracle::cyclic_sum(2), false);
  try {
    (void)decompose(lax, StructureMode::psi_associative);
    FAIL("expected hypothesis_failed");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::hypothesis_failed);
  }
  CayleyTable const left(oracle::digits(2), {0, 0, 1, 1});  // a•b = a
  try {
    (void)decompose(full_ca(left), StructureMode::psi_associative);
    FAIL("expected hypothesis_failed");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::hypothesis_failed);
  }
}

TEST_CASE("verify_conjugacy") {
  auto const x  = full_ca(oracle::cyclic_sum(2));
  auto const id = identity_ca(x.shift()).code();
  auto const ok = verify_conjugacy(x, x, id, 8);
  CHECK(ok.verified);

  auto const sigma = shift_ca(x.shift());
  auto const bad   = verify_conjugacy(x, sigma, id, 4);
  CHECK_FALSE(bad.verified);
  CHECK(bad.failure == "commutation");
  REQUIRE(bad.witness);
  CHECK(*bad.witness == Word{1, 0});

  auto const collapse = BlockCode::from_symbol_map(x.shift(), x.shift(), {0, 0});
  auto const zero     = CellularAutomaton(collapse);
  auto const merged   = verify_conjugacy(zero, zero, collapse, 4);
  CHECK_FALSE(merged.verified);
  CHECK(merged.failure == "not_injective");
}

TEST_CASE("search_conjugacy") {
  auto const x = full_ca(oracle::cyclic_sum(2));
  auto const self = search_conjugacy(x, x, 1);
  REQUIRE(self);
  CHECK(self->entries() == identity_ca(x.shift()).code().entries());

  CHECK_FALSE(search_conjugacy(x, full_ca(oracle::cyclic_sum(3)), 2));

  auto const t8   = full_ca(table8());
  auto const cert = decompose(t8, StructureMode::psi_associative);
  auto const code = search_conjugacy(t8, cert.product_ca, 1);
  REQUIRE(code);
  CHECK(code->window() == 1);
  CHECK(verify_conjugacy(t8, cert.product_ca, *code, 8).verified);
}

TEST_CASE("property: relabelled tables are found conjugate") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto const n = 2 + static_cast<std::size_t>(trial % 3);
    auto const t = oracle::random_isotope(rng, n);
    std::vector<Symbol> pi(n);
    for (Symbol i = 0; i < n; ++i) {
      pi[i] = i;
    }
    std::shuffle(pi.begin(), pi.end(), rng);
    auto const a    = full_ca(t);
    auto const b    = full_ca(relabel(t, pi));
    auto const code = search_conjugacy(a, b, 1);
    REQUIRE(code);
    auto const check = verify_conjugacy(a, b, *code, 6);
    CHECK(check.verified);
    for (std::size_t k = 1; k <= 6; ++k) {
      CHECK(count_allowed_words(a.shift(), k) == count_allowed_words(b.shift(), k));
    }
  }
}

TEST_CASE("periods and exponents") {
  CHECK(permutation_period({1, 2, 0, 4, 3}, {0, 1, 2, 3, 4}) == 6);
  CHECK(permutation_period({0}, {0}) == 1);
  auto const klein = hmm_code(table8(), StructureMode::psi_associative).structure.class_table;
  CHECK(right_multiplication_exponent(klein) == 2);
  CHECK(right_multiplication_exponent(oracle::cyclic_sum(6)) == 6);
  CayleyTable const right(oracle::digits(2), {0, 1, 0, 1});  // a•b = b
  try {
    (void)right_multiplication_exponent(right);
    FAIL("expected structure_violation");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::structure_violation);
  }
}
