#include <doctest.h>

#include <bit>
#include <stdexcept>
#include <vector>

#include "rbmltt/bound.hpp"
#include "support.hpp"

using namespace rbm;
using namespace rbm::testing;

namespace {

SizeEnv as_env(const std::vector<std::uint64_t>& v) {
  SizeEnv e;
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = v[i];
  return e;
}

const BoundPtr n = bnd::var(0);
BoundPtr lin(std::uint64_t a, std::uint64_t c) { return bnd::plus(bnd::scale(a, n), bnd::constant(ExtNat{c})); }

}  // namespace

TEST_SUITE("bound") {
  TEST_CASE("evaluation examples") {
    CHECK(bound_eval(lin(3, 2), SizeEnv{{0, 4}}) == ExtNat{14});
    CHECK(bound_eval(bnd::sum(n, bnd::constant(ExtNat{7})), SizeEnv{{0, 0}}) == ExtNat{0});
    CHECK(bound_eval(bnd::fold(bnd::constant(ExtNat{3}), bnd::constant(ExtNat{5})), SizeEnv{}) == ExtNat{15});
    CHECK(bound_eval(bnd::fold(bnd::constant(ExtNat{0}), bnd::constant(ExtNat::inf())), SizeEnv{}) == ExtNat{0});
    CHECK(bound_eval(bnd::log2(n), SizeEnv{{0, 0}}) == ExtNat{0});
    CHECK(bound_eval(bnd::log2(n), SizeEnv{{0, 8}}) == ExtNat{4});
    CHECK_THROWS_AS(bound_eval(n, SizeEnv{}), BoundError);
  }

  TEST_CASE("sums of constants and of the index have closed forms") {
    BoundNF three_n = bound_normalize(bnd::sum(n, bnd::constant(ExtNat{3})));
    CHECK(three_n == bound_normalize(bnd::scale(3, n)));
    CHECK(nf_to_string(three_n, {"n"}) == "3*n");

    BoundPtr tri = bnd::sum(n, bnd::var(0));
    BoundNF tri_nf = bound_normalize(tri);
    REQUIRE(tri_nf.alts.size() == 1);
    // A genuine polynomial: a quadratic and a linear monomial, no sums left.
    CHECK(tri_nf.alts[0].terms.size() == 2);
    for (std::uint64_t k = 0; k <= 100; ++k) {
      auto at = [&](std::size_t) -> std::optional<ExtNat> { return ExtNat{k}; };
      CHECK(nf_eval(tri_nf, at) == ExtNat{k * (k - (k > 0 ? 1 : 0)) / 2});
      CHECK(nf_eval(tri_nf, at) == oracle(tri, {k}));
      CHECK(nf_eval(three_n, at) == oracle(bnd::sum(n, bnd::constant(ExtNat{3})), {k}));
    }
  }

  TEST_CASE("cubic sum bodies normalize exactly") {
    // sum(i < n, i*i*i + 2*i) against the unrolled oracle.
    BoundPtr i = bnd::var(0);
    BoundPtr body = bnd::plus(bnd::fold(i, bnd::fold(i, i)), bnd::scale(2, i));
    BoundPtr s = bnd::sum(n, body);
    BoundNF nf = bound_normalize(s);
    for (std::uint64_t k = 0; k <= 100; ++k)
      CHECK(nf_eval(nf, [&](std::size_t) -> std::optional<ExtNat> { return ExtNat{k}; }) == oracle(s, {k}));
  }

  TEST_CASE("unit laws") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      BoundPtr b = random_bound(rng, 1, 3);
      CHECK(bound_normalize(bnd::plus(bnd::bot(), b)) == bound_normalize(b));
      // max(0, b) = b pointwise; the normal form may keep the 0 alternative
      // when b has negative coefficients, since dominance is decided by
      // coefficients.
      BoundNF joined = bound_normalize(bnd::join(bnd::bot(), b));
      for (std::uint64_t x = 0; x <= 20; ++x) CHECK(nf_eval(joined, [&](std::size_t) -> std::optional<ExtNat> { return ExtNat{x}; }) == oracle(b, {x}));
      BoundPtr p = random_poly(rng);
      CHECK(bound_normalize(bnd::join(bnd::bot(), p)) == bound_normalize(p));
    }
  }

  TEST_CASE("dominance examples") {
    CHECK(bound_leq(lin(3, 2), lin(3, 2), 16).proved());
    Verdict up = bound_leq(lin(2, 1), lin(3, 2), 16);
    CHECK(up.proved());
    for (std::uint64_t k = 0; k <= 1000; ++k) CHECK(oracle(lin(2, 1), {k}) <= oracle(lin(3, 2), {k}));

    Verdict down = bound_leq(lin(3, 2), lin(2, 1), 16);
    REQUIRE(down.refuted());
    REQUIRE(down.witness.count(0));
    const std::uint64_t w = down.witness.at(0);
    CHECK(oracle(lin(3, 2), {w}) > oracle(lin(2, 1), {w}));
    // The reference example's witness point is also a violation.
    CHECK(oracle(lin(3, 2), {1}) > oracle(lin(2, 1), {1}));

    CHECK(bound_leq(bnd::constant(ExtNat{2}), bnd::constant(ExtNat{0}), 16).refuted());
    CHECK(bound_leq(bnd::log2(n), n, 16).proved());
    CHECK(bound_leq(bnd::sum(n, bnd::var(0)), bnd::fold(n, n), 16).proved());
  }

  TEST_CASE("substitution examples") {
    BoundPtr at4 = bound_subst(lin(3, 2), 0, bnd::constant(ExtNat{4}));
    CHECK(bound_is_closed(at4));
    CHECK(bound_normalize(at4) == bound_normalize(bnd::constant(ExtNat{14})));

    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
      BoundPtr b = random_poly(rng);
      CHECK(bound_syntactic_eq(bound_subst(b, 0, bnd::var(0)), b));
    }

    // (sum(i < n, 2*i + 1))[n := 2] = b(0) + b(1)
    BoundPtr body = bnd::plus(bnd::scale(2, bnd::var(0)), bnd::constant(ExtNat{1}));
    BoundPtr s2 = bound_subst(bnd::sum(bnd::var(0), body), 0, bnd::constant(ExtNat{2}));
    BoundPtr unrolled = bnd::plus(bound_subst(body, 0, bnd::constant(ExtNat{0})),
                                  bound_subst(body, 0, bnd::constant(ExtNat{1})));
    CHECK(bound_normalize(s2) == bound_normalize(unrolled));
    CHECK(bound_eval(s2, SizeEnv{}) == ExtNat{4});
  }

  TEST_CASE("substitution drops the indices above the replaced variable") {
    // Context [m, n] with n innermost: (n + m)[n := 7] = 7 + m, m now at index 0.
    BoundPtr b = bnd::plus(bnd::var(0), bnd::var(1));
    BoundPtr r = bound_subst(b, 0, bnd::constant(ExtNat{7}));
    CHECK(bound_eval(r, SizeEnv{{0, 5}}) == ExtNat{12});
    CHECK(bound_free_vars(r) == std::vector<std::size_t>{0});
  }

  TEST_CASE("text syntax") {
    CHECK(bound_to_string(lin(3, 2), {"n"}) == "3*n + 2");
    CHECK(nf_to_string(bound_normalize(bnd::plus(lin(1, 1), lin(2, 1))), {"n"}) == "3*n + 2");
  }

  TEST_CASE("property: normalization preserves evaluation") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 400; ++k) {
      const std::size_t vars = rng() % 3;
      BoundPtr b = random_bound(rng, vars, 3);
      BoundNF nf = bound_normalize(b);
      for (int e = 0; e < 12; ++e) {
        std::vector<std::uint64_t> env;
        for (std::size_t v = 0; v < vars; ++v) env.push_back(pick(rng, 0, 50));
        const ExtNat expect = oracle(b, env);
        INFO("bound: " << bound_to_string(b) << "  normal form: " << nf_to_string(nf));
        CHECK(bound_eval(b, as_env(env)) == expect);
        CHECK(nf_eval(nf, [&](std::size_t i) -> std::optional<ExtNat> { return ExtNat{env.at(i)}; }) == expect);
      }
    }
  }

  TEST_CASE("property: dominance verdicts are sound") {
    std::mt19937_64 rng(23);
    const std::uint64_t range = 16;
    int proved = 0, refuted = 0;
    for (int k = 0; k < 600; ++k) {
      BoundPtr lhs = random_bound(rng, 1, 3);
      // Half of the queries are dominated by construction.
      BoundPtr rhs = k % 2 ? bnd::plus(lhs, random_bound(rng, 1, 2)) : random_bound(rng, 1, 3);
      Verdict v = bound_leq(lhs, rhs, range);
      INFO(bound_to_string(lhs, {"n"}) << "  vs  " << bound_to_string(rhs, {"n"}) << "  " << v.str({"n"}));
      CHECK_FALSE((v.proved() && v.refuted()));
      if (k % 2) CHECK_FALSE(v.refuted());
      if (v.proved()) {
        ++proved;
        for (std::uint64_t x = 0; x <= 4 * range; ++x) CHECK(oracle(lhs, {x}) <= oracle(rhs, {x}));
      } else if (v.refuted()) {
        ++refuted;
        std::vector<std::uint64_t> env{v.witness.count(0) ? v.witness.at(0) : 0};
        CHECK(oracle(lhs, env) > oracle(rhs, env));
      }
    }
    CHECK(proved > 100);
    CHECK(refuted > 20);
  }
}
