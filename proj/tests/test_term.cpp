#include <doctest.h>

#include "rbmltt/normalize.hpp"
#include "rbmltt/term.hpp"
#include "support.hpp"

using namespace rbm;
using namespace rbm::testing;

namespace {

bool same(const TermPtr& a, const TermPtr& b) { return structural_eq(a, b); }

}  // namespace

TEST_SUITE("term") {
  TEST_CASE("shift examples") {
    CHECK(same(shift(mk::var(0), 1, 0), mk::var(1)));
    CHECK(same(shift(mk::lam(mk::var(0)), 1, 0), mk::lam(mk::var(0))));
    CHECK(same(shift(mk::lam(mk::var(1)), 1, 0), mk::lam(mk::var(2))));
    CHECK(same(shift(mk::var(0), 1, 1), mk::var(0)));
  }

  TEST_CASE("substitution examples") {
    CHECK(same(subst(mk::var(0), 0, mk::zero()), mk::zero()));
    CHECK(same(subst(mk::app(mk::var(1), mk::var(0)), 0, mk::zero()), mk::app(mk::var(0), mk::zero())));
    // The replacement is shifted when it goes under a binder.
    CHECK(same(subst(mk::lam(mk::var(1)), 0, mk::var(3)), mk::lam(mk::var(4))));
  }

  TEST_CASE("codomain instantiation carries the bound along") {
    // (x : Nat) ->[3*x + 2] Vec Nat x, applied to 2
    BoundPtr b = bnd::plus(bnd::scale(3, bnd::var(0)), bnd::constant(ExtNat{2}));
    TermPtr pi = mk::pi(mk::nat(), b, mk::vec(mk::nat(), mk::var(0)));
    TermPtr two = mk::numeral(2);
    CHECK(same(subst(pi->kids[1], 0, two), mk::vec(mk::nat(), two)));
    BoundPtr at = bound_subst_term(pi->bound, 0, two, syntactic_size(two));
    CHECK(bound_eval(at, SizeEnv{}) == ExtNat{8});
  }

  TEST_CASE("structural equality") {
    CHECK(same(mk::lam(mk::var(0)), mk::lam(mk::var(0))));
    CHECK_FALSE(same(mk::zero(), mk::succ(mk::zero())));
    BoundPtr b1 = bnd::plus(bnd::scale(3, bnd::var(0)), bnd::constant(ExtNat{2}));
    BoundPtr b2 = bnd::plus(bnd::plus(bnd::var(0), bnd::constant(ExtNat{2})), bnd::scale(2, bnd::var(0)));
    CHECK_FALSE(bound_syntactic_eq(b1, b2));
    CHECK(same(mk::pi(mk::nat(), b1, mk::nat()), mk::pi(mk::nat(), b2, mk::nat())));
    CHECK_FALSE(same(mk::pi(mk::nat(), b1, mk::nat()), mk::pi(mk::nat(), bnd::var(0), mk::nat())));
  }

  TEST_CASE("numerals and vector literals") {
    CHECK(as_numeral(mk::numeral(4)) == 4u);
    CHECK_FALSE(as_numeral(mk::var(0)).has_value());
    auto lit = as_vec_literal(mk::vec_literal({mk::numeral(1), mk::numeral(2)}));
    REQUIRE(lit.has_value());
    CHECK(lit->size() == 2);
    CHECK(same(mk::vec_literal({mk::numeral(1)}), mk::cons(mk::succ(mk::zero()), mk::nil())));
  }

  TEST_CASE("free variables") {
    CHECK(is_closed(mk::lam(mk::var(0))));
    CHECK(free_var_bound(mk::lam(mk::var(3))) == 3);
    CHECK(has_free_var(mk::natrec(mk::nat(), mk::var(0), mk::zero(), mk::var(3)), 1));
    CHECK_FALSE(has_free_var(mk::natrec(mk::nat(), mk::var(0), mk::zero(), mk::var(1)), 1));
  }

  TEST_CASE("definitional equality examples") {
    CHECK(convertible(mk::app(mk::lam(mk::var(0)), mk::zero()), mk::zero()));
    // natrec at succ zero unfolds once into the step case.
    TermPtr step = mk::succ(mk::succ(mk::var(0)));  // ih + 2
    TermPtr rec1 = mk::natrec(mk::nat(), mk::numeral(1), mk::numeral(5), step);
    TermPtr unfolded = instantiate(step, {mk::zero(), mk::natrec(mk::nat(), mk::zero(), mk::numeral(5), step)});
    CHECK(convertible(rec1, unfolded));
    CHECK(convertible(rec1, mk::numeral(7)));
    CHECK(convertible(mk::vec(mk::nat(), mk::add(mk::numeral(1), mk::numeral(1))), mk::vec(mk::nat(), mk::numeral(2))));
    CHECK(convertible(mk::add(mk::succ(mk::var(0)), mk::var(1)), mk::succ(mk::add(mk::var(1), mk::var(0)))));
    CHECK_FALSE(convertible(mk::add(mk::var(0), mk::var(0)), mk::var(0)));
  }

  TEST_CASE("property: shifting then substituting the fresh variable is the identity") {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 2000; ++k) {
      const std::size_t free = rng() % 4;
      TermPtr t = random_raw_term(rng, free, 5);
      TermPtr u = random_raw_term(rng, free, 2);
      INFO(debug_string(t));
      CHECK(same(subst(shift(t, 1, 0), 0, u), t));
    }
  }

  TEST_CASE("property: substitution composes") {
    std::mt19937_64 rng(37);
    for (int k = 0; k < 2000; ++k) {
      // t lives in (G, x) with |G| = 3; v in G; u in G without variable i.
      const std::size_t i = rng() % 3;
      TermPtr t = random_raw_term(rng, 4, 5);
      TermPtr v = random_raw_term(rng, 3, 2);
      TermPtr u = random_raw_term(rng, 2, 2);
      TermPtr lhs = subst(subst(t, 0, v), i, u);
      TermPtr rhs = subst(subst(t, i + 1, shift(u, 1, 0)), 0, subst(v, i, u));
      INFO(debug_string(t) << " | " << debug_string(v) << " | " << debug_string(u) << " | i=" << i);
      CHECK(same(lhs, rhs));
    }
  }

  TEST_CASE("property: shifts compose") {
    std::mt19937_64 rng(41);
    for (int k = 0; k < 1000; ++k) {
      TermPtr t = random_raw_term(rng, 3, 5);
      CHECK(same(shift(shift(t, 2, 1), 1, 1), shift(t, 3, 1)));
      CHECK(same(shift(shift(t, 1, 0), -1, 0), t));
    }
  }
}
