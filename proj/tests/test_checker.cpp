#include <doctest.h>

#include "rbmltt/checker.hpp"
#include "rbmltt/harness.hpp"
#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"
#include "support.hpp"

using namespace rbm;
using namespace rbm::testing;

namespace {

const CostModel kDefaults = CostModel::defaults();

ExtNat closed_value(const BoundPtr& b) { return bound_eval(b, SizeEnv{}, &term_resolver()); }

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const CheckError& e) {
    return e.diag.code;
  }
  return "none";
}

bool nf_equal(const BoundPtr& a, const BoundPtr& b) { return bound_normalize(a) == bound_normalize(b); }

BoundPtr c(std::uint64_t v) { return bnd::constant(ExtNat{v}); }

Context nat_ctx(std::size_t k) {
  Context ctx;
  for (std::size_t i = 0; i < k; ++i) ctx = ctx.extend(mk::nat());
  return ctx;
}

}  // namespace

TEST_SUITE("checker") {
  TEST_CASE("contexts") {
    Checker ch;
    CHECK_NOTHROW(ch.check_context(Context{}));
    CHECK_NOTHROW(ch.check_context(nat_ctx(1)));
    CHECK(error_code([&] { ch.check_context(Context{}.extend(mk::zero(), "x")); }) != "none");
  }

  TEST_CASE("formation costs compose the formation and intro rules") {
    Checker ch;
    const auto& d = kDefaults;
    CHECK(closed_value(ch.infer_type_formation({}, mk::nat())) == d[Delta::Nat]);
    ExtNat vec1 = d[Delta::Nat] + (d[Delta::Z] + d[Delta::S]) + d[Delta::Vec];
    CHECK(closed_value(ch.infer_type_formation({}, mk::vec(mk::nat(), mk::numeral(1)))) == vec1);
    CHECK(vec1 == ExtNat{4});
    ExtNat id00 = d[Delta::Nat] + d[Delta::Z] + d[Delta::Z] + d[Delta::Id];
    CHECK(closed_value(ch.infer_type_formation({}, mk::id(mk::nat(), mk::zero(), mk::zero()))) == id00);
  }

  TEST_CASE("inference examples") {
    Checker ch;
    TypingResult z = ch.infer({}, mk::zero());
    CHECK(convertible(z.type, mk::nat()));
    CHECK(closed_value(z.bound) == ExtNat{1});
    CHECK(error_code([&] { ch.infer({}, mk::box(ExtNat{0}, mk::succ(mk::zero()))); }) == "E-BOX-BUDGET");
    CHECK(error_code([&] { ch.infer({}, mk::lam(mk::var(0))); }) == "E-CANNOT-INFER");
    CHECK(error_code([&] { ch.infer({}, mk::var(0)); }) != "none");
    TypingResult b = ch.infer({}, mk::box(ExtNat{2}, mk::succ(mk::zero())));
    CHECK(convertible(b.type, mk::box_type(ExtNat{2}, mk::nat())));
  }

  TEST_CASE("the sum program synthesizes exactly 3n + 2") {
    Program p = load_program(read_file(corpus_path("sum.rbm")));
    const CoreDecl& d = *p.find("sum");
    CheckerConfig cfg;
    Checker ch(cfg);
    TypingResult top = ch.check_top({}, d.body, d.type);
    CHECK(closed_value(top.bound) == ExtNat{0});  // the outer lambdas are free
    auto synth = synthesized_body_bound(d, cfg);
    REQUIRE(synth.has_value());
    BoundPtr n = bnd::var(1);  // (n, v) in scope, v innermost
    CHECK(bound_normalize(*synth) == bound_normalize(bnd::plus(bnd::scale(3, n), c(2))));
  }

  TEST_CASE("check mode examples") {
    Checker ch;
    BoundPtr id = ch.check({}, mk::lam(mk::var(0)), mk::arrow(mk::nat(), bnd::bot(), mk::nat()));
    CHECK(closed_value(id) == ExtNat{0});
    CHECK(closed_value(ch.check({}, mk::zero(), mk::nat())) == ExtNat{1});
    CHECK(error_code([&] { ch.check({}, mk::zero(), mk::vec(mk::nat(), mk::zero())); }) == "E-TYPE-MISMATCH");
    // Conversion: add 1 1 reduces to 2 in the index.
    TermPtr v2 = mk::vec_literal({mk::zero(), mk::zero()});
    CHECK_NOTHROW(ch.check({}, v2, mk::vec(mk::nat(), mk::add(mk::numeral(1), mk::numeral(1)))));
    CHECK(error_code([&] { ch.check({}, v2, mk::vec(mk::nat(), mk::numeral(3))); }) == "E-TYPE-MISMATCH");
  }

  TEST_CASE("box grades are monotone under subsumption") {
    Checker ch;
    Context ctx = Context{}.extend(mk::box_type(ExtNat{2}, mk::nat()), "b");
    BoundPtr exact = ch.check(ctx, mk::var(0), mk::box_type(ExtNat{2}, mk::nat()));
    BoundPtr wider = ch.check(ctx, mk::var(0), mk::box_type(ExtNat{5}, mk::nat()));
    CHECK(nf_equal(exact, wider));
    CHECK(error_code([&] { ch.check(ctx, mk::var(0), mk::box_type(ExtNat{1}, mk::nat())); }) != "none");
    CHECK(ch.subsumes(mk::box_type(ExtNat{2}, mk::nat()), mk::box_type(ExtNat{5}, mk::nat())));
    CHECK_FALSE(ch.subsumes(mk::box_type(ExtNat{5}, mk::nat()), mk::box_type(ExtNat{2}, mk::nat())));
    // Pi bounds weaken the same way.
    CHECK(ch.subsumes(mk::arrow(mk::nat(), c(1), mk::nat()), mk::arrow(mk::nat(), c(3), mk::nat())));
    CHECK_FALSE(ch.subsumes(mk::arrow(mk::nat(), c(3), mk::nat()), mk::arrow(mk::nat(), c(1), mk::nat())));
  }

  TEST_CASE("step bounds may not depend on the recursive result") {
    Checker ch;
    // natrec Nat 3 0 (natrec Nat ih 0 (succ ih')): the step cost grows with ih.
    TermPtr inner = mk::natrec(mk::nat(), mk::var(0), mk::zero(), mk::succ(mk::var(0)));
    TermPtr t = mk::natrec(mk::nat(), mk::numeral(3), mk::zero(), inner);
    CHECK(error_code([&] { ch.infer({}, t); }) == "E-STEP-BOUND");
  }

  TEST_CASE("warnings: ambient budget and empirical dominance") {
    CheckerConfig cfg;
    cfg.budget = ExtNat{0};
    Checker ch(cfg);
    ch.check_top({}, mk::zero(), mk::nat());
    REQUIRE(ch.warnings().size() == 1);
    CHECK(ch.warnings()[0].code == "W-AMBIENT-BUDGET");

    // In context n : Nat, a payload costing about 2n + 3 in a box of grade 100
    // holds on every sample but is not provable by coefficients.
    TermPtr payload = mk::natrec(mk::nat(), mk::var(0), mk::zero(), mk::succ(mk::var(0)));
    TermPtr boxed = mk::box(ExtNat{100}, payload);
    Checker lenient;
    CHECK_NOTHROW(lenient.infer(nat_ctx(1), boxed));
    REQUIRE_FALSE(lenient.warnings().empty());
    CHECK(lenient.warnings()[0].code == "W-EMPIRICAL-DOMINANCE");
    CheckerConfig strict_cfg;
    strict_cfg.strict = true;
    Checker strict(strict_cfg);
    CHECK(error_code([&] { strict.infer(nat_ctx(1), boxed); }) == "E-EMPIRICAL-DOMINANCE");
  }

  TEST_CASE("natrec with a constant step follows the linear recursion law") {
    Checker ch;
    const ExtNat d = kDefaults[Delta::NatRec];
    // Step bodies in context (m, ih), none of which depends on ih's size.
    std::vector<TermPtr> steps{mk::succ(mk::var(0)), mk::add(mk::var(0), mk::numeral(2)), mk::numeral(3)};
    for (const auto& step : steps)
      for (std::uint64_t n = 0; n <= 8; ++n) {
        TermPtr scrut = mk::numeral(n), base = mk::numeral(1);
        TermPtr t = mk::natrec(mk::nat(), scrut, base, step);
        BoundPtr bn = ch.infer({}, scrut).bound;
        BoundPtr bz = ch.infer({}, base).bound;
        BoundPtr bs = ch.infer(nat_ctx(2), step).bound;
        BoundPtr law = bnd::plus({bz, bnd::fold(c(n), bnd::plus(bs, bnd::constant(d))), bnd::constant(d), bn});
        INFO(debug_string(t));
        CHECK(nf_equal(ch.infer({}, t).bound, law));
      }
  }

  TEST_CASE("property: inference is deterministic") {
    GenConfig gen;
    gen.seed = 5;
    CheckerConfig cfg;
    for (const auto& item : generate_corpus(gen, cfg, 200)) {
      Checker a(cfg), b(cfg);
      BoundPtr x = a.check_top({}, item.term, item.goal).bound;
      BoundPtr y = b.check_top({}, item.term, item.goal).bound;
      CHECK(nf_equal(x, y));
      CHECK(closed_value(x) == closed_value(y));
    }
  }

  TEST_CASE("property: every generated term checks") {
    GenConfig gen;
    gen.seed = 21;
    for (const CostModel& cm : {CostModel::defaults(), CostModel::value_free()}) {
      CheckerConfig cfg;
      cfg.costs = cm;
      for (const auto& item : generate_corpus(gen, cfg, 300)) {
        Checker ch(cfg);
        INFO(debug_string(item.term));
        CHECK_NOTHROW(ch.check_top({}, item.term, item.goal));
      }
    }
  }

  TEST_CASE("property: weakening") {
    GenConfig gen;
    gen.seed = 8;
    CheckerConfig cfg;
    cfg.costs = CostModel::value_free();
    std::mt19937_64 rng(8);
    int tested = 0;
    for (const auto& sc : generate_substitution_cases(gen, cfg, 200)) {
      Context ctx = Context{}.extend(mk::nat(), "n").extend(sc.arg_type, "x");
      Checker ch(cfg);
      TypingResult before;
      try {
        before = ch.infer(ctx, sc.open);
      } catch (const CheckError&) {
        continue;  // check-only terms
      }
      // Insert a fresh Nat at cutoff `at`; the argument types are closed, so
      // the other entries need no shifting.
      const std::size_t at = rng() % 3;
      std::vector<TermPtr> types{mk::nat(), sc.arg_type};
      types.insert(types.end() - static_cast<std::ptrdiff_t>(at), mk::nat());
      Context wide;
      for (const auto& ty : types) wide = wide.extend(ty);
      TermPtr t = shift(sc.open, 1, at);
      Checker ch2(cfg);
      TypingResult after = ch2.infer(wide, t);
      INFO(debug_string(sc.open));
      CHECK(convertible(after.type, shift(before.type, 1, at)));
      CHECK(nf_equal(after.bound, bound_shift(before.bound, 1, at)));
      ++tested;
    }
    CHECK(tested > 100);
  }
}
