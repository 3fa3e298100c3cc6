#include <doctest.h>

#include "rbmltt/harness.hpp"
#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"
#include "support.hpp"

using namespace rbm;
using namespace rbm::testing;

namespace {

const CoreDecl& decl(const std::string& file, const std::string& name) {
  static std::map<std::string, Program> cache;
  auto it = cache.find(file);
  if (it == cache.end()) it = cache.emplace(file, load_program(read_file(corpus_path(file)), file)).first;
  const CoreDecl* d = it->second.find(name);
  REQUIRE(d != nullptr);
  return *d;
}

std::vector<std::uint64_t> range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

CheckerConfig value_free_cfg() {
  CheckerConfig c;
  c.costs = CostModel::value_free();
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("generator configuration is validated") {
    GenConfig ok;
    CHECK_NOTHROW(ok.validate());
    GenConfig shallow;
    shallow.max_depth = 0;
    CHECK_THROWS_AS(shallow.validate(), std::invalid_argument);
    GenConfig silent;
    silent.weights = GenWeights{0, 0, 0, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(silent.validate(), std::invalid_argument);
  }

  TEST_CASE("generator examples") {
    CheckerConfig cfg;
    GenConfig shallow;
    shallow.max_depth = 1;
    Generator g(shallow, cfg);
    for (int k = 0; k < 20; ++k) CHECK(as_numeral(g.term(mk::nat())).has_value());

    GenConfig intro_only;
    intro_only.weights = GenWeights{1, 0, 0, 0, 0, 0, 0, 0, 0};
    Generator h(intro_only, cfg);
    for (int k = 0; k < 20; ++k) {
      auto elems = as_vec_literal(h.term(mk::vec(mk::nat(), mk::numeral(2))));
      REQUIRE(elems.has_value());
      CHECK(elems->size() == 2);
    }
  }

  TEST_CASE("generation is deterministic in the configuration") {
    GenConfig gen;
    gen.seed = 77;
    CheckerConfig cfg;
    auto a = generate_corpus(gen, cfg, 200);
    auto b = generate_corpus(gen, cfg, 200);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(structural_eq(a[i].goal, b[i].goal));
      CHECK(structural_eq(a[i].term, b[i].term));
    }
    gen.seed = 78;
    auto c = generate_corpus(gen, cfg, 200);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += !structural_eq(a[i].term, c[i].term);
    CHECK(differ > 100);
  }

  TEST_CASE("generated terms are not trivial") {
    GenConfig gen;
    gen.seed = 4;
    CheckerConfig cfg;
    std::size_t eliminations = 0, total_size = 0;
    auto corpus = generate_corpus(gen, cfg, 300);
    for (const auto& item : corpus) {
      EvalResult r = eval(item.term, cfg.costs);
      eliminations += r.cost != ExtNat{0};
      total_size += term_size(item.term);
    }
    CHECK(eliminations > 150);
    CHECK(total_size / corpus.size() > 10);
  }

  TEST_CASE("soundness examples") {
    CheckerConfig cfg;
    CHECK(check_cost_soundness(mk::zero(), mk::nat(), cfg).pass);
    TermPtr v4 = mk::vec_literal({mk::numeral(1), mk::numeral(2), mk::numeral(3), mk::numeral(4)});
    const CoreDecl& sum = decl("sum.rbm", "sum");
    TermPtr at4 = mk::app(mk::ann(sum.body, sum.type), {mk::numeral(4), v4});
    CHECK(check_cost_soundness(at4, mk::nat(), cfg).pass);
    CHECK(eval(at4, cfg.costs).cost == ExtNat{13});
    // With free literals the bound is exactly 3*4 + 2, so the overcharge shows.
    CheckerConfig free = value_free_cfg();
    CHECK(check_cost_soundness(at4, mk::nat(), free).pass);
    EvalOptions buggy;
    buggy.inject_bug = true;
    CHECK_FALSE(check_cost_soundness(at4, mk::nat(), free, buggy).pass);
  }

  TEST_CASE("preservation examples") {
    CheckerConfig cfg = value_free_cfg();
    CHECK(check_preservation(mk::numeral(3), mk::nat(), cfg).pass);
    TermPtr redex = mk::app(mk::ann(mk::lam(mk::var(0)), mk::arrow(mk::nat(), bnd::bot(), mk::nat())), mk::zero());
    CHECK(check_preservation(redex, mk::nat(), cfg).pass);
    CHECK(check_preservation(redex, mk::nat(), CheckerConfig{}).pass);
  }

  TEST_CASE("canonicity examples") {
    const CostModel cm = CostModel::defaults();
    CHECK(check_canonicity(mk::add(mk::numeral(2), mk::numeral(3)), mk::nat(), cm).pass);
    CHECK(check_canonicity(mk::fsucc(mk::fsucc(mk::fzero())), mk::fin(mk::numeral(3)), cm).pass);
    CHECK(check_canonicity(mk::vec_literal({mk::zero(), mk::zero()}), mk::vec(mk::nat(), mk::numeral(2)), cm).pass);
    // Shape violations are caught: wrong length, Fin height out of range.
    CHECK_FALSE(
        check_canonicity(mk::vec_literal({mk::zero(), mk::zero()}), mk::vec(mk::nat(), mk::numeral(3)), cm).pass);
    CHECK_FALSE(check_canonicity(mk::fsucc(mk::fsucc(mk::fzero())), mk::fin(mk::numeral(2)), cm).pass);
  }

  TEST_CASE("substitution examples") {
    CheckerConfig free = value_free_cfg();
    CHECK(check_substitution({mk::nat(), mk::var(0), mk::zero()}, free).pass);
    CHECK(check_substitution({mk::nat(), mk::succ(mk::var(0)), mk::zero()}, free).pass);
    // Under the default model the argument's own construction cost shows up
    // after substitution: succ x costs 1, succ zero costs 2.
    CHECK_FALSE(check_substitution({mk::nat(), mk::succ(mk::var(0)), mk::zero()}, CheckerConfig{}).pass);
  }

  TEST_CASE("audit of sum: rows are 3n + 1 against 3n + 2") {
    CheckerConfig cfg;
    AuditReport rep = audit(decl("sum.rbm", "sum"), range(0, 8), cfg);
    REQUIRE(rep.rows.size() == 9);
    for (const auto& row : rep.rows) {
      CHECK(row.cost == ExtNat{3 * row.n + 1});
      CHECK(row.bound == ExtNat{3 * row.n + 2});
      CHECK(row.ok);
    }
    REQUIRE(rep.synthesized_vs_declared.has_value());
    CHECK(rep.synthesized_vs_declared->proved());
    CHECK(rep.synthesized == "3*n + 2");
    CHECK(rep.ok());
    auto j = rep.to_json();
    CHECK(j["program"] == "sum");
    CHECK(j["cost_model"] == "default");
    CHECK(j["rows"].size() == 9);
    CHECK(rep.to_table().find("PASS") != std::string::npos);
  }

  TEST_CASE("audit rows exist for every requested size, in order") {
    CheckerConfig cfg;
    std::vector<std::uint64_t> sizes{5, 0, 12, 3};
    AuditReport rep = audit(decl("sum.rbm", "sum"), sizes, cfg);
    REQUIRE(rep.rows.size() == sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) CHECK(rep.rows[i].n == sizes[i]);
  }

  TEST_CASE("audit of map and reverse") {
    CheckerConfig cfg;
    for (const char* name : {"map", "map_double"}) {
      AuditReport rep = audit(decl("map.rbm", name), range(0, 12), cfg);
      CHECK(rep.ok());
    }
    CheckerConfig rev;
    rev.costs = CostModel::load(corpus_path("reverse.cost"));
    AuditReport r = audit(decl("reverse.rbm", "reverse"), range(0, 12), rev);
    CHECK(r.ok());
    for (const auto& row : r.rows) CHECK(row.bound == ExtNat{4 * row.n + 2});
  }

  TEST_CASE("audit errors") {
    Program p = load_program("def z : Nat := zero");
    CHECK_THROWS_AS(audit(p.decls[0], {0}, CheckerConfig{}), AuditError);
  }

  TEST_CASE("metatheory smoke run and mutation") {
    MetatheoryOptions opts;
    opts.corpus_size = 60;
    opts.substitution_cases = 40;
    auto reports = run_metatheory(opts, CheckerConfig{});
    REQUIRE(reports.size() == 4);
    for (const auto& r : reports) {
      INFO(r.name);
      CHECK(r.ok());
      CHECK(r.total > 0);
    }
    opts.corpus_size = 200;
    opts.eval.inject_bug = true;
    auto buggy = run_metatheory(opts, CheckerConfig{});
    CHECK_FALSE(buggy[0].ok());
    CHECK(buggy[0].name == "cost-soundness");
    auto j = to_json(buggy);
    CHECK(j["ok"] == false);
  }
}
