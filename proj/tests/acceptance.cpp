// Acceptance run: one PASS/FAIL line per criterion, with wall time.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "rbmltt/harness.hpp"
#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"
#include "support.hpp"

using namespace rbm;
using namespace rbm::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first failure message; later checks still run.
class Check {
 public:
  void operator()(bool cond, const std::string& what) {
    ++count_;
    if (!cond && first_.empty()) first_ = what;
    failed_ += !cond;
  }
  Outcome done(std::string summary) const {
    if (failed_ == 0) return {true, std::move(summary)};
    return {false, std::to_string(failed_) + "/" + std::to_string(count_) + " checks failed; first: " + first_};
  }

 private:
  std::size_t count_ = 0, failed_ = 0;
  std::string first_;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    out.pass = false;
    out.detail += " (time limit " + std::to_string(limit_s) + " s exceeded)";
  }
  failures += !out.pass;
  std::printf("%s %2d  %-44s %8.3f s  %s\n", out.pass ? "PASS" : "FAIL", id, title, secs, out.detail.c_str());
  std::fflush(stdout);
}

const Program& program(const std::string& file) {
  static std::map<std::string, Program> cache;
  auto it = cache.find(file);
  if (it == cache.end()) it = cache.emplace(file, load_program(read_file(corpus_path(file)), file)).first;
  return it->second;
}

const CoreDecl& decl(const std::string& file, const std::string& name) {
  const CoreDecl* d = program(file).find(name);
  if (d == nullptr) throw std::runtime_error("no declaration " + name + " in " + file);
  return *d;
}

std::vector<std::uint64_t> range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

std::size_t index_of(const CoreDecl& d, const std::string& name) {
  for (std::size_t i = 0; i < d.telescope.size(); ++i)
    if (d.telescope[i] == name) return d.telescope.size() - 1 - i;
  throw std::runtime_error("no parameter " + name + " in " + d.name);
}

Outcome sum_bound() {
  const CoreDecl& d = decl("sum.rbm", "sum");
  auto synth = synthesized_body_bound(d, CheckerConfig{});
  if (!synth) return {false, "no synthesized bound"};
  const BoundPtr n = bnd::var(index_of(d, "n"));
  const BoundNF expect = bound_normalize(bnd::plus(bnd::scale(3, n), bnd::constant(ExtNat{2})));
  const BoundNF got = bound_normalize(*synth);
  return {got == expect, "synthesized " + nf_to_string(got, d.telescope)};
}

Outcome sum_audit() {
  const CostModel cm = CostModel::defaults();
  AuditReport rep = audit(decl("sum.rbm", "sum"), range(0, 64), CheckerConfig{});
  Check check;
  check(rep.rows.size() == 65, "row count");
  for (const auto& row : rep.rows) {
    const std::uint64_t n = row.n;
    // One vecrec step per element plus the nil case, one add per element,
    // and the two applications of sum to its arguments.
    const ExtNat by_rules = scale(ExtNat{n + 1}, cm[Delta::VecRec]) + scale(ExtNat{n}, cm[Delta::Add]) +
                            scale(ExtNat{2}, cm[Delta::App]);
    check(by_rules == ExtNat{3 * n + 1}, "rule count formula at n=" + std::to_string(n));
    check(row.cost == ExtNat{3 * n + 1}, "k(" + std::to_string(n) + ") = " + row.cost.str());
    check(row.cost <= ExtNat{3 * n + 2}, "k(" + std::to_string(n) + ") above 3n+2");
    check(row.ok, "audit row " + std::to_string(n));
  }
  // The ledger agrees with the rule counts at a sample size.
  TermPtr v5 = mk::vec_literal({mk::numeral(1), mk::numeral(2), mk::numeral(3), mk::numeral(4), mk::numeral(5)});
  EvalResult r = run_decl(decl("sum.rbm", "sum"), {mk::numeral(5), v5}, cm);
  check(r.ledger.rules.at("vecrec").count == 6 && r.ledger.rules.at("add").count == 5 &&
            r.ledger.rules.at("app").count == 2,
        "ledger rule counts");
  check(r.ledger.total == ExtNat{16}, "ledger total");
  return check.done("k(n) = 3n + 1 for n in 0..64");
}

Outcome map_audit() {
  Check check;
  std::ostringstream summary;
  for (const char* name : {"map", "map_double"}) {
    const CoreDecl& d = decl("map.rbm", name);
    auto synth = synthesized_body_bound(d, CheckerConfig{});
    check(synth.has_value(), std::string(name) + ": no synthesized bound");
    if (!synth) continue;
    const std::size_t ni = index_of(d, "n");
    const BoundNF nf = bound_normalize(*synth);
    for (std::size_t v : nf_free_vars(nf)) check(v == ni, std::string(name) + ": bound mentions more than n");
    auto at = [&](std::uint64_t n) {
      return nf_eval(nf, [&](std::size_t i) -> std::optional<ExtNat> {
        if (i == ni) return ExtNat{n};
        return std::nullopt;
      });
    };
    const ExtNat d0 = at(0), d1 = at(1);
    check(!d0.is_inf() && !d1.is_inf() && d0 <= d1, std::string(name) + ": bound not finite and increasing");
    const std::uint64_t c = d1.value() - d0.value(), dd = d0.value();
    AuditReport rep = audit(d, range(0, 32), CheckerConfig{});
    check(rep.rows.size() == 33, std::string(name) + ": row count");
    for (const auto& row : rep.rows) {
      const ExtNat linear{c * row.n + dd};
      check(at(row.n) == linear, std::string(name) + ": synthesized bound is not linear in n");
      check(row.cost <= linear, std::string(name) + ": k(" + std::to_string(row.n) + ") = " + row.cost.str() +
                                    " above " + linear.str());
      check(row.ok, std::string(name) + ": audit row " + std::to_string(row.n));
    }
    summary << (summary.tellp() > 0 ? ", " : "") << name << ": " << c << "n + " << dd;
  }
  return check.done(summary.str());
}

Outcome reverse_audit() {
  CheckerConfig cfg;
  cfg.costs = CostModel::load(corpus_path("reverse.cost"));
  AuditReport rep = audit(decl("reverse.rbm", "reverse"), range(0, 32), cfg);
  Check check;
  check(rep.rows.size() == 33, "row count");
  for (const auto& row : rep.rows) {
    check(row.cost <= ExtNat{4 * row.n + 2}, "k(" + std::to_string(row.n) + ") = " + row.cost.str());
    check(row.ok, "audit row " + std::to_string(row.n));
  }
  return check.done("k(32) = " + rep.rows.back().cost.str() + " against 4*32 + 2, model reverse.cost");
}

std::vector<SuiteReport> metatheory;

Outcome suite(const std::string& name, std::size_t min_total) {
  for (const auto& r : metatheory) {
    if (r.name != name) continue;
    std::string detail = std::to_string(r.passed) + "/" + std::to_string(r.total);
    if (!r.failures.empty()) detail += "; first failure: " + r.failures.front();
    return {r.ok() && r.total >= min_total, detail};
  }
  return {false, "suite did not run"};
}

Outcome soundness() {
  MetatheoryOptions opts;
  opts.gen.seed = 1;
  opts.gen.max_depth = 6;
  opts.gen.max_size = 8;
  opts.corpus_size = 1000;
  opts.substitution_cases = 300;
  metatheory = run_metatheory(opts, CheckerConfig{});
  return suite("cost-soundness", 1000);
}

Outcome lattice_and_bounds() {
  Check check;
  std::mt19937_64 rng(2026);
  for (int k = 0; k < 5000; ++k) {
    const ExtNat a = random_extnat(rng), b = random_extnat(rng), c = random_extnat(rng);
    check(combine(combine(a, b), c) == combine(a, combine(b, c)), "combine associative");
    check(combine(a, b) == combine(b, a), "combine commutative");
    check(combine(a, ExtNat::bot()) == a, "bottom is the unit");
    check(join(a, a) == a && join(a, b) == join(b, a), "join idempotent and commutative");
    check(join(join(a, b), c) == join(a, join(b, c)), "join associative");
    check(leq(a, join(a, b)) && leq(b, join(a, b)), "join is an upper bound");
    check(!(leq(a, c) && leq(b, c)) || leq(join(a, b), c), "join is least");
    check(leq(ExtNat::bot(), a), "bottom is least");
    check(!(leq(a, b) && leq(b, a)) || a == b, "leq antisymmetric");
    check(!(leq(a, b) && leq(b, c)) || leq(a, c), "leq transitive");
    check(!leq(a, b) || leq(combine(a, c), combine(b, c)), "combine monotone");
    const ExtNat n{pick(rng, 0, 20)};
    check(scale(n + ExtNat{1}, a) == combine(scale(n, a), a), "scale unfolds");

    const ExtNat2 x{a, b}, y{b, c}, z{c, a};
    check(combine(combine(x, y), z) == combine(x, combine(y, z)), "product combine associative");
    check(join(x, y) == join(y, x), "product join commutative");
    check(!(leq(x, z) && leq(y, z)) || leq(join(x, y), z), "product join is least");
  }

  for (int k = 0; k < 400; ++k) {
    const std::size_t vars = rng() % 3;
    BoundPtr b = random_bound(rng, vars, 3);
    BoundNF nf = bound_normalize(b);
    for (int e = 0; e < 12; ++e) {
      std::vector<std::uint64_t> env;
      for (std::size_t v = 0; v < vars; ++v) env.push_back(pick(rng, 0, 50));
      const ExtNat expect = oracle(b, env);
      check(nf_eval(nf, [&](std::size_t i) -> std::optional<ExtNat> { return ExtNat{env.at(i)}; }) == expect,
            "normalize changed the value of " + bound_to_string(b));
    }
  }

  const std::uint64_t sample = 16;
  int proved = 0, refuted = 0;
  for (int k = 0; k < 600; ++k) {
    BoundPtr lhs = random_bound(rng, 1, 3);
    BoundPtr rhs = k % 2 ? bnd::plus(lhs, random_bound(rng, 1, 2)) : random_bound(rng, 1, 3);
    Verdict v = bound_leq(lhs, rhs, sample);
    const std::string q = bound_to_string(lhs, {"n"}) + " vs " + bound_to_string(rhs, {"n"});
    if (k % 2) check(!v.refuted(), "dominated pair refuted: " + q);
    if (v.proved()) {
      ++proved;
      for (std::uint64_t x = 0; x <= 4 * sample; ++x)
        check(oracle(lhs, {x}) <= oracle(rhs, {x}), "proved but violated: " + q);
    } else if (v.refuted()) {
      ++refuted;
      std::vector<std::uint64_t> env{v.witness.count(0) ? v.witness.at(0) : 0};
      check(oracle(lhs, env) > oracle(rhs, env), "bad witness: " + q);
    }
  }
  return check.done("laws x5000, normalize x4800, dominance x600 (" + std::to_string(proved) + " proved, " +
                    std::to_string(refuted) + " refuted)");
}

Outcome roundtrip() {
  Check check;
  std::size_t decls = 0;
  for (const char* f : {"sum.rbm", "map.rbm", "reverse.rbm"}) {
    const std::string text = read_file(corpus_path(f));
    const Program& p = program(f);
    for (const auto& d : p.decls) {
      ++decls;
      check(structural_eq(parse_term(pretty(d.type)), d.type), std::string(f) + ": type of " + d.name);
      check(structural_eq(parse_term(pretty(d.body)), d.body), std::string(f) + ": body of " + d.name);
    }
    std::string printed;
    for (const auto& sd : parse_program(text, f)) printed += print_decl(sd) + "\n";
    Program again = load_program(printed, f);
    check(again.decls.size() == p.decls.size(), std::string(f) + ": declaration count");
    for (std::size_t i = 0; i < std::min(again.decls.size(), p.decls.size()); ++i)
      check(structural_eq(again.decls[i].body, p.decls[i].body) && structural_eq(again.decls[i].type, p.decls[i].type),
            std::string(f) + ": surface reprint of " + p.decls[i].name);
  }
  GenConfig gen;
  gen.seed = 2026;
  auto corpus = generate_corpus(gen, CheckerConfig{}, 500);
  check(corpus.size() == 500, "generated corpus size");
  for (const auto& item : corpus) {
    check(structural_eq(parse_term(pretty(item.term)), item.term), "term: " + pretty(item.term));
    check(structural_eq(parse_term(pretty(item.goal)), item.goal), "goal: " + pretty(item.goal));
  }
  return check.done(std::to_string(decls) + " corpus declarations, 500 generated terms");
}

}  // namespace

int main() {
  criterion(1, "sum synthesizes exactly 3n + 2", 1.0, sum_bound);
  criterion(2, "sum audit over 0..64", 1.0, sum_audit);
  criterion(3, "map audit over 0..32", 0, map_audit);
  criterion(4, "reverse audit over 0..32", 0, reverse_audit);
  // The timed run generates and checks every suite.
  criterion(5, "cost soundness (all four suites timed)", 60.0, soundness);
  criterion(6, "preservation", 0, [] { return suite("preservation", 1000); });
  criterion(7, "canonicity", 0, [] { return suite("canonicity", 1000); });
  criterion(8, "substitution", 0, [] { return suite("substitution", 300); });
  criterion(9, "lattice and bound algebra", 0, lattice_and_bounds);
  criterion(10, "parse/pretty roundtrip", 0, roundtrip);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
