#include "rbmltt/harness.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "rbmltt/normalize.hpp"

namespace rbm {

namespace {

Finding fail(const std::string& what, const TermPtr& t) { return {false, what + "\n  term: " + debug_string(t)}; }

std::string num(ExtNat x) { return x.str(); }

/// Closed bound value; the resolver handles applications of closed terms.
ExtNat closed_value(const BoundPtr& b) { return bound_eval(b, SizeEnv{}, &term_resolver()); }

}  // namespace

// ------------------------------------------------------------------ suites

Finding check_cost_soundness(const TermPtr& t, const TermPtr& goal, const CheckerConfig& cfg,
                             const EvalOptions& opts) {
  TypingResult r;
  try {
    Checker ch(cfg);
    r = ch.check_top(Context{}, t, goal);
  } catch (const CheckError& e) {
    return fail("generated term rejected: " + e.diag.str(), t);
  }
  ExtNat bound = closed_value(r.bound);
  EvalResult ev;
  try {
    ev = eval(t, cfg.costs, opts);
  } catch (const EvalError& e) {
    return fail(e.what(), t);
  }
  if (ev.cost != ev.ledger.total) return fail("ledger total " + num(ev.ledger.total) + " != cost " + num(ev.cost), t);
  if (!leq(ev.cost, bound)) return fail("measured cost " + num(ev.cost) + " exceeds bound " + num(bound), t);
  return {};
}

Finding check_preservation(const TermPtr& t, const TermPtr& goal, const CheckerConfig& cfg) {
  TypingResult before;
  try {
    Checker ch(cfg);
    before = ch.check_top(Context{}, t, goal);
  } catch (const CheckError& e) {
    return fail("generated term rejected: " + e.diag.str(), t);
  }
  TermPtr v;
  try {
    v = readback(eval(t, cfg.costs).value);
  } catch (const EvalError& e) {
    return fail(e.what(), t);
  }
  try {
    Checker ch(cfg);
    BoundPtr after = ch.check(Context{}, v, goal);
    Verdict verdict = bound_leq(after, before.bound, cfg.sample_range, &term_resolver());
    if (verdict.refuted())
      return fail("value bound " + bound_to_string(after) + " exceeds " + bound_to_string(before.bound), t);
  } catch (const CheckError& e) {
    return fail("value " + debug_string(v) + " does not re-check: " + e.diag.str(), t);
  }
  return {};
}

namespace {

bool canonical_at(const ValuePtr& v, const TermPtr& goal_in, std::string& why) {
  TermPtr goal = normalize(goal_in);
  using K = Value::Kind;
  switch (goal->tag) {
    case Tag::Nat:
      if (v->kind == K::Nat) return true;
      why = "expected a numeral";
      return false;
    case Tag::VecType: {
      auto len = as_numeral(goal->kids[1]);
      std::uint64_t count = 0;
      ValuePtr c = v;
      for (; c->kind == K::Cons; c = c->b, ++count)
        if (!canonical_at(c->a, goal->kids[0], why)) return false;
      if (c->kind != K::Nil) {
        why = "vector does not end in nil";
        return false;
      }
      if (!len || *len != count) {
        why = "vector length " + std::to_string(count) + " differs from the index";
        return false;
      }
      return true;
    }
    case Tag::FinType: {
      auto bound = as_numeral(goal->kids[0]);
      if (v->kind == K::Fin && bound && v->n < *bound) return true;
      why = "expected an index below the bound";
      return false;
    }
    case Tag::Pi:
      if (v->kind == K::Closure) return true;
      why = "expected a closure";
      return false;
    case Tag::Sigma:
      if (v->kind != K::Pair) {
        why = "expected a pair";
        return false;
      }
      return canonical_at(v->a, goal->kids[0], why) &&
             canonical_at(v->b, subst(goal->kids[1], 0, readback(v->a)), why);
    case Tag::IdType:
      if (v->kind == K::Refl) return true;
      why = "expected refl";
      return false;
    case Tag::BoxType:
      if (v->kind != K::Box) {
        why = "expected a box";
        return false;
      }
      return canonical_at(v->a, goal->kids[0], why);
    case Tag::Universe:
      if (v->kind == K::Type) return true;
      why = "expected a type";
      return false;
    default:
      why = "unsupported goal";
      return false;
  }
}

}  // namespace

Finding check_canonicity(const TermPtr& t, const TermPtr& goal, const CostModel& cm) {
  ValuePtr v;
  try {
    v = eval(t, cm).value;
  } catch (const EvalError& e) {
    return fail(e.what(), t);
  }
  std::string why;
  if (!canonical_at(v, goal, why)) return fail("value " + debug_string(readback(v)) + " not canonical: " + why, t);
  return {};
}

std::vector<SubstitutionCase> generate_substitution_cases(const GenConfig& cfg, const CheckerConfig& checker,
                                                          std::size_t count) {
  Generator g(cfg, checker);
  std::vector<SubstitutionCase> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TermPtr a_type;
    switch (g.rng()() % 3) {
      case 0:
        a_type = mk::nat();
        break;
      case 1:
        a_type = mk::vec(mk::nat(), mk::numeral(g.rng()() % (cfg.max_size + 1)));
        break;
      default:
        a_type = mk::sigma(mk::nat(), mk::nat());
        break;
    }
    Context ctx = Context{}.extend(mk::nat(), "n").extend(a_type, "x");
    TermPtr goal = g.rng()() % 2 == 0 ? mk::nat() : random_goal(g.rng(), cfg, checker.costs);
    TermPtr open = g.term_in(ctx, {true, a_type->tag == Tag::Nat}, goal);
    try {
      Checker(checker).infer(ctx, open);
    } catch (const CheckError& e) {
      if (e.diag.code != "E-CANNOT-INFER") throw;
      open = mk::ann(open, shift(goal, 2));
    }
    out.push_back({a_type, open, g.value(a_type)});
  }
  return out;
}

Finding check_substitution(const SubstitutionCase& c, const CheckerConfig& cfg) {
  Context outer = Context{}.extend(mk::nat(), "n");
  Context ctx = outer.extend(c.arg_type, "x");
  TypingResult before, after;
  BoundPtr arg_bound;
  try {
    Checker ch(cfg);
    before = ch.infer(ctx, c.open);
    arg_bound = ch.check(Context{}, c.arg, c.arg_type);
  } catch (const CheckError& e) {
    return fail("generated case rejected: " + e.diag.str(), c.open);
  }
  // A check-only argument (e.g. nil) is substituted with its ascription so it
  // stays valid in inferring positions.
  TermPtr arg = c.arg;
  try {
    Checker(cfg).infer(Context{}, arg);
  } catch (const CheckError& e) {
    if (e.diag.code != "E-CANNOT-INFER") return fail("argument rejected: " + e.diag.str(), arg);
    arg = mk::ann(arg, c.arg_type);
  }
  TermPtr substituted = subst(c.open, 0, shift(arg, 1));
  try {
    Checker ch(cfg);
    after = ch.infer(outer, substituted);
  } catch (const CheckError& e) {
    return fail("substituted term rejected: " + e.diag.str(), substituted);
  }
  TermPtr expected_type = subst(before.type, 0, shift(arg, 1));
  if (!convertible(after.type, expected_type))
    return fail("type " + debug_string(after.type) + " differs from " + debug_string(expected_type), substituted);
  BoundPtr expected = bound_subst_term(before.bound, 0, shift(arg, 1), size_of(arg));
  for (std::uint64_t n = 0; n <= cfg.sample_range; ++n) {
    SizeEnv env{{0, n}};
    ExtNat got = bound_eval(after.bound, env, &term_resolver());
    ExtNat want = bound_eval(expected, env, &term_resolver());
    if (got != want)
      return fail("at n=" + std::to_string(n) + " bound " + num(got) + " differs from substituted bound " + num(want) +
                      " (argument bound " + bound_to_string(arg_bound) + ")",
                  substituted);
  }
  return {};
}

std::vector<SuiteReport> run_metatheory(const MetatheoryOptions& opts, const CheckerConfig& base) {
  CheckerConfig dflt = base;
  CheckerConfig vfree = base;
  vfree.costs = CostModel::value_free();

  auto record = [](SuiteReport& rep, const Finding& f) {
    ++rep.total;
    if (f.pass) ++rep.passed;
    else if (rep.failures.size() < 5) rep.failures.push_back(f.detail);
  };

  SuiteReport soundness, preservation, canonicity, substitution;
  soundness.name = "cost-soundness";
  preservation.name = "preservation";
  canonicity.name = "canonicity";
  substitution.name = "substitution";

  auto main_corpus = generate_corpus(opts.gen, dflt, opts.corpus_size);
  for (const auto& item : main_corpus) {
    record(soundness, check_cost_soundness(item.term, item.goal, dflt, opts.eval));
    record(canonicity, check_canonicity(item.term, item.goal, dflt.costs));
  }
  auto vf_corpus = generate_corpus(opts.gen, vfree, opts.corpus_size);
  for (const auto& item : vf_corpus) {
    record(soundness, check_cost_soundness(item.term, item.goal, vfree, opts.eval));
    record(preservation, check_preservation(item.term, item.goal, vfree));
  }
  for (const auto& c : generate_substitution_cases(opts.gen, vfree, opts.substitution_cases))
    record(substitution, check_substitution(c, vfree));
  return {soundness, preservation, canonicity, substitution};
}

nlohmann::json to_json(const std::vector<SuiteReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    arr.push_back({{"suite", r.name}, {"total", r.total}, {"passed", r.passed}, {"ok", r.ok()}, {"failures", r.failures}});
    all = all && r.ok();
  }
  return {{"suites", arr}, {"ok", all}};
}

// ------------------------------------------------------------------- audit

bool AuditReport::ok() const {
  for (const auto& r : rows)
    if (!r.ok) return false;
  return !synthesized_vs_declared || !synthesized_vs_declared->refuted();
}

nlohmann::json AuditReport::to_json() const {
  auto n = [](ExtNat x) -> nlohmann::json {
    if (x.is_inf()) return "inf";
    return x.value();
  };
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back({{"n", r.n}, {"cost", n(r.cost)}, {"bound", n(r.bound)}, {"ok", r.ok}});
  nlohmann::json j{{"program", program},   {"cost_model", cost_model}, {"declared_bound", declared},
                   {"synthesized_bound", synthesized}, {"rows", rs}, {"ok", ok()}};
  if (synthesized_vs_declared) {
    nlohmann::json v{{"verdict", synthesized_vs_declared->str(telescope)}};
    if (synthesized_vs_declared->refuted()) {
      nlohmann::json w = nlohmann::json::object();
      for (auto [idx, val] : synthesized_vs_declared->witness)
        w[idx < telescope.size() ? telescope[telescope.size() - 1 - idx] : "#" + std::to_string(idx)] = val;
      v["witness"] = w;
    }
    j["synthesized_vs_declared"] = v;
  } else {
    j["synthesized_vs_declared"] = nullptr;
  }
  return j;
}

std::string AuditReport::to_table() const {
  std::ostringstream os;
  os << program << "  (cost model: " << cost_model << ")\n";
  os << "  declared:    " << declared << "\n";
  os << "  synthesized: " << synthesized << "  ["
     << (synthesized_vs_declared ? synthesized_vs_declared->str(telescope) : std::string("n/a")) << "]\n";
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max({w, r.cost.str().size() + 2, r.bound.str().size() + 2});
  os << "  " << std::setw(4) << "n" << std::setw(static_cast<int>(w)) << "cost" << std::setw(static_cast<int>(w))
     << "bound" << "  result\n";
  for (const auto& r : rows)
    os << "  " << std::setw(4) << r.n << std::setw(static_cast<int>(w)) << r.cost.str()
       << std::setw(static_cast<int>(w)) << r.bound.str() << "  " << (r.ok ? "PASS" : "FAIL") << "\n";
  return os.str();
}

TermPtr canonical_argument(const TermPtr& dom_in, std::uint64_t n, bool is_size) {
  TermPtr dom = normalize(dom_in);
  switch (dom->tag) {
    case Tag::Nat:
      return mk::numeral(is_size ? n : 0);
    case Tag::Universe:
      return mk::nat();
    case Tag::VecType: {
      auto len = as_numeral(dom->kids[1]);
      if (!len) break;
      std::vector<TermPtr> elems;
      for (std::uint64_t i = 0; i < *len; ++i) elems.push_back(canonical_argument(dom->kids[0], 0, false));
      return mk::vec_literal(elems);
    }
    case Tag::FinType:
      return mk::fzero();
    case Tag::Sigma: {
      TermPtr a = canonical_argument(dom->kids[0], 0, false);
      return mk::pair(a, canonical_argument(subst(dom->kids[1], 0, a), 0, false));
    }
    case Tag::Pi:
      if (!has_free_var(dom->kids[1], 0))
        return mk::lam(shift(canonical_argument(shift(dom->kids[1], -1, 0), 0, false), 1));
      break;
    case Tag::IdType:
      return mk::refl(dom->kids[1]);
    case Tag::BoxType:
      return mk::box(dom->grade, canonical_argument(dom->kids[0], 0, false));
    default:
      break;
  }
  throw AuditError("no canonical argument of type " + pretty(dom));
}

std::optional<BoundPtr> synthesized_body_bound(const CoreDecl& d, const CheckerConfig& cfg) {
  Context ctx;
  TermPtr ty = d.type, body = d.body;
  while (body->tag == Tag::Ann) body = body->kids[0];
  std::size_t peeled = 0;
  while (ty->tag == Tag::Pi && body->tag == Tag::Lam) {
    ctx = ctx.extend(ty->kids[0], peeled < d.telescope.size() ? d.telescope[peeled] : std::string{});
    ty = ty->kids[1];
    body = body->kids[0];
    ++peeled;
  }
  if (peeled != d.telescope.size()) return std::nullopt;
  Checker ch(cfg);
  return ch.check(ctx, body, ty);
}

EvalResult run_decl(const CoreDecl& d, const std::vector<TermPtr>& args, const CostModel& cm) {
  TermPtr t = d.body;
  for (const auto& a : args) t = mk::app(t, a);
  return eval(t, cm);
}

AuditReport audit(const CoreDecl& d, const std::vector<std::uint64_t>& sizes, const CheckerConfig& cfg) {
  if (!d.expect_bound) throw AuditError(d.name + " has no expected-bound annotation");
  const BoundPtr& declared = *d.expect_bound;
  std::vector<std::size_t> fv = bound_free_vars(declared);
  if (fv.size() > 1) throw AuditError(d.name + ": the expected bound must mention at most one size variable");
  const std::size_t arity = d.telescope.size();

  AuditReport rep;
  rep.program = d.name;
  rep.cost_model = cfg.costs.name;
  rep.telescope = d.telescope;
  rep.declared = nf_to_string(bound_normalize(declared), d.telescope);
  if (auto synth = synthesized_body_bound(d, cfg)) {
    rep.synthesized = nf_to_string(bound_normalize(*synth), d.telescope);
    rep.synthesized_vs_declared = bound_leq(*synth, declared, cfg.sample_range, &term_resolver());
  } else {
    rep.synthesized = "n/a";
  }

  for (std::uint64_t n : sizes) {
    std::vector<TermPtr> args;
    TermPtr ty = d.type;
    for (std::size_t i = 0; i < arity; ++i) {
      if (ty->tag != Tag::Pi) throw AuditError(d.name + ": type has fewer parameters than its telescope");
      bool is_size = !fv.empty() && fv[0] == arity - 1 - i;
      TermPtr a = canonical_argument(ty->kids[0], n, is_size);
      args.push_back(a);
      ty = subst(ty->kids[1], 0, a);
    }
    EvalResult ev = run_decl(d, args, cfg.costs);
    SizeEnv env;
    if (!fv.empty()) env[fv[0]] = n;
    ExtNat b = bound_eval(declared, env, &term_resolver());
    rep.rows.push_back({n, ev.cost, b, leq(ev.cost, b)});
  }
  return rep;
}

}  // namespace rbm
