#include <stdexcept>

#include "rbmltt/harness.hpp"
#include "rbmltt/normalize.hpp"

namespace rbm {

void GenConfig::validate() const {
  if (max_depth < 1) throw std::invalid_argument("generator depth must be at least 1");
  const GenWeights& w = weights;
  unsigned total = w.intro + w.variable + w.redex + w.natrec + w.vecrec + w.project + w.jelim + w.unbox + w.add;
  if (total == 0) throw std::invalid_argument("generator weights are all zero");
  if (w.intro == 0) throw std::invalid_argument("generator needs a nonzero intro weight");
}

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); }

/// Cheapest numeral under the model: Zero costs δ_Z.
ExtNat zero_cost(const CostModel& cm) { return cm[Delta::Z]; }

}  // namespace

TermPtr random_goal(std::mt19937_64& rng, const GenConfig& cfg, const CostModel& cm) {
  const std::uint64_t m = cfg.max_size;
  switch (rng() % 8) {
    case 0:
      return mk::nat();
    case 1:
      return mk::vec(mk::nat(), mk::numeral(pick(rng, 0, m)));
    case 2:
      return mk::fin(mk::numeral(pick(rng, 1, std::max<std::uint64_t>(m, 1))));
    case 3:
      return mk::sigma(mk::nat(), mk::nat());
    case 4:
      return mk::sigma(mk::nat(), mk::vec(mk::nat(), mk::var(0)));
    case 5: {
      auto b = bnd::plus(bnd::scale(pick(rng, 0, 4), bnd::var(0)), bnd::constant(ExtNat{pick(rng, 0, 12)}));
      return mk::pi(mk::nat(), b, mk::nat());
    }
    case 6: {
      auto k = mk::numeral(pick(rng, 0, m));
      return mk::id(mk::nat(), k, k);
    }
    default: {
      ExtNat base = zero_cost(cm);
      std::uint64_t lo = base.is_inf() ? 0 : base.value();
      return mk::box_type(ExtNat{pick(rng, lo, lo + 20)}, mk::nat());
    }
  }
}

struct Generator::Scope {
  Context ctx;
  std::vector<bool> usable;  // may appear in size positions; innermost last

  Scope bind(TermPtr type, bool size_ok, std::string name = {}) const {
    Scope s{ctx.extend(std::move(type), std::move(name)), usable};
    s.usable.push_back(size_ok);
    return s;
  }
};

Generator::Generator(GenConfig cfg, CheckerConfig checker)
    : cfg_(std::move(cfg)), checker_(std::move(checker)), rng_(cfg_.seed) {
  cfg_.validate();
}

TermPtr Generator::term(const TermPtr& goal) {
  Scope s;
  return gen(s, goal, cfg_.max_depth, false);
}

TermPtr Generator::term_in(const Context& ctx, const std::vector<bool>& sized, const TermPtr& goal) {
  Scope s{ctx, sized};
  return gen(s, goal, cfg_.max_depth, false);
}

TermPtr Generator::value(const TermPtr& goal_in) {
  TermPtr goal = normalize(goal_in);
  switch (goal->tag) {
    case Tag::Nat:
      return mk::numeral(below(cfg_.max_size + 1));
    case Tag::VecType: {
      auto k = as_numeral(goal->kids[1]);
      if (!k) break;
      std::vector<TermPtr> elems;
      for (std::uint64_t i = 0; i < *k; ++i) elems.push_back(value(goal->kids[0]));
      return mk::vec_literal(elems);
    }
    case Tag::FinType: {
      auto k = as_numeral(goal->kids[0]);
      if (!k || *k == 0) break;
      TermPtr t = mk::fzero();
      for (std::uint64_t h = below(*k); h > 0; --h) t = mk::fsucc(t);
      return t;
    }
    case Tag::Sigma: {
      TermPtr a = value(goal->kids[0]);
      return mk::pair(a, value(subst(goal->kids[1], 0, a)));
    }
    case Tag::IdType:
      return mk::refl(goal->kids[1]);
    case Tag::BoxType:
      return mk::box(goal->grade, value(goal->kids[0]));
    case Tag::Pi:
      if (has_free_var(goal->kids[1], 0)) break;
      return mk::lam(shift(value(shift(goal->kids[1], -1, 0)), 1, 0));
    default:
      break;
  }
  throw std::logic_error("no canonical value for goal " + debug_string(goal));
}

// ----------------------------------------------------------------- helpers

std::optional<TermPtr> Generator::pick_var(Scope& s, const TermPtr& goal, bool sized) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < s.ctx.size(); ++i) {
    bool ok = s.usable[s.usable.size() - 1 - i];
    if (sized && !ok) continue;
    if (convertible(s.ctx.lookup(i), goal)) hits.push_back(i);
  }
  if (hits.empty()) return std::nullopt;
  return mk::var(hits[below(hits.size())]);
}

std::optional<BoundPtr> Generator::bound_of(Scope& s, const TermPtr& t, const TermPtr& goal) {
  Checker ch(checker_);
  return ch.check(s.ctx, t, goal);
}

/// Wraps check-only terms in an ascription so they can sit in inferring positions.
static TermPtr inferable(const CheckerConfig& cfg, const Context& ctx, const TermPtr& t, const TermPtr& goal) {
  try {
    Checker ch(cfg);
    ch.infer(ctx, t);
    return t;
  } catch (const CheckError& e) {
    if (e.diag.code != "E-CANNOT-INFER") throw;
    return mk::ann(t, goal);
  }
}

TermPtr Generator::small_scrutinee(Scope& s) {
  switch (below(4)) {
    case 0:
      if (auto v = pick_var(s, mk::nat(), true)) return *v;
      [[fallthrough]];
    case 1:
      return mk::add(mk::numeral(below(cfg_.max_size / 2 + 1)), mk::numeral(below(cfg_.max_size / 2 + 1)));
    case 2:
      if (auto v = pick_var(s, mk::nat(), true)) return mk::succ(*v);
      [[fallthrough]];
    default:
      return mk::numeral(below(cfg_.max_size + 1));
  }
}

TermPtr Generator::fallback(Scope& s, const TermPtr& goal) {
  switch (goal->tag) {
    case Tag::Nat:
      return mk::numeral(below(3));
    case Tag::VecType: {
      const TermPtr& len = goal->kids[1];
      if (auto k = as_numeral(len)) {
        std::vector<TermPtr> elems(*k, mk::zero());
        return mk::vec_literal(elems);
      }
      if (len->tag == Tag::Succ) return mk::cons(mk::zero(), fallback(s, normalize(mk::vec(goal->kids[0], len->kids[0]))));
      if (auto v = pick_var(s, goal, false)) return *v;
      break;
    }
    case Tag::FinType:
      return mk::fzero();
    case Tag::Sigma: {
      TermPtr a = fallback(s, goal->kids[0]);
      return mk::pair(a, fallback(s, normalize(subst(goal->kids[1], 0, a))));
    }
    case Tag::Pi:
      if (goal->kids[0]->tag == Tag::Nat && goal->kids[1]->tag == Tag::Nat) return mk::lam(mk::var(0));
      break;
    case Tag::IdType:
      return mk::refl(goal->kids[1]);
    case Tag::BoxType:
      if (zero_cost(checker_.costs) <= goal->grade) return mk::box(goal->grade, mk::zero());
      break;
    default:
      break;
  }
  if (auto v = pick_var(s, goal, false)) return *v;
  throw std::logic_error("generator cannot inhabit " + debug_string(goal));
}

// -------------------------------------------------------------- productions

TermPtr Generator::gen(Scope& s, const TermPtr& goal_in, unsigned depth, bool sized) {
  TermPtr goal = normalize(goal_in);
  if (depth <= 1) {
    if (coin(1, 3))
      if (auto v = pick_var(s, goal, sized)) return *v;
    return fallback(s, goal);
  }

  const GenWeights& w = cfg_.weights;
  enum Prod { Intro, Variable, Redex, NatRec, VecRec, JElim };
  std::vector<std::pair<Prod, unsigned>> prods{{Intro, w.intro}, {Variable, w.variable}, {Redex, w.redex},
                                              {NatRec, w.natrec}, {VecRec, w.vecrec}, {JElim, w.jelim}};
  unsigned total = 0;
  for (auto& [p, wt] : prods) total += wt;
  unsigned r = static_cast<unsigned>(below(total));
  Prod chosen = Intro;
  for (auto& [p, wt] : prods) {
    if (r < wt) {
      chosen = p;
      break;
    }
    r -= wt;
  }

  // Eliminators with a constant motive need a goal free of the binders they add;
  // any goal works after shifting.
  switch (chosen) {
    case Variable:
      if (auto v = pick_var(s, goal, sized)) return *v;
      break;
    case Redex:
      return gen_redex(s, goal, depth, sized);
    case NatRec:
      return gen_natrec(s, goal, depth, sized);
    case VecRec:
      return gen_vecrec(s, goal, depth, sized);
    case JElim:
      return gen_jelim(s, goal, depth, sized);
    case Intro:
      break;
  }

  switch (goal->tag) {
    case Tag::Nat:
      return gen_nat(s, depth, sized);
    case Tag::VecType:
      return gen_vec(s, goal->kids[1], depth, sized);
    case Tag::FinType:
      if (auto k = as_numeral(goal->kids[0])) return gen_fin(s, *k, depth);
      break;
    case Tag::Sigma: {
      TermPtr a;
      if (has_free_var(goal->kids[1], 0)) {
        a = coin(1, 2) ? mk::numeral(below(cfg_.max_size + 1))
                       : mk::add(mk::numeral(below(cfg_.max_size / 2 + 1)), mk::numeral(below(cfg_.max_size / 2 + 1)));
      } else {
        a = gen(s, goal->kids[0], depth - 1, sized);
      }
      TermPtr b = gen(s, subst(goal->kids[1], 0, a), depth - 1, sized);
      return mk::pair(a, b);
    }
    case Tag::Pi:
      return gen_pi(s, goal, depth);
    case Tag::IdType: {
      const TermPtr& lhs = goal->kids[1];
      if (auto k = as_numeral(lhs); k && *k > 0 && coin(1, 2)) {
        std::uint64_t i = below(*k + 1);
        return mk::refl(coin(1, 2) ? mk::add(mk::numeral(i), mk::numeral(*k - i)) : mk::succ(mk::numeral(*k - 1)));
      }
      return mk::refl(lhs);
    }
    case Tag::BoxType:
      return gen_box(s, goal, depth);
    default:
      break;
  }
  return fallback(s, goal);
}

TermPtr Generator::gen_nat(Scope& s, unsigned depth, bool sized) {
  const GenWeights& w = cfg_.weights;
  unsigned total = 2 + w.add + w.project + w.unbox;
  unsigned r = static_cast<unsigned>(below(total));
  if (r < 1) return mk::numeral(below(cfg_.max_size + 1));
  if (r < 2) return mk::succ(gen(s, mk::nat(), depth - 1, sized));
  r -= 2;
  if (r < w.add) return mk::add(gen(s, mk::nat(), depth - 1, sized), gen(s, mk::nat(), depth - 1, sized));
  r -= w.add;
  if (r < w.project) {
    bool dependent = coin(1, 3);
    TermPtr sig = dependent ? mk::sigma(mk::nat(), mk::vec(mk::nat(), mk::var(0))) : mk::sigma(mk::nat(), mk::nat());
    TermPtr p = inferable(checker_, s.ctx, gen(s, sig, depth - 1, sized), sig);
    return (dependent || coin(1, 2)) ? mk::proj1(p) : mk::proj2(p);
  }
  ExtNat base = zero_cost(checker_.costs);
  std::uint64_t lo = base.is_inf() ? 0 : base.value();
  TermPtr bt = mk::box_type(ExtNat{lo + below(16)}, mk::nat());
  return mk::unbox(inferable(checker_, s.ctx, gen_box(s, bt, depth - 1), bt));
}

TermPtr Generator::gen_vec(Scope& s, const TermPtr& len, unsigned depth, bool sized) {
  if (auto k = as_numeral(len)) {
    if (*k == 0) return mk::nil();
    if (coin(1, 2)) {
      std::vector<TermPtr> elems;
      for (std::uint64_t i = 0; i < *k; ++i) elems.push_back(gen(s, mk::nat(), depth - 1, sized));
      return mk::vec_literal(elems);
    }
    // A vector built by recursion on a numeral equal to k.
    if (coin(1, 2) && cfg_.weights.natrec > 0) {
      std::uint64_t i = below(*k + 1);
      TermPtr scrut = coin(1, 2) ? mk::numeral(*k) : mk::add(mk::numeral(i), mk::numeral(*k - i));
      TermPtr motive = mk::vec(mk::nat(), mk::var(0));
      Scope step = s.bind(mk::nat(), true, "m").bind(mk::vec(mk::nat(), mk::var(0)), false, "ih");
      TermPtr head = gen(step, mk::nat(), depth - 1, sized);
      return mk::natrec(motive, scrut, mk::nil(), mk::cons(head, mk::var(0)));
    }
    return mk::cons(gen(s, mk::nat(), depth - 1, sized), gen(s, mk::vec(mk::nat(), mk::numeral(*k - 1)), depth - 1, sized));
  }
  if (len->tag == Tag::Succ)
    return mk::cons(gen(s, mk::nat(), depth - 1, sized), gen(s, mk::vec(mk::nat(), len->kids[0]), depth - 1, sized));
  return fallback(s, mk::vec(mk::nat(), len));
}

TermPtr Generator::gen_fin(Scope& s, std::uint64_t k, unsigned depth) {
  if (k >= 2 && coin(1, 2)) return mk::fsucc(gen(s, mk::fin(mk::numeral(k - 1)), depth - 1, false));
  return mk::fzero();
}

TermPtr Generator::gen_pi(Scope& s, const TermPtr& goal, unsigned depth) {
  TermPtr dom = goal->kids[0];
  TermPtr cod = goal->kids[1];
  Scope inner = s.bind(dom, dom->tag == Tag::Nat, "x");
  for (int attempt = 0; attempt < 3; ++attempt) {
    TermPtr body = gen(inner, cod, depth - 1, false);
    auto b = bound_of(inner, body, cod);
    if (b && bound_leq(*b, goal->bound, checker_.sample_range, &term_resolver()).proved()) return mk::lam(body);
  }
  return fallback(s, goal);
}

TermPtr Generator::gen_box(Scope& s, const TermPtr& goal, unsigned depth) {
  TermPtr payload_type = goal->kids[0];
  for (int attempt = 0; attempt < 3; ++attempt) {
    TermPtr p = gen(s, payload_type, depth - 1, false);
    auto b = bound_of(s, p, payload_type);
    if (b && bound_leq(*b, bnd::constant(goal->grade), checker_.sample_range, &term_resolver()).proved())
      return mk::box(goal->grade, p);
  }
  return fallback(s, goal);
}

TermPtr Generator::gen_redex(Scope& s, const TermPtr& goal, unsigned depth, bool sized) {
  bool nat_param = coin(2, 3);
  TermPtr param = nat_param ? mk::nat() : mk::vec(mk::nat(), mk::numeral(below(cfg_.max_size / 2 + 1)));
  TermPtr arg = nat_param ? small_scrutinee(s) : gen(s, param, depth - 1, true);
  Scope inner = s.bind(param, nat_param, "x");
  TermPtr cod = shift(goal, 1);
  TermPtr body = gen(inner, cod, depth - 1, sized);
  bool plain = coin(1, 2);
  if (plain) {
    // The checker types an unannotated redex by inferring the argument and the body.
    try {
      Checker ch(checker_);
      ch.infer(inner.ctx, body);
      ch.infer(s.ctx, arg);
    } catch (const CheckError& e) {
      if (e.diag.code != "E-CANNOT-INFER") throw;
      plain = false;
    }
  }
  if (plain) return mk::app(mk::lam(body), arg);
  auto b = bound_of(inner, body, cod);
  TermPtr fn = mk::ann(mk::lam(body), mk::pi(param, *b, cod));
  return mk::app(fn, arg);
}

TermPtr Generator::gen_natrec(Scope& s, const TermPtr& goal, unsigned depth, bool sized) {
  TermPtr scrut = small_scrutinee(s);
  TermPtr zcase = gen(s, goal, depth - 1, sized);
  Scope step = s.bind(mk::nat(), true, "m").bind(shift(goal, 1), false, "ih");
  TermPtr scase = gen(step, shift(goal, 2), depth - 1, sized);
  return mk::natrec(shift(goal, 1), scrut, zcase, scase);
}

TermPtr Generator::gen_vecrec(Scope& s, const TermPtr& goal, unsigned depth, bool sized) {
  TermPtr vt = mk::vec(mk::nat(), mk::numeral(below(cfg_.max_size + 1)));
  TermPtr scrut = inferable(checker_, s.ctx, gen(s, vt, depth - 1, sized), vt);
  TermPtr nilcase = gen(s, goal, depth - 1, sized);
  Scope step = s.bind(mk::nat(), true, "m")
                   .bind(mk::nat(), false, "a")
                   .bind(mk::vec(mk::nat(), mk::var(1)), false, "w")
                   .bind(shift(goal, 3), false, "ih");
  TermPtr conscase = gen(step, shift(goal, 4), depth - 1, sized);
  return mk::vecrec(shift(goal, 2), scrut, nilcase, conscase);
}

TermPtr Generator::gen_jelim(Scope& s, const TermPtr& goal, unsigned depth, bool sized) {
  TermPtr e = gen(s, mk::nat(), depth - 1, sized);
  TermPtr proof = mk::refl(e);
  // Transport along the proof when the goal is a vector of known length.
  if (goal->tag == Tag::VecType && as_numeral(goal->kids[1]) && coin(1, 2)) {
    std::uint64_t k = *as_numeral(goal->kids[1]);
    std::uint64_t i = below(k + 1);
    TermPtr len = mk::add(mk::numeral(i), mk::numeral(k - i));
    TermPtr method = gen(s, mk::vec(mk::nat(), mk::numeral(k)), depth - 1, sized);
    return mk::j(mk::vec(mk::nat(), mk::var(1)), mk::refl(len), method);
  }
  TermPtr method = gen(s, goal, depth - 1, sized);
  return mk::j(shift(goal, 2), proof, method);
}

std::vector<CorpusItem> generate_corpus(const GenConfig& cfg, const CheckerConfig& checker, std::size_t count) {
  Generator g(cfg, checker);
  std::vector<CorpusItem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TermPtr goal = random_goal(g.rng(), cfg, checker.costs);
    out.push_back({goal, g.term(goal)});
  }
  return out;
}

}  // namespace rbm
