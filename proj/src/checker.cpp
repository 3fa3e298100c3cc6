#include "rbmltt/checker.hpp"

#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"

namespace rbm {

namespace {

std::vector<std::string> display_names(const Context& ctx) {
  std::vector<std::string> names(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    std::string n = i < ctx.names.size() ? ctx.names[i] : std::string{};
    names[i] = (n.empty() || n == "_") ? "x" + std::to_string(i) : n;
  }
  return names;
}

std::string show(const Context& ctx, const TermPtr& t) { return pretty(t, display_names(ctx)); }

std::string show_bound(const Context& ctx, const BoundPtr& b) {
  return nf_to_string(bound_normalize(b), display_names(ctx));
}

BoundPtr sum2(BoundPtr a, BoundPtr b) { return bnd::plus(std::move(a), std::move(b)); }

bool is_type_former(Tag t) {
  switch (t) {
    case Tag::Universe:
    case Tag::El:
    case Tag::Pi:
    case Tag::Sigma:
    case Tag::IdType:
    case Tag::Nat:
    case Tag::VecType:
    case Tag::FinType:
    case Tag::BoxType:
      return true;
    default:
      return false;
  }
}

/// Substitutes the argument into a bound living under one binder.
BoundPtr bound_at(const BoundPtr& b, const TermPtr& arg) {
  TermPtr a = normalize(arg);
  return bound_subst_term(b, 0, a, size_of(a));
}

}  // namespace

struct Checker::SpanGuard {
  SpanGuard(Checker& c, const TermPtr& t) : self(c) {
    if (c.spans_) {
      auto it = c.spans_->find(t.get());
      if (it != c.spans_->end()) {
        c.span_stack_.push_back(it->second);
        pushed = true;
      }
    }
  }
  ~SpanGuard() {
    if (pushed) self.span_stack_.pop_back();
  }
  SpanGuard(const SpanGuard&) = delete;
  SpanGuard& operator=(const SpanGuard&) = delete;

  Checker& self;
  bool pushed = false;
};

Checker::Checker(CheckerConfig cfg, const SpanMap* spans) : cfg_(std::move(cfg)), spans_(spans) {
  if (cfg_.sample_range == 0) cfg_.sample_range = 1;
}

void Checker::fail(const std::string& code, const std::string& message) const {
  Diagnostic d;
  d.code = code;
  d.severity = Severity::Error;
  if (!span_stack_.empty()) d.span = span_stack_.back();
  d.message = message;
  throw CheckError(std::move(d));
}

void Checker::warn(const std::string& code, const std::string& message) {
  Diagnostic d;
  d.code = code;
  d.severity = Severity::Warning;
  if (!span_stack_.empty()) d.span = span_stack_.back();
  d.message = message;
  warnings_.push_back(std::move(d));
}

void Checker::mismatch(const Context& ctx, const TermPtr& expected, const TermPtr& actual,
                       const std::string& what) const {
  fail("E-TYPE-MISMATCH", what + ": expected " + show(ctx, normalize(expected)) + ", found " +
                              show(ctx, normalize(actual)));
}

void Checker::require_leq(const BoundPtr& lhs, const BoundPtr& rhs, const char* code, const std::string& what,
                          const Context& ctx) {
  Verdict v = bound_leq(lhs, rhs, cfg_.sample_range, &term_resolver());
  if (v.proved()) return;
  std::string msg = what + ": cost " + show_bound(ctx, lhs) + " vs allowed " + show_bound(ctx, rhs);
  if (v.refuted()) fail(code, v.witness.empty() ? msg : msg + ", violated at " + v.str(display_names(ctx)));
  if (cfg_.strict) fail("E-EMPIRICAL-DOMINANCE", msg + " holds only on samples " + v.str());
  warn("W-EMPIRICAL-DOMINANCE", msg + " holds only on samples " + v.str());
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

void Checker::check_context(const Context& ctx) {
  Context prefix;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    try {
      formation_impl(prefix, ctx.types[i]);
    } catch (CheckError& e) {
      e.diag.message = "context entry " + std::to_string(i) + ": " + e.diag.message;
      throw;
    }
    prefix = prefix.extend(ctx.types[i], i < ctx.names.size() ? ctx.names[i] : std::string{});
  }
}

BoundPtr Checker::infer_type_formation(const Context& ctx, const TermPtr& a) { return formation_impl(ctx, a); }

TypingResult Checker::infer(const Context& ctx, const TermPtr& t) { return infer_impl(ctx, t); }

BoundPtr Checker::check(const Context& ctx, const TermPtr& t, const TermPtr& type) {
  return check_impl(ctx, t, type);
}

TypingResult Checker::check_top(const Context& ctx, const TermPtr& t, const TermPtr& type) {
  TypingResult r;
  if (type) {
    formation_impl(ctx, type);
    r.type = type;
    r.bound = check_impl(ctx, t, type);
  } else {
    r = infer_impl(ctx, t);
  }
  if (!cfg_.budget.is_inf()) {
    Verdict v = bound_leq(r.bound, bnd::constant(cfg_.budget), cfg_.sample_range, &term_resolver());
    if (!v.proved())
      warn("W-AMBIENT-BUDGET", "bound " + show_bound(ctx, r.bound) + " may exceed the ambient budget " +
                                   cfg_.budget.str() + " (" + v.str(display_names(ctx)) + ")");
  }
  return r;
}

bool Checker::subsumes(const TermPtr& actual, const TermPtr& expected) const {
  TermPtr a = normalize(actual);
  TermPtr e = normalize(expected);
  if (structural_eq(a, e)) return true;
  if (a->tag != e->tag) return false;
  switch (a->tag) {
    case Tag::Universe:
      return a->grade <= e->grade;
    case Tag::BoxType:
      return a->grade <= e->grade && subsumes(a->kids[0], e->kids[0]);
    case Tag::Pi:
      return structural_eq(a->kids[0], e->kids[0]) &&
             bound_leq(a->bound, e->bound, cfg_.sample_range, &term_resolver()).proved() &&
             subsumes(a->kids[1], e->kids[1]);
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Formation
// ---------------------------------------------------------------------------

void Checker::check_size_vars(const Context& ctx, const BoundPtr& b) {
  // depth counts binders introduced inside the bound (sum indices, at-binders).
  std::function<void(const BoundPtr&, std::size_t)> walk = [&](const BoundPtr& x, std::size_t depth) {
    switch (x->tag) {
      case BTag::Var:
        if (x->index >= depth) {
          std::size_t i = x->index - depth;
          if (i >= ctx.size()) fail("E-UNBOUND-VAR", "size variable #" + std::to_string(i) + " is out of scope");
          if (normalize(ctx.lookup(i))->tag != Tag::Nat)
            fail("E-TYPE-MISMATCH", "size variable " + display_names(ctx)[ctx.size() - 1 - i] +
                                        " in a bound must be a natural number");
        }
        return;
      case BTag::Apply: {
        Context inner = ctx;
        for (std::size_t k = 0; k < depth; ++k) inner = inner.extend(mk::nat());
        check_impl(inner, x->term, mk::nat());
        walk(x->a, depth + 1);
        return;
      }
      case BTag::Sum:
        walk(x->a, depth);
        walk(x->b, depth + 1);
        return;
      default:
        if (x->a) walk(x->a, depth);
        if (x->b) walk(x->b, depth);
        return;
    }
  };
  walk(b, 0);
}

BoundPtr Checker::formation_impl(const Context& ctx, const TermPtr& a) {
  SpanGuard guard(*this, a);
  const auto& k = a->kids;
  switch (a->tag) {
    case Tag::Nat:
      return delta(Delta::Nat);
    case Tag::Universe:
      if (!(a->grade <= cfg_.budget))
        warn("W-AMBIENT-BUDGET", "universe grade " + a->grade.str() + " exceeds the ambient budget " +
                                     cfg_.budget.str());
      return delta(Delta::U);
    case Tag::VecType: {
      BoundPtr be = formation_impl(ctx, k[0]);
      BoundPtr bn = check_impl(ctx, k[1], mk::nat());
      return bnd::plus({be, bn, delta(Delta::Vec)});
    }
    case Tag::FinType:
      return sum2(check_impl(ctx, k[0], mk::nat()), delta(Delta::Fin));
    case Tag::Pi: {
      BoundPtr bd = formation_impl(ctx, k[0]);
      Context inner = ctx.extend(k[0]);
      formation_impl(inner, k[1]);
      check_size_vars(inner, a->bound);
      return sum2(bd, delta(Delta::Pi));
    }
    case Tag::Sigma: {
      BoundPtr bd = formation_impl(ctx, k[0]);
      formation_impl(ctx.extend(k[0]), k[1]);
      return sum2(bd, delta(Delta::Sigma));
    }
    case Tag::IdType: {
      BoundPtr bt = formation_impl(ctx, k[0]);
      BoundPtr bx = check_impl(ctx, k[1], k[0]);
      BoundPtr by = check_impl(ctx, k[2], k[0]);
      return bnd::plus({bt, bx, by, delta(Delta::Id)});
    }
    case Tag::BoxType:
      return sum2(formation_impl(ctx, k[0]), delta(Delta::Box));
    case Tag::El: {
      TypingResult r = infer_impl(ctx, k[0]);
      if (normalize(r.type)->tag != Tag::Universe)
        fail("E-TYPE-MISMATCH", "El expects a type code, found a term of type " + show(ctx, normalize(r.type)));
      return sum2(r.bound, delta(Delta::El));
    }
    default: {
      TypingResult r = infer_impl(ctx, a);
      if (normalize(r.type)->tag != Tag::Universe)
        fail("E-TYPE-MISMATCH", "expected a type, found " + show(ctx, a) + " : " + show(ctx, normalize(r.type)));
      return r.bound;
    }
  }
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

TypingResult Checker::infer_impl(const Context& ctx, const TermPtr& t) {
  SpanGuard guard(*this, t);
  const auto& k = t->kids;
  if (is_type_former(t->tag)) {
    BoundPtr b = formation_impl(ctx, t);
    if (t->tag == Tag::Universe) return {mk::universe(ExtNat::inf()), b};
    ExtNat grade = ExtNat::inf();
    if (bound_is_closed(b)) {
      try {
        grade = bound_eval(b, SizeEnv{}, &term_resolver());
      } catch (const BoundError&) {
      }
    }
    return {mk::universe(grade), b};
  }
  switch (t->tag) {
    case Tag::Var:
      if (t->index >= ctx.size()) fail("E-UNBOUND-VAR", "variable #" + std::to_string(t->index) + " is out of scope");
      return {ctx.lookup(t->index), bnd::bot()};
    case Tag::Lam:
      fail("E-CANNOT-INFER", "cannot infer the type of a function; check it against a Pi type");
    case Tag::App:
      return infer_app(ctx, t);
    case Tag::Ann: {
      formation_impl(ctx, k[1]);
      return {k[1], check_impl(ctx, k[0], k[1])};
    }
    case Tag::Pair: {
      TypingResult a = infer_impl(ctx, k[0]);
      TypingResult b = infer_impl(ctx, k[1]);
      return {mk::sigma(a.type, shift(b.type, 1)), sum2(a.bound, b.bound)};
    }
    case Tag::Proj1:
    case Tag::Proj2: {
      TypingResult p = infer_impl(ctx, k[0]);
      TermPtr s = normalize(p.type);
      if (s->tag != Tag::Sigma) fail("E-TYPE-MISMATCH", "projection from non-pair type " + show(ctx, s));
      if (t->tag == Tag::Proj1) return {s->kids[0], sum2(p.bound, delta(Delta::Pi1))};
      return {subst(s->kids[1], 0, mk::proj1(k[0])), sum2(p.bound, delta(Delta::Pi2))};
    }
    case Tag::Refl: {
      TypingResult a = infer_impl(ctx, k[0]);
      return {mk::id(a.type, k[0], k[0]), sum2(a.bound, delta(Delta::Refl))};
    }
    case Tag::J:
      return infer_j(ctx, t);
    case Tag::Zero:
      return {mk::nat(), delta(Delta::Z)};
    case Tag::Succ:
      return {mk::nat(), sum2(check_impl(ctx, k[0], mk::nat()), delta(Delta::S))};
    case Tag::NatRec:
      return infer_natrec(ctx, t);
    case Tag::VecRec:
      return infer_vecrec(ctx, t);
    case Tag::Nil:
      fail("E-CANNOT-INFER", "cannot infer the element type of nil; add a type annotation");
    case Tag::Cons: {
      if (k[1]->tag == Tag::Nil) {
        TypingResult h = infer_impl(ctx, k[0]);
        return {mk::vec(h.type, mk::numeral(1)), bnd::plus({h.bound, delta(Delta::Nil), delta(Delta::Cons)})};
      }
      TypingResult tl = infer_impl(ctx, k[1]);
      TermPtr v = normalize(tl.type);
      if (v->tag != Tag::VecType) fail("E-TYPE-MISMATCH", "tail of cons is not a vector: " + show(ctx, v));
      BoundPtr bh = check_impl(ctx, k[0], v->kids[0]);
      return {mk::vec(v->kids[0], mk::succ(v->kids[1])), bnd::plus({bh, tl.bound, delta(Delta::Cons)})};
    }
    case Tag::FZero:
      fail("E-CANNOT-INFER", "cannot infer the bound of fzero; add a type annotation");
    case Tag::FSucc: {
      TypingResult i = infer_impl(ctx, k[0]);
      TermPtr f = normalize(i.type);
      if (f->tag != Tag::FinType) fail("E-TYPE-MISMATCH", "fsucc expects a Fin element, found " + show(ctx, f));
      return {mk::fin(mk::succ(f->kids[0])), sum2(i.bound, delta(Delta::FS))};
    }
    case Tag::BoxIntro: {
      TypingResult p = infer_impl(ctx, k[0]);
      require_leq(p.bound, bnd::constant(t->grade), "E-BOX-BUDGET", "box payload", ctx);
      return {mk::box_type(t->grade, p.type), p.bound};
    }
    case Tag::Unbox: {
      TypingResult p = infer_impl(ctx, k[0]);
      TermPtr b = normalize(p.type);
      if (b->tag != Tag::BoxType) fail("E-TYPE-MISMATCH", "unbox expects a boxed value, found " + show(ctx, b));
      return {b->kids[0], sum2(p.bound, delta(Delta::Unbox))};
    }
    case Tag::PrimAdd: {
      BoundPtr a = check_impl(ctx, k[0], mk::nat());
      BoundPtr b = check_impl(ctx, k[1], mk::nat());
      return {mk::nat(), bnd::plus({a, b, delta(Delta::Add)})};
    }
    default:
      fail("E-CANNOT-INFER", std::string("cannot infer a type for ") + std::string(tag_name(t->tag)));
  }
}

TypingResult Checker::infer_app(const Context& ctx, const TermPtr& t) {
  const TermPtr& f = t->kids[0];
  const TermPtr& a = t->kids[1];
  if (f->tag == Tag::Lam) {
    // Redex with an unannotated function: type the argument first, then the body.
    TypingResult ra = infer_impl(ctx, a);
    TypingResult rb = infer_impl(ctx.extend(ra.type), f->kids[0]);
    return {subst(rb.type, 0, a), bnd::plus({ra.bound, bound_at(rb.bound, a), delta(Delta::App)})};
  }
  TypingResult rf = infer_impl(ctx, f);
  TermPtr p = normalize(rf.type);
  if (p->tag != Tag::Pi) fail("E-TYPE-MISMATCH", "applying a non-function of type " + show(ctx, p));
  BoundPtr ba = check_impl(ctx, a, p->kids[0]);
  return {subst(p->kids[1], 0, a), bnd::plus({rf.bound, ba, bound_at(p->bound, a), delta(Delta::App)})};
}

TypingResult Checker::infer_j(const Context& ctx, const TermPtr& t) {
  const TermPtr& motive = t->kids[0];
  TypingResult rp = infer_impl(ctx, t->kids[1]);
  TermPtr id = normalize(rp.type);
  if (id->tag != Tag::IdType) fail("E-TYPE-MISMATCH", "jelim expects an identity proof, found " + show(ctx, id));
  const TermPtr& a = id->kids[0];
  const TermPtr& x = id->kids[1];
  const TermPtr& y = id->kids[2];
  Context mctx = ctx.extend(a, "z").extend(mk::id(shift(a, 1), shift(x, 1), mk::var(0)), "w");
  formation_impl(mctx, motive);
  BoundPtr bd = check_impl(ctx, t->kids[2], instantiate(motive, {x, mk::refl(x)}));
  return {instantiate(motive, {y, t->kids[1]}), bnd::plus({rp.bound, bd, delta(Delta::J)})};
}

TypingResult Checker::infer_natrec(const Context& ctx, const TermPtr& t) {
  const TermPtr& motive = t->kids[0];
  const TermPtr& n = t->kids[1];
  BoundPtr bn = check_impl(ctx, n, mk::nat());
  Context mctx = ctx.extend(mk::nat(), "m");
  formation_impl(mctx, motive);
  BoundPtr bz = check_impl(ctx, t->kids[2], instantiate(motive, {mk::zero()}));
  Context sctx = mctx.extend(motive, "ih");
  TermPtr step_type = shift(replace_top(motive, mk::succ(mk::var(0))), 1);
  BoundPtr bs = check_impl(sctx, t->kids[3], step_type);
  if (bound_mentions(bs, 0))
    fail("E-STEP-BOUND", "the cost of a natrec step may depend on the predecessor only, not on ih: " +
                             show_bound(sctx, bs));
  BoundPtr step = sum2(bound_shift(bs, -1, 0), delta(Delta::NatRec));
  BoundPtr total = bnd::plus({bn, bz, delta(Delta::NatRec), bnd::sum(size_of_normal(n), step)});
  return {instantiate(motive, {n}), total};
}

TypingResult Checker::infer_vecrec(const Context& ctx, const TermPtr& t) {
  const TermPtr& motive = t->kids[0];
  TypingResult rv = infer_impl(ctx, t->kids[1]);
  TermPtr vt = normalize(rv.type);
  if (vt->tag != Tag::VecType) fail("E-TYPE-MISMATCH", "vecrec expects a vector, found " + show(ctx, vt));
  const TermPtr& elem = vt->kids[0];
  const TermPtr& len = vt->kids[1];

  Context mctx = ctx.extend(mk::nat(), "m").extend(mk::vec(shift(elem, 1), mk::var(0)), "w");
  formation_impl(mctx, motive);
  BoundPtr bnil = check_impl(ctx, t->kids[2], instantiate(motive, {mk::zero(), mk::nil()}));

  // Step context: m : Nat, a : A, w : Vec A m, ih : C(m, w).
  Context sctx = ctx.extend(mk::nat(), "m")
                     .extend(shift(elem, 1), "a")
                     .extend(mk::vec(shift(elem, 2), mk::var(1)), "w");
  sctx = sctx.extend(shift(motive, 1, 1), "ih");
  TermPtr step_type =
      shift(instantiate(shift(motive, 3, 2), {mk::succ(mk::var(2)), mk::cons(mk::var(1), mk::var(0))}), 1);
  BoundPtr bs = check_impl(sctx, t->kids[3], step_type);
  for (std::size_t i : {0, 1, 2})
    if (bound_mentions(bs, i))
      fail("E-STEP-BOUND", "the cost of a vecrec step may depend on the tail length only, not on the element, "
                           "tail, or ih: " + show_bound(sctx, bs));
  BoundPtr step = sum2(bound_shift(bs, -3, 0), delta(Delta::VecRec));
  BoundPtr total = bnd::plus({rv.bound, bnil, delta(Delta::VecRec), bnd::sum(size_of(len), step)});
  return {instantiate(motive, {len, t->kids[1]}), total};
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

BoundPtr Checker::check_impl(const Context& ctx, const TermPtr& t, const TermPtr& type) {
  SpanGuard guard(*this, t);
  TermPtr T = normalize(type);
  const auto& k = t->kids;
  switch (t->tag) {
    case Tag::Lam: {
      if (T->tag != Tag::Pi) fail("E-TYPE-MISMATCH", "function checked against non-function type " + show(ctx, T));
      Context inner = ctx.extend(T->kids[0]);
      BoundPtr body = check_impl(inner, k[0], T->kids[1]);
      require_leq(body, T->bound, "E-BOUND-EXCEEDED", "function body", inner);
      return bnd::bot();
    }
    case Tag::Pair:
      if (T->tag == Tag::Sigma) {
        BoundPtr ba = check_impl(ctx, k[0], T->kids[0]);
        BoundPtr bb = check_impl(ctx, k[1], subst(T->kids[1], 0, k[0]));
        return sum2(ba, bb);
      }
      break;
    case Tag::Refl:
      if (T->tag == Tag::IdType) {
        BoundPtr ba = check_impl(ctx, k[0], T->kids[0]);
        if (!convertible(k[0], T->kids[1]) || !convertible(k[0], T->kids[2]))
          mismatch(ctx, T, mk::id(T->kids[0], k[0], k[0]), "reflexivity proof");
        return sum2(ba, delta(Delta::Refl));
      }
      break;
    case Tag::Nil:
      if (T->tag == Tag::VecType) {
        if (T->kids[1]->tag != Tag::Zero) mismatch(ctx, T, mk::vec(T->kids[0], mk::zero()), "empty vector");
        return delta(Delta::Nil);
      }
      break;
    case Tag::Cons:
      if (T->tag == Tag::VecType) {
        if (T->kids[1]->tag != Tag::Succ)
          fail("E-TYPE-MISMATCH", "non-empty vector checked against " + show(ctx, T));
        BoundPtr bh = check_impl(ctx, k[0], T->kids[0]);
        BoundPtr bt = check_impl(ctx, k[1], mk::vec(T->kids[0], T->kids[1]->kids[0]));
        return bnd::plus({bh, bt, delta(Delta::Cons)});
      }
      break;
    case Tag::FZero:
      if (T->tag == Tag::FinType) {
        if (T->kids[0]->tag != Tag::Succ) fail("E-TYPE-MISMATCH", "fzero checked against " + show(ctx, T));
        return delta(Delta::FZ);
      }
      break;
    case Tag::FSucc:
      if (T->tag == Tag::FinType) {
        if (T->kids[0]->tag != Tag::Succ) fail("E-TYPE-MISMATCH", "fsucc checked against " + show(ctx, T));
        return sum2(check_impl(ctx, k[0], mk::fin(T->kids[0]->kids[0])), delta(Delta::FS));
      }
      break;
    case Tag::BoxIntro:
      if (T->tag == Tag::BoxType) {
        BoundPtr b = check_impl(ctx, k[0], T->kids[0]);
        require_leq(b, bnd::constant(t->grade), "E-BOX-BUDGET", "box payload", ctx);
        if (!(t->grade <= T->grade)) mismatch(ctx, T, mk::box_type(t->grade, T->kids[0]), "box grade");
        return b;
      }
      break;
    case Tag::App:
      if (k[0]->tag == Tag::Lam) {
        TypingResult ra = infer_impl(ctx, k[1]);
        BoundPtr bb = check_impl(ctx.extend(ra.type), k[0]->kids[0], shift(T, 1));
        return bnd::plus({ra.bound, bound_at(bb, k[1]), delta(Delta::App)});
      }
      break;
    default:
      if (is_type_former(t->tag) && T->tag == Tag::Universe) {
        BoundPtr b = formation_impl(ctx, t);
        require_leq(b, bnd::constant(T->grade), "E-UNIVERSE-GRADE", "type code in universe " + T->grade.str(), ctx);
        return b;
      }
      break;
  }
  TypingResult r = infer_impl(ctx, t);
  if (!subsumes(r.type, T)) mismatch(ctx, T, r.type, "type mismatch");
  return r.bound;
}

}  // namespace rbm
