#include "rbmltt/term.hpp"

#include <sstream>

namespace rbm {

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::Var: return "Var";
    case Tag::Universe: return "U";
    case Tag::El: return "El";
    case Tag::Pi: return "Pi";
    case Tag::Lam: return "Lam";
    case Tag::App: return "App";
    case Tag::Sigma: return "Sigma";
    case Tag::Pair: return "Pair";
    case Tag::Proj1: return "fst";
    case Tag::Proj2: return "snd";
    case Tag::IdType: return "Id";
    case Tag::Refl: return "refl";
    case Tag::J: return "J";
    case Tag::Nat: return "Nat";
    case Tag::Zero: return "zero";
    case Tag::Succ: return "succ";
    case Tag::NatRec: return "natrec";
    case Tag::VecType: return "Vec";
    case Tag::Nil: return "nil";
    case Tag::Cons: return "cons";
    case Tag::VecRec: return "vecrec";
    case Tag::FinType: return "Fin";
    case Tag::FZero: return "fzero";
    case Tag::FSucc: return "fsucc";
    case Tag::BoxType: return "Box";
    case Tag::BoxIntro: return "box";
    case Tag::Unbox: return "unbox";
    case Tag::PrimAdd: return "add";
    case Tag::Ann: return "ann";
  }
  return "?";
}

std::size_t binders_of(Tag t, std::size_t child) {
  switch (t) {
    case Tag::Pi:
    case Tag::Sigma:
      return child == 1 ? 1 : 0;
    case Tag::Lam:
      return 1;
    case Tag::J:
      return child == 0 ? 2 : 0;
    case Tag::NatRec:
      return child == 0 ? 1 : child == 3 ? 2 : 0;
    case Tag::VecRec:
      return child == 0 ? 2 : child == 3 ? 4 : 0;
    default:
      return 0;
  }
}

namespace mk {

namespace {
TermPtr node(Tag tag, std::vector<TermPtr> kids = {}) {
  Term t;
  t.tag = tag;
  t.kids = std::move(kids);
  return std::make_shared<const Term>(std::move(t));
}
}  // namespace

TermPtr var(std::size_t i) {
  Term t;
  t.tag = Tag::Var;
  t.index = i;
  return std::make_shared<const Term>(std::move(t));
}

TermPtr universe(ExtNat grade) {
  Term t;
  t.tag = Tag::Universe;
  t.grade = grade;
  return std::make_shared<const Term>(std::move(t));
}

TermPtr el(TermPtr a) { return node(Tag::El, {std::move(a)}); }

TermPtr pi(TermPtr dom, BoundPtr bound, TermPtr cod) {
  Term t;
  t.tag = Tag::Pi;
  t.bound = bound ? std::move(bound) : bnd::bot();
  t.kids = {std::move(dom), std::move(cod)};
  return std::make_shared<const Term>(std::move(t));
}

TermPtr arrow(TermPtr dom, BoundPtr bound, TermPtr cod) { return pi(std::move(dom), std::move(bound), shift(cod, 1)); }

TermPtr lam(TermPtr body) { return node(Tag::Lam, {std::move(body)}); }
TermPtr app(TermPtr f, TermPtr a) { return node(Tag::App, {std::move(f), std::move(a)}); }

TermPtr app(TermPtr f, std::initializer_list<TermPtr> args) {
  for (const auto& a : args) f = app(f, a);
  return f;
}

TermPtr sigma(TermPtr a, TermPtr b) { return node(Tag::Sigma, {std::move(a), std::move(b)}); }
TermPtr pair(TermPtr a, TermPtr b) { return node(Tag::Pair, {std::move(a), std::move(b)}); }
TermPtr proj1(TermPtr p) { return node(Tag::Proj1, {std::move(p)}); }
TermPtr proj2(TermPtr p) { return node(Tag::Proj2, {std::move(p)}); }
TermPtr id(TermPtr type, TermPtr lhs, TermPtr rhs) {
  return node(Tag::IdType, {std::move(type), std::move(lhs), std::move(rhs)});
}
TermPtr refl(TermPtr a) { return node(Tag::Refl, {std::move(a)}); }
TermPtr j(TermPtr motive, TermPtr proof, TermPtr method) {
  return node(Tag::J, {std::move(motive), std::move(proof), std::move(method)});
}
TermPtr nat() { return node(Tag::Nat); }
TermPtr zero() { return node(Tag::Zero); }
TermPtr succ(TermPtr n) { return node(Tag::Succ, {std::move(n)}); }

TermPtr numeral(std::uint64_t n) {
  TermPtr t = zero();
  for (std::uint64_t i = 0; i < n; ++i) t = succ(t);
  return t;
}

TermPtr natrec(TermPtr motive, TermPtr scrut, TermPtr zcase, TermPtr scase) {
  return node(Tag::NatRec, {std::move(motive), std::move(scrut), std::move(zcase), std::move(scase)});
}
TermPtr vec(TermPtr elem, TermPtr len) { return node(Tag::VecType, {std::move(elem), std::move(len)}); }
TermPtr nil() { return node(Tag::Nil); }
TermPtr cons(TermPtr head, TermPtr tail) { return node(Tag::Cons, {std::move(head), std::move(tail)}); }

TermPtr vec_literal(const std::vector<TermPtr>& elems) {
  TermPtr t = nil();
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) t = cons(*it, t);
  return t;
}

TermPtr vecrec(TermPtr motive, TermPtr scrut, TermPtr nilcase, TermPtr conscase) {
  return node(Tag::VecRec, {std::move(motive), std::move(scrut), std::move(nilcase), std::move(conscase)});
}
TermPtr fin(TermPtr n) { return node(Tag::FinType, {std::move(n)}); }
TermPtr fzero() { return node(Tag::FZero); }
TermPtr fsucc(TermPtr i) { return node(Tag::FSucc, {std::move(i)}); }

TermPtr box_type(ExtNat grade, TermPtr a) {
  Term t;
  t.tag = Tag::BoxType;
  t.grade = grade;
  t.kids = {std::move(a)};
  return std::make_shared<const Term>(std::move(t));
}

TermPtr box(ExtNat grade, TermPtr payload) {
  Term t;
  t.tag = Tag::BoxIntro;
  t.grade = grade;
  t.kids = {std::move(payload)};
  return std::make_shared<const Term>(std::move(t));
}

TermPtr unbox(TermPtr t) { return node(Tag::Unbox, {std::move(t)}); }
TermPtr add(TermPtr a, TermPtr b) { return node(Tag::PrimAdd, {std::move(a), std::move(b)}); }
TermPtr ann(TermPtr t, TermPtr type) { return node(Tag::Ann, {std::move(t), std::move(type)}); }

TermPtr with_kids(const Term& t, std::vector<TermPtr> kids, BoundPtr bound) {
  Term n = t;
  n.kids = std::move(kids);
  if (bound) n.bound = std::move(bound);
  return std::make_shared<const Term>(std::move(n));
}

}  // namespace mk

TermPtr Context::lookup(std::size_t i) const {
  if (i >= types.size()) return nullptr;
  return shift(types[types.size() - 1 - i], static_cast<std::ptrdiff_t>(i + 1));
}

Context Context::extend(TermPtr type, std::string name) const {
  Context c = *this;
  c.types.push_back(std::move(type));
  c.names.resize(c.types.size() - 1);
  c.names.push_back(std::move(name));
  return c;
}

namespace {

TermPtr shift_rec(const TermPtr& t, std::ptrdiff_t amount, std::size_t cutoff) {
  if (t->tag == Tag::Var) {
    if (t->index < cutoff) return t;
    auto ni = static_cast<std::ptrdiff_t>(t->index) + amount;
    if (ni < 0) throw std::logic_error("negative de Bruijn index after shift");
    return mk::var(static_cast<std::size_t>(ni));
  }
  if (t->kids.empty() && !t->bound) return t;
  std::vector<TermPtr> kids;
  kids.reserve(t->kids.size());
  bool changed = false;
  for (std::size_t i = 0; i < t->kids.size(); ++i) {
    kids.push_back(shift_rec(t->kids[i], amount, cutoff + binders_of(t->tag, i)));
    changed = changed || kids.back() != t->kids[i];
  }
  BoundPtr b;
  if (t->tag == Tag::Pi) {
    b = bound_shift(t->bound, amount, cutoff + 1);
    changed = changed || b != t->bound;
  }
  if (!changed) return t;
  return mk::with_kids(*t, std::move(kids), b);
}

TermPtr subst_rec(const TermPtr& t, std::size_t j, const TermPtr& u, std::size_t depth) {
  if (t->tag == Tag::Var) {
    std::size_t target = j + depth;
    if (t->index == target) return shift(u, static_cast<std::ptrdiff_t>(depth));
    if (t->index > target) return mk::var(t->index - 1);
    return t;
  }
  if (t->kids.empty() && !t->bound) return t;
  std::vector<TermPtr> kids;
  kids.reserve(t->kids.size());
  for (std::size_t i = 0; i < t->kids.size(); ++i)
    kids.push_back(subst_rec(t->kids[i], j, u, depth + binders_of(t->tag, i)));
  BoundPtr b;
  if (t->tag == Tag::Pi) {
    TermPtr inner = shift(u, static_cast<std::ptrdiff_t>(depth + 1));
    b = bound_subst_term(t->bound, j + depth + 1, inner, size_of(inner));
  }
  return mk::with_kids(*t, std::move(kids), b);
}

int cmp_bound(const BoundPtr& a, const BoundPtr& b) {
  BoundNF x = bound_normalize(a);
  BoundNF y = bound_normalize(b);
  if (x == y) return 0;
  std::string sx = nf_to_string(x), sy = nf_to_string(y);
  return sx < sy ? -1 : sx > sy ? 1 : 0;
}

void free_rec(const TermPtr& t, std::size_t depth, std::size_t& bound) {
  if (t->tag == Tag::Var) {
    if (t->index >= depth) bound = std::max(bound, t->index - depth + 1);
    return;
  }
  for (std::size_t i = 0; i < t->kids.size(); ++i) free_rec(t->kids[i], depth + binders_of(t->tag, i), bound);
  if (t->tag == Tag::Pi) {
    for (std::size_t v : bound_free_vars(t->bound))
      if (v >= depth + 1) bound = std::max(bound, v - depth);
  }
}

bool has_free_rec(const TermPtr& t, std::size_t target) {
  if (t->tag == Tag::Var) return t->index == target;
  for (std::size_t i = 0; i < t->kids.size(); ++i)
    if (has_free_rec(t->kids[i], target + binders_of(t->tag, i))) return true;
  if (t->tag == Tag::Pi && bound_mentions(t->bound, target + 1)) return true;
  return false;
}

void debug_rec(std::ostream& os, const TermPtr& t) {
  switch (t->tag) {
    case Tag::Var:
      os << '#' << t->index;
      return;
    case Tag::Universe:
      os << "U[" << t->grade << ']';
      return;
    case Tag::BoxType:
    case Tag::BoxIntro:
      os << '(' << tag_name(t->tag) << '[' << t->grade << "] ";
      debug_rec(os, t->kids[0]);
      os << ')';
      return;
    case Tag::Pi:
      os << "(Pi ";
      debug_rec(os, t->kids[0]);
      os << " [" << bound_to_string(t->bound) << "] ";
      debug_rec(os, t->kids[1]);
      os << ')';
      return;
    default:
      break;
  }
  if (auto n = as_numeral(t)) {
    os << *n;
    return;
  }
  if (t->kids.empty()) {
    os << tag_name(t->tag);
    return;
  }
  os << '(' << tag_name(t->tag);
  for (const auto& k : t->kids) {
    os << ' ';
    debug_rec(os, k);
  }
  os << ')';
}

}  // namespace

TermPtr shift(const TermPtr& t, std::ptrdiff_t amount, std::size_t cutoff) {
  if (amount == 0) return t;
  return shift_rec(t, amount, cutoff);
}

TermPtr subst(const TermPtr& t, std::size_t index, const TermPtr& replacement) {
  return subst_rec(t, index, replacement, 0);
}

TermPtr instantiate(const TermPtr& body, const std::vector<TermPtr>& args) {
  // Innermost binder is index 0 and corresponds to args.back().
  TermPtr r = body;
  const std::size_t n = args.size();
  for (std::size_t k = 0; k < n; ++k) {
    // After k substitutions the remaining binders are indices 0..n-k-1, the
    // current innermost is args[n-1-k]; arguments live outside all binders.
    const TermPtr& a = args[n - 1 - k];
    r = subst(r, 0, shift(a, static_cast<std::ptrdiff_t>(n - 1 - k)));
  }
  return r;
}

TermPtr replace_top(const TermPtr& body, const TermPtr& replacement) {
  return subst(shift(body, 1, 1), 0, replacement);
}

bool structural_eq(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (a->tag != b->tag || a->kids.size() != b->kids.size()) return false;
  switch (a->tag) {
    case Tag::Var:
      return a->index == b->index;
    case Tag::Universe:
    case Tag::BoxType:
    case Tag::BoxIntro:
      if (a->grade != b->grade) return false;
      break;
    case Tag::Pi:
      if (!(bound_normalize(a->bound) == bound_normalize(b->bound))) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!structural_eq(a->kids[i], b->kids[i])) return false;
  return true;
}

int term_compare(const TermPtr& a, const TermPtr& b) {
  if (a == b) return 0;
  if (a->tag != b->tag) return a->tag < b->tag ? -1 : 1;
  switch (a->tag) {
    case Tag::Var:
      if (a->index != b->index) return a->index < b->index ? -1 : 1;
      return 0;
    case Tag::Universe:
    case Tag::BoxType:
    case Tag::BoxIntro:
      if (a->grade != b->grade) return a->grade < b->grade ? -1 : 1;
      break;
    case Tag::Pi:
      if (int c = cmp_bound(a->bound, b->bound)) return c;
      break;
    default:
      break;
  }
  if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (int c = term_compare(a->kids[i], b->kids[i])) return c;
  return 0;
}

bool has_free_var(const TermPtr& t, std::size_t index) { return has_free_rec(t, index); }

std::size_t free_var_bound(const TermPtr& t) {
  std::size_t b = 0;
  free_rec(t, 0, b);
  return b;
}

bool is_closed(const TermPtr& t) { return free_var_bound(t) == 0; }

std::optional<std::uint64_t> as_numeral(const TermPtr& t) {
  std::uint64_t n = 0;
  const Term* p = t.get();
  while (p->tag == Tag::Succ) {
    ++n;
    p = p->kids[0].get();
  }
  if (p->tag != Tag::Zero) return std::nullopt;
  return n;
}

std::optional<std::vector<TermPtr>> as_vec_literal(const TermPtr& t) {
  std::vector<TermPtr> out;
  const Term* p = t.get();
  while (p->tag == Tag::Cons) {
    out.push_back(p->kids[0]);
    p = p->kids[1].get();
  }
  if (p->tag != Tag::Nil) return std::nullopt;
  return out;
}

std::optional<BoundPtr> syntactic_size(const TermPtr& t) {
  switch (t->tag) {
    case Tag::Zero:
      return bnd::bot();
    case Tag::Var:
      return bnd::var(t->index);
    case Tag::Succ: {
      std::uint64_t c = 0;
      const TermPtr* p = &t;
      while ((*p)->tag == Tag::Succ) {
        ++c;
        p = &(*p)->kids[0];
      }
      if ((*p)->tag == Tag::Zero) return bnd::constant(ExtNat{c});
      auto inner = syntactic_size(*p);
      if (!inner) return std::nullopt;
      return bnd::plus(*inner, bnd::constant(ExtNat{c}));
    }
    case Tag::PrimAdd: {
      auto a = syntactic_size(t->kids[0]);
      auto b = syntactic_size(t->kids[1]);
      if (!a || !b) return std::nullopt;
      return bnd::plus(*a, *b);
    }
    default:
      return std::nullopt;
  }
}

bool size_decomposes(const TermPtr& t) {
  return t->tag == Tag::Zero || t->tag == Tag::Var || t->tag == Tag::Succ || t->tag == Tag::PrimAdd;
}

BoundPtr size_of(const TermPtr& t) {
  if (auto s = syntactic_size(t)) return *s;
  switch (t->tag) {
    case Tag::Succ:
      return bnd::plus(size_of(t->kids[0]), bnd::constant(ExtNat{1}));
    case Tag::PrimAdd:
      return bnd::plus(size_of(t->kids[0]), size_of(t->kids[1]));
    default:
      return bnd::apply(bnd::var(0), t);
  }
}

std::string debug_string(const TermPtr& t) {
  std::ostringstream os;
  debug_rec(os, t);
  return os.str();
}

std::size_t term_size(const TermPtr& t) {
  std::size_t n = 1;
  for (const auto& k : t->kids) n += term_size(k);
  return n;
}

}  // namespace rbm
