#include "rbmltt/normalize.hpp"

#include <algorithm>

namespace rbm {

namespace {

TermPtr nf(const TermPtr& t);

void flatten_sum(const TermPtr& t, std::uint64_t& constant, std::vector<TermPtr>& atoms) {
  switch (t->tag) {
    case Tag::Zero:
      return;
    case Tag::Succ:
      ++constant;
      flatten_sum(t->kids[0], constant, atoms);
      return;
    case Tag::PrimAdd:
      flatten_sum(t->kids[0], constant, atoms);
      flatten_sum(t->kids[1], constant, atoms);
      return;
    default:
      atoms.push_back(t);
  }
}

TermPtr canonical_sum(const TermPtr& a, const TermPtr& b) {
  std::uint64_t c = 0;
  std::vector<TermPtr> atoms;
  flatten_sum(a, c, atoms);
  flatten_sum(b, c, atoms);
  std::sort(atoms.begin(), atoms.end(), [](const TermPtr& x, const TermPtr& y) { return term_compare(x, y) < 0; });
  TermPtr base;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) base = base ? mk::add(*it, base) : *it;
  if (!base) return mk::numeral(c);
  for (std::uint64_t i = 0; i < c; ++i) base = mk::succ(base);
  return base;
}

std::optional<std::uint64_t> spine_length(const TermPtr& v) {
  std::uint64_t n = 0;
  const Term* p = v.get();
  while (p->tag == Tag::Cons) {
    ++n;
    p = p->kids[1].get();
  }
  if (p->tag != Tag::Nil) return std::nullopt;
  return n;
}

TermPtr congruence(const TermPtr& t) {
  std::vector<TermPtr> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(nf(k));
  BoundPtr b;
  if (t->tag == Tag::Pi) b = bound_map_terms(t->bound, [](const TermPtr& x, std::size_t) { return nf(x); });
  return mk::with_kids(*t, std::move(kids), b);
}

TermPtr nf(const TermPtr& t) {
  switch (t->tag) {
    case Tag::Var:
    case Tag::Universe:
    case Tag::Nat:
    case Tag::Zero:
    case Tag::Nil:
    case Tag::FZero:
      return t;
    case Tag::App: {
      TermPtr f = nf(t->kids[0]);
      TermPtr a = nf(t->kids[1]);
      if (f->tag == Tag::Lam) return nf(subst(f->kids[0], 0, a));
      return mk::app(f, a);
    }
    case Tag::Proj1:
    case Tag::Proj2: {
      TermPtr p = nf(t->kids[0]);
      if (p->tag == Tag::Pair) return p->kids[t->tag == Tag::Proj1 ? 0 : 1];
      return mk::with_kids(*t, {p}, nullptr);
    }
    case Tag::J: {
      TermPtr p = nf(t->kids[1]);
      if (p->tag == Tag::Refl) return nf(t->kids[2]);
      return mk::j(nf(t->kids[0]), p, nf(t->kids[2]));
    }
    case Tag::NatRec: {
      TermPtr n = nf(t->kids[1]);
      if (n->tag == Tag::Zero) return nf(t->kids[2]);
      if (n->tag == Tag::Succ) {
        TermPtr m = n->kids[0];
        TermPtr ih = mk::natrec(t->kids[0], m, t->kids[2], t->kids[3]);
        return nf(instantiate(t->kids[3], {m, ih}));
      }
      return mk::natrec(nf(t->kids[0]), n, nf(t->kids[2]), nf(t->kids[3]));
    }
    case Tag::VecRec: {
      TermPtr v = nf(t->kids[1]);
      if (v->tag == Tag::Nil) return nf(t->kids[2]);
      if (v->tag == Tag::Cons) {
        if (auto len = spine_length(v->kids[1])) {
          TermPtr w = v->kids[1];
          TermPtr ih = mk::vecrec(t->kids[0], w, t->kids[2], t->kids[3]);
          return nf(instantiate(t->kids[3], {mk::numeral(*len), v->kids[0], w, ih}));
        }
      }
      return mk::vecrec(nf(t->kids[0]), v, nf(t->kids[2]), nf(t->kids[3]));
    }
    case Tag::El:
    case Tag::Ann:
      return nf(t->kids[0]);
    case Tag::Unbox: {
      TermPtr b = nf(t->kids[0]);
      if (b->tag == Tag::BoxIntro) return b->kids[0];
      return mk::unbox(b);
    }
    case Tag::PrimAdd:
      return canonical_sum(nf(t->kids[0]), nf(t->kids[1]));
    default:
      return congruence(t);
  }
}

}  // namespace

TermPtr normalize(const TermPtr& t) { return nf(t); }

bool convertible(const TermPtr& a, const TermPtr& b) {
  if (structural_eq(a, b)) return true;
  return structural_eq(nf(a), nf(b));
}

BoundPtr size_of_normal(const TermPtr& t) { return size_of(nf(t)); }

const TermResolver& term_resolver() {
  static const TermResolver kResolver = [](const TermPtr& term, const SizeLookup& lookup) -> std::optional<ExtNat> {
    TermPtr t = term;
    const std::size_t k = free_var_bound(term);
    for (std::size_t i = 0; i < k; ++i) {
      if (!has_free_var(term, i)) {
        t = subst(t, 0, mk::zero());
        continue;
      }
      auto v = lookup(i);
      if (!v || v->is_inf()) return std::nullopt;
      t = subst(t, 0, mk::numeral(v->value()));
    }
    auto n = as_numeral(nf(t));
    if (!n) return std::nullopt;
    return ExtNat{*n};
  };
  return kResolver;
}

}  // namespace rbm
