#include "rbmltt/bound.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "rbmltt/term.hpp"

namespace rbm {

namespace bnd {

namespace {
BoundPtr make(Bound b) { return std::make_shared<const Bound>(std::move(b)); }
}  // namespace

BoundPtr constant(ExtNat v) {
  Bound b;
  b.tag = BTag::Const;
  b.value = v;
  return make(std::move(b));
}

BoundPtr bot() {
  static const BoundPtr kBot = make(Bound{});
  return kBot;
}

BoundPtr var(std::size_t i) {
  Bound b;
  b.tag = BTag::Var;
  b.index = i;
  return make(std::move(b));
}

BoundPtr plus(BoundPtr a, BoundPtr b) {
  Bound n;
  n.tag = BTag::Plus;
  n.a = std::move(a);
  n.b = std::move(b);
  return make(std::move(n));
}

BoundPtr plus(std::initializer_list<BoundPtr> parts) {
  BoundPtr acc;
  for (const auto& p : parts) acc = acc ? plus(acc, p) : p;
  return acc ? acc : bot();
}

BoundPtr join(BoundPtr a, BoundPtr b) {
  Bound n;
  n.tag = BTag::Join;
  n.a = std::move(a);
  n.b = std::move(b);
  return make(std::move(n));
}

BoundPtr scale(std::uint64_t c, BoundPtr a) {
  Bound n;
  n.tag = BTag::Scale;
  n.coef = c;
  n.a = std::move(a);
  return make(std::move(n));
}

BoundPtr log2(BoundPtr a) {
  Bound n;
  n.tag = BTag::Log;
  n.a = std::move(a);
  return make(std::move(n));
}

BoundPtr apply(BoundPtr body, TermPtr arg) {
  Bound n;
  n.tag = BTag::Apply;
  n.a = std::move(body);
  n.term = std::move(arg);
  return make(std::move(n));
}

BoundPtr sum(BoundPtr upper, BoundPtr body) {
  Bound n;
  n.tag = BTag::Sum;
  n.a = std::move(upper);
  n.b = std::move(body);
  return make(std::move(n));
}

BoundPtr fold(BoundPtr count, BoundPtr body) {
  Bound n;
  n.tag = BTag::Fold;
  n.a = std::move(count);
  n.b = std::move(body);
  return make(std::move(n));
}

}  // namespace bnd

namespace {

SizeLookup under_binder(const SizeLookup& outer, std::optional<ExtNat> v) {
  return [outer, v](std::size_t i) -> std::optional<ExtNat> {
    if (i == 0) return v;
    return outer(i - 1);
  };
}

ExtNat eval_rec(const Bound& b, const SizeLookup& lookup, const TermResolver* resolver) {
  switch (b.tag) {
    case BTag::Const:
      return b.value;
    case BTag::Bot:
      return ExtNat{0};
    case BTag::Var: {
      auto v = lookup(b.index);
      if (!v) throw BoundError("unbound size variable #" + std::to_string(b.index));
      return *v;
    }
    case BTag::Plus:
      return combine(eval_rec(*b.a, lookup, resolver), eval_rec(*b.b, lookup, resolver));
    case BTag::Join:
      return join(eval_rec(*b.a, lookup, resolver), eval_rec(*b.b, lookup, resolver));
    case BTag::Scale:
      return scale(ExtNat{b.coef}, eval_rec(*b.a, lookup, resolver));
    case BTag::Log: {
      ExtNat x = eval_rec(*b.a, lookup, resolver);
      if (x.is_inf()) return x;
      return ExtNat{static_cast<std::uint64_t>(std::bit_width(x.value()))};
    }
    case BTag::Apply: {
      if (!resolver) throw BoundError("bound application needs a term resolver");
      auto v = (*resolver)(b.term, lookup);
      if (!v) throw BoundError("bound application argument has no numeric value");
      return eval_rec(*b.a, under_binder(lookup, *v), resolver);
    }
    case BTag::Sum: {
      ExtNat n = eval_rec(*b.a, lookup, resolver);
      if (n.is_inf()) return ExtNat::inf();
      ExtNat acc{0};
      for (std::uint64_t i = 0; i < n.value() && !acc.is_inf(); ++i)
        acc = combine(acc, eval_rec(*b.b, under_binder(lookup, ExtNat{i}), resolver));
      return acc;
    }
    case BTag::Fold:
      return scale(eval_rec(*b.a, lookup, resolver), eval_rec(*b.b, lookup, resolver));
  }
  throw BoundError("corrupt bound expression");
}

void free_vars_rec(const Bound& b, std::size_t depth, std::set<std::size_t>& out) {
  switch (b.tag) {
    case BTag::Const:
    case BTag::Bot:
      return;
    case BTag::Var:
      if (b.index >= depth) out.insert(b.index - depth);
      return;
    case BTag::Plus:
    case BTag::Join:
    case BTag::Fold:
      free_vars_rec(*b.a, depth, out);
      free_vars_rec(*b.b, depth, out);
      return;
    case BTag::Scale:
    case BTag::Log:
      free_vars_rec(*b.a, depth, out);
      return;
    case BTag::Apply: {
      free_vars_rec(*b.a, depth + 1, out);
      std::size_t k = free_var_bound(b.term);
      for (std::size_t i = 0; i < k; ++i)
        if (i >= depth && has_free_var(b.term, i)) out.insert(i - depth);
      return;
    }
    case BTag::Sum:
      free_vars_rec(*b.a, depth, out);
      free_vars_rec(*b.b, depth + 1, out);
      return;
  }
}

Bound copy_with(const Bound& b, BoundPtr a, BoundPtr bb, TermPtr term = nullptr) {
  Bound n = b;
  n.a = std::move(a);
  n.b = std::move(bb);
  if (term) n.term = std::move(term);
  return n;
}

BoundPtr shift_rec(const BoundPtr& p, std::ptrdiff_t amount, std::size_t cutoff) {
  const Bound& b = *p;
  switch (b.tag) {
    case BTag::Const:
    case BTag::Bot:
      return p;
    case BTag::Var:
      if (b.index < cutoff) return p;
      if (amount < 0 && b.index < cutoff + static_cast<std::size_t>(-amount))
        throw BoundError("shift would capture size variable");
      return bnd::var(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b.index) + amount));
    case BTag::Plus:
    case BTag::Join:
    case BTag::Fold:
      return std::make_shared<const Bound>(
          copy_with(b, shift_rec(b.a, amount, cutoff), shift_rec(b.b, amount, cutoff)));
    case BTag::Scale:
    case BTag::Log:
      return std::make_shared<const Bound>(copy_with(b, shift_rec(b.a, amount, cutoff), nullptr));
    case BTag::Apply:
      return std::make_shared<const Bound>(
          copy_with(b, shift_rec(b.a, amount, cutoff + 1), nullptr, shift(b.term, amount, cutoff)));
    case BTag::Sum:
      return std::make_shared<const Bound>(
          copy_with(b, shift_rec(b.a, amount, cutoff), shift_rec(b.b, amount, cutoff + 1)));
  }
  return p;
}

// Converts a size expression back to a term so it can be pushed into the
// argument of a bound application.
std::optional<TermPtr> size_to_term(const BoundPtr& s) {
  switch (s->tag) {
    case BTag::Bot:
      return mk::zero();
    case BTag::Const:
      if (s->value.is_inf()) return std::nullopt;
      return mk::numeral(s->value.value());
    case BTag::Var:
      return mk::var(s->index);
    case BTag::Plus: {
      auto a = size_to_term(s->a);
      auto b = size_to_term(s->b);
      if (!a || !b) return std::nullopt;
      return mk::add(*a, *b);
    }
    case BTag::Scale: {
      auto a = size_to_term(s->a);
      if (!a) return std::nullopt;
      TermPtr acc = mk::zero();
      for (std::uint64_t i = 0; i < s->coef; ++i) acc = i == 0 ? *a : mk::add(acc, *a);
      return acc;
    }
    case BTag::Apply:
      if (s->a->tag == BTag::Var && s->a->index == 0) return s->term;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

struct SubstSpec {
  std::size_t index;
  TermPtr term;                   // may be null when only a size is known
  std::optional<BoundPtr> size;
};

BoundPtr subst_rec(const BoundPtr& p, const SubstSpec& s, std::size_t depth) {
  const Bound& b = *p;
  switch (b.tag) {
    case BTag::Const:
    case BTag::Bot:
      return p;
    case BTag::Var: {
      std::size_t target = s.index + depth;
      if (b.index == target) {
        if (s.size) return bound_shift(*s.size, static_cast<std::ptrdiff_t>(depth), 0);
        return bnd::apply(bnd::var(0), shift(s.term, static_cast<std::ptrdiff_t>(depth), 0));
      }
      if (b.index > target) return bnd::var(b.index - 1);
      return p;
    }
    case BTag::Plus:
    case BTag::Join:
    case BTag::Fold:
      return std::make_shared<const Bound>(copy_with(b, subst_rec(b.a, s, depth), subst_rec(b.b, s, depth)));
    case BTag::Scale:
    case BTag::Log:
      return std::make_shared<const Bound>(copy_with(b, subst_rec(b.a, s, depth), nullptr));
    case BTag::Apply: {
      TermPtr arg = b.term;
      if (has_free_var(arg, s.index + depth)) {
        if (!s.term) throw BoundError("cannot substitute a size expression into a bound application");
        arg = subst(arg, s.index + depth, shift(s.term, static_cast<std::ptrdiff_t>(depth), 0));
      } else {
        // Still renumber the variables above the removed one.
        arg = subst(arg, s.index + depth, mk::zero());
      }
      auto body = subst_rec(b.a, s, depth + 1);
      // Collapse applications whose argument has become a plain size.
      if (size_decomposes(arg)) return bound_subst(body, 0, size_of(arg));
      return bnd::apply(body, arg);
    }
    case BTag::Sum:
      return std::make_shared<const Bound>(
          copy_with(b, subst_rec(b.a, s, depth), subst_rec(b.b, s, depth + 1)));
  }
  return p;
}

BoundPtr map_terms_rec(const BoundPtr& p, const std::function<TermPtr(const TermPtr&, std::size_t)>& f,
                       std::size_t depth) {
  const Bound& b = *p;
  switch (b.tag) {
    case BTag::Const:
    case BTag::Bot:
    case BTag::Var:
      return p;
    case BTag::Plus:
    case BTag::Join:
    case BTag::Fold:
      return std::make_shared<const Bound>(
          copy_with(b, map_terms_rec(b.a, f, depth), map_terms_rec(b.b, f, depth)));
    case BTag::Scale:
    case BTag::Log:
      return std::make_shared<const Bound>(copy_with(b, map_terms_rec(b.a, f, depth), nullptr));
    case BTag::Apply: {
      TermPtr arg = f(b.term, depth);
      auto body = map_terms_rec(b.a, f, depth + 1);
      if (size_decomposes(arg)) return bound_subst(body, 0, size_of(arg));
      return bnd::apply(body, arg);
    }
    case BTag::Sum:
      return std::make_shared<const Bound>(
          copy_with(b, map_terms_rec(b.a, f, depth), map_terms_rec(b.b, f, depth + 1)));
  }
  return p;
}

std::string fresh_name(const std::vector<std::string>& names) {
  static const char* kPool[] = {"i", "j", "k", "l"};
  for (int round = 0;; ++round) {
    for (const char* base : kPool) {
      std::string cand = round == 0 ? std::string(base) : std::string(base) + std::to_string(round);
      if (std::find(names.begin(), names.end(), cand) == names.end()) return cand;
    }
  }
}

std::string name_of(std::size_t i, const std::vector<std::string>& names) {
  if (i < names.size()) return names[names.size() - 1 - i];
  return "#" + std::to_string(i - names.size());
}

void print_rec(std::ostream& os, const Bound& b, std::vector<std::string>& names, int prec) {
  switch (b.tag) {
    case BTag::Const:
      os << b.value.str();
      return;
    case BTag::Bot:
      os << '0';
      return;
    case BTag::Var:
      os << name_of(b.index, names);
      return;
    case BTag::Plus:
      if (prec > 0) os << '(';
      print_rec(os, *b.a, names, 0);
      os << " + ";
      print_rec(os, *b.b, names, 1);
      if (prec > 0) os << ')';
      return;
    case BTag::Join:
      os << "max(";
      print_rec(os, *b.a, names, 0);
      os << ", ";
      print_rec(os, *b.b, names, 0);
      os << ')';
      return;
    case BTag::Scale:
      os << b.coef << '*';
      print_rec(os, *b.a, names, 2);
      return;
    case BTag::Log:
      os << "log2(";
      print_rec(os, *b.a, names, 0);
      os << ')';
      return;
    case BTag::Apply: {
      std::string x = fresh_name(names);
      os << "at(";
      os << x << " => ";
      names.push_back(x);
      print_rec(os, *b.a, names, 0);
      names.pop_back();
      os << ", " << debug_string(b.term) << ')';
      return;
    }
    case BTag::Sum: {
      std::string i = fresh_name(names);
      os << "sum(" << i << " < ";
      print_rec(os, *b.a, names, 0);
      os << ", ";
      names.push_back(i);
      print_rec(os, *b.b, names, 0);
      names.pop_back();
      os << ')';
      return;
    }
    case BTag::Fold:
      os << "fold(";
      print_rec(os, *b.a, names, 0);
      os << ", ";
      print_rec(os, *b.b, names, 0);
      os << ')';
      return;
  }
}

}  // namespace

ExtNat bound_eval(const BoundPtr& b, const SizeEnv& env, const TermResolver* resolver) {
  SizeLookup lookup = [&env](std::size_t i) -> std::optional<ExtNat> {
    auto it = env.find(i);
    if (it == env.end()) return std::nullopt;
    return ExtNat{it->second};
  };
  return eval_rec(*b, lookup, resolver);
}

ExtNat bound_eval(const BoundPtr& b, const SizeLookup& lookup, const TermResolver* resolver) {
  return eval_rec(*b, lookup, resolver);
}

std::vector<std::size_t> bound_free_vars(const BoundPtr& b) {
  std::set<std::size_t> out;
  free_vars_rec(*b, 0, out);
  return {out.begin(), out.end()};
}

bool bound_mentions(const BoundPtr& b, std::size_t index) {
  auto fv = bound_free_vars(b);
  return std::find(fv.begin(), fv.end(), index) != fv.end();
}

bool bound_is_closed(const BoundPtr& b) { return bound_free_vars(b).empty(); }

BoundPtr bound_shift(const BoundPtr& b, std::ptrdiff_t amount, std::size_t cutoff) {
  if (amount == 0) return b;
  return shift_rec(b, amount, cutoff);
}

BoundPtr bound_subst(const BoundPtr& b, std::size_t index, const BoundPtr& replacement) {
  SubstSpec s{index, nullptr, replacement};
  if (auto t = size_to_term(replacement)) s.term = *t;
  return subst_rec(b, s, 0);
}

BoundPtr bound_subst_term(const BoundPtr& b, std::size_t index, const TermPtr& term,
                          const std::optional<BoundPtr>& size) {
  return subst_rec(b, SubstSpec{index, term, size}, 0);
}

BoundPtr bound_map_terms(const BoundPtr& b, const std::function<TermPtr(const TermPtr&, std::size_t)>& f) {
  return map_terms_rec(b, f, 0);
}

std::string bound_to_string(const BoundPtr& b, const std::vector<std::string>& names) {
  std::ostringstream os;
  std::vector<std::string> scope = names;
  print_rec(os, *b, scope, 0);
  return os.str();
}

bool bound_syntactic_eq(const BoundPtr& x, const BoundPtr& y) {
  if (x == y) return true;
  if (!x || !y || x->tag != y->tag) return false;
  switch (x->tag) {
    case BTag::Const:
      return x->value == y->value;
    case BTag::Bot:
      return true;
    case BTag::Var:
      return x->index == y->index;
    case BTag::Scale:
      return x->coef == y->coef && bound_syntactic_eq(x->a, y->a);
    case BTag::Log:
      return bound_syntactic_eq(x->a, y->a);
    case BTag::Apply:
      return bound_syntactic_eq(x->a, y->a) && structural_eq(x->term, y->term);
    default:
      return bound_syntactic_eq(x->a, y->a) && bound_syntactic_eq(x->b, y->b);
  }
}

std::string Verdict::str(const std::vector<std::string>& names) const {
  switch (kind) {
    case Kind::Proved:
      return "Proved";
    case Kind::Empirical:
      return "Empirical(0.." + std::to_string(range) + ")";
    case Kind::Refuted: {
      if (witness.empty()) return "Refuted";
      std::string s = "Refuted(";
      bool first = true;
      for (auto [i, v] : witness) {
        if (!first) s += ", ";
        first = false;
        s += name_of(i, names) + "=" + std::to_string(v);
      }
      return s + ")";
    }
  }
  return "?";
}

}  // namespace rbm
