#include <algorithm>
#include <sstream>

#include "rbmltt/syntax.hpp"

namespace rbm {

namespace {

// ------------------------------------------------------------- delaboration

class Delab {
 public:
  explicit Delab(std::vector<std::string> names) : names_(std::move(names)) {}

  SExprPtr term(const TermPtr& t) {
    switch (t->tag) {
      case Tag::Var:
        return name(var_name(t->index));
      case Tag::Universe: {
        auto e = node(SKind::Universe);
        e->grade = t->grade;
        return e;
      }
      case Tag::Pi: {
        bool dep = has_free_var(t->kids[1], 0) || bound_mentions(t->bound, 0);
        std::string x = dep ? fresh("x") : "_";
        auto e = node(SKind::Pi);
        e->binders = {x};
        e->kids.push_back(term(t->kids[0]));
        push(x);
        if (!is_zero_bound(t->bound)) e->bound = bound(t->bound);
        e->kids.push_back(term(t->kids[1]));
        pop(1);
        return e;
      }
      case Tag::Sigma: {
        bool dep = has_free_var(t->kids[1], 0);
        std::string x = dep ? fresh("x") : "_";
        auto e = node(SKind::Sigma);
        e->binders = {x};
        e->kids.push_back(term(t->kids[0]));
        push(x);
        e->kids.push_back(term(t->kids[1]));
        pop(1);
        return e;
      }
      case Tag::Lam: {
        auto e = node(SKind::Lam);
        TermPtr inner = t;
        while (inner->tag == Tag::Lam) {
          std::string x = fresh("x");
          e->binders.push_back(x);
          push(x);
          inner = inner->kids[0];
        }
        e->kids.push_back(term(inner));
        pop(e->binders.size());
        return e;
      }
      case Tag::App:
        return app(term(t->kids[0]), term(t->kids[1]));
      case Tag::Pair: {
        auto e = node(SKind::Pair);
        e->kids = {term(t->kids[0]), term(t->kids[1])};
        return e;
      }
      case Tag::Succ:
        if (auto n = as_numeral(t)) return num(*n);
        return builtin("succ", t);
      case Tag::Zero:
        return num(0);
      case Tag::Nil:
        return node(SKind::VecLit);
      case Tag::Cons:
        if (auto elems = as_vec_literal(t)) {
          auto e = node(SKind::VecLit);
          for (const auto& x : *elems) e->kids.push_back(term(x));
          return e;
        }
        return builtin("cons", t);
      case Tag::Nat: return name("Nat");
      case Tag::FZero: return name("fzero");
      case Tag::El: return builtin("El", t);
      case Tag::Proj1: return builtin("fst", t);
      case Tag::Proj2: return builtin("snd", t);
      case Tag::IdType: return builtin("Id", t);
      case Tag::Refl: return builtin("refl", t);
      case Tag::VecType: return builtin("Vec", t);
      case Tag::FinType: return builtin("Fin", t);
      case Tag::FSucc: return builtin("fsucc", t);
      case Tag::Unbox: return builtin("unbox", t);
      case Tag::PrimAdd: return builtin("add", t);
      case Tag::BoxType:
      case Tag::BoxIntro: {
        auto e = node(t->tag == Tag::BoxType ? SKind::BoxType : SKind::BoxIntro);
        e->grade = t->grade;
        e->kids = {term(t->kids[0])};
        return e;
      }
      case Tag::Ann: {
        auto e = node(SKind::Ann);
        e->kids = {term(t->kids[0]), term(t->kids[1])};
        return e;
      }
      case Tag::J: {
        auto e = node(SKind::JElim);
        std::string z = fresh("z");
        push(z);
        std::string w = fresh("p");
        push(w);
        SExprPtr motive = lam({z, w}, term(t->kids[0]));
        pop(2);
        e->kids = {motive, term(t->kids[1]), term(t->kids[2])};
        return e;
      }
      case Tag::NatRec: {
        auto e = node(SKind::NatRec);
        std::string m = fresh("m");
        push(m);
        SExprPtr motive = lam({m}, term(t->kids[0]));
        pop(1);
        SExprPtr scrut = term(t->kids[1]);
        SExprPtr z = term(t->kids[2]);
        std::string m2 = fresh("m");
        push(m2);
        std::string ih = fresh("ih");
        push(ih);
        SExprPtr s = term(t->kids[3]);
        pop(2);
        e->kids = {motive, scrut, z, s};
        e->case_binders = {{}, {m2, ih}};
        return e;
      }
      case Tag::VecRec: {
        auto e = node(SKind::VecRec);
        std::string m = fresh("m");
        push(m);
        std::string w = fresh("w");
        push(w);
        SExprPtr motive = lam({m, w}, term(t->kids[0]));
        pop(2);
        SExprPtr scrut = term(t->kids[1]);
        SExprPtr n = term(t->kids[2]);
        std::vector<std::string> bs;
        for (const char* base : {"m", "a", "w", "ih"}) {
          bs.push_back(fresh(base));
          push(bs.back());
        }
        SExprPtr c = term(t->kids[3]);
        pop(4);
        e->kids = {motive, scrut, n, c};
        e->case_binders = {{}, bs};
        return e;
      }
    }
    return name("?");
  }

  /// Outer Pi chain with the given binder names; "_" kept for vacuous binders.
  SExprPtr pi_chain(const TermPtr& t, const std::vector<std::string>& telescope, std::size_t i) {
    if (t->tag != Tag::Pi || i >= telescope.size()) return term(t);
    bool dep = has_free_var(t->kids[1], 0) || bound_mentions(t->bound, 0);
    std::string x = telescope[i];
    if (!dep) x = "_";
    else if (x.empty() || x == "_" || std::find(names_.begin(), names_.end(), x) != names_.end()) x = fresh("x");
    auto e = node(SKind::Pi);
    e->binders = {x};
    e->kids.push_back(term(t->kids[0]));
    push(x);
    if (!is_zero_bound(t->bound)) e->bound = bound(t->bound);
    e->kids.push_back(pi_chain(t->kids[1], telescope, i + 1));
    pop(1);
    return e;
  }

  SBoundPtr bound(const BoundPtr& b) {
    auto n = std::make_shared<SBound>();
    switch (b->tag) {
      case BTag::Bot:
        n->kind = SBKind::Num;
        return n;
      case BTag::Const:
        if (b->value.is_inf()) n->kind = SBKind::Inf;
        else n->num = b->value.value();
        return n;
      case BTag::Var:
        n->kind = SBKind::Name;
        n->name = var_name(b->index);
        return n;
      case BTag::Plus:
      case BTag::Join:
      case BTag::Fold:
        n->kind = b->tag == BTag::Plus ? SBKind::Plus : b->tag == BTag::Join ? SBKind::Join : SBKind::Fold;
        n->a = bound(b->a);
        n->b = bound(b->b);
        return n;
      case BTag::Scale:
        n->kind = SBKind::Scale;
        n->num = b->coef;
        n->a = bound(b->a);
        return n;
      case BTag::Log:
        n->kind = SBKind::Log;
        n->a = bound(b->a);
        return n;
      case BTag::Sum:
        n->kind = SBKind::Sum;
        n->a = bound(b->a);
        n->name = fresh("i");
        push(n->name);
        n->b = bound(b->b);
        pop(1);
        return n;
      case BTag::Apply:
        n->kind = SBKind::At;
        n->term = term(b->term);
        n->name = fresh("s");
        push(n->name);
        n->a = bound(b->a);
        pop(1);
        return n;
    }
    return n;
  }

 private:
  static bool is_zero_bound(const BoundPtr& b) {
    return b->tag == BTag::Bot || (b->tag == BTag::Const && b->value == ExtNat{0});
  }

  std::string var_name(std::size_t i) const {
    if (i < names_.size()) return names_[names_.size() - 1 - i];
    return "free" + std::to_string(i - names_.size());
  }

  std::string fresh(const std::string& base) const {
    std::string cand = base + std::to_string(names_.size());
    while (std::find(names_.begin(), names_.end(), cand) != names_.end()) cand += "'";
    return cand;
  }

  void push(const std::string& x) { names_.push_back(x); }
  void pop(std::size_t n) { names_.resize(names_.size() - n); }

  static std::shared_ptr<SExpr> node(SKind k) {
    auto e = std::make_shared<SExpr>();
    e->kind = k;
    return e;
  }
  static SExprPtr name(const std::string& n) {
    auto e = node(SKind::Name);
    e->name = n;
    return e;
  }
  static SExprPtr num(std::uint64_t v) {
    auto e = node(SKind::Num);
    e->num = v;
    return e;
  }
  static SExprPtr app(SExprPtr f, SExprPtr a) {
    auto e = node(SKind::App);
    e->kids = {std::move(f), std::move(a)};
    return e;
  }
  static SExprPtr lam(std::vector<std::string> xs, SExprPtr body) {
    auto e = node(SKind::Lam);
    e->binders = std::move(xs);
    e->kids = {std::move(body)};
    return e;
  }
  SExprPtr builtin(const char* fn, const TermPtr& t) {
    SExprPtr e = name(fn);
    for (const auto& k : t->kids) e = app(e, term(k));
    return e;
  }

  std::vector<std::string> names_;
};

// ----------------------------------------------------------------- printing

enum Level { kExpr = 0, kProd = 1, kApp = 2, kAtom = 3 };

void print(std::ostream& os, const SExpr& e, int level);

void print_grade(std::ostream& os, ExtNat g) { os << '[' << g.str() << ']'; }

int level_of(const SExpr& e) {
  switch (e.kind) {
    case SKind::Lam:
    case SKind::Pi:
      return kExpr;
    case SKind::Sigma:
      return kProd;
    case SKind::App:
    case SKind::BoxType:
    case SKind::BoxIntro:
    case SKind::NatRec:
    case SKind::VecRec:
    case SKind::JElim:
      return kApp;
    default:
      return kAtom;
  }
}

void print_b(std::ostream& os, const SBound& b, int level) {
  // level: 0 sum, 1 product operand
  switch (b.kind) {
    case SBKind::Num:
      os << b.num;
      return;
    case SBKind::Inf:
      os << "inf";
      return;
    case SBKind::Name:
      os << b.name;
      return;
    case SBKind::Plus:
      if (level > 0) os << '(';
      print_b(os, *b.a, 0);
      os << " + ";
      print_b(os, *b.b, 1);
      if (level > 0) os << ')';
      return;
    case SBKind::Scale:
      if (level > 1) os << '(';
      os << b.num << '*';
      print_b(os, *b.a, 2);
      if (level > 1) os << ')';
      return;
    case SBKind::Join:
      os << "max(";
      print_b(os, *b.a, 0);
      os << ", ";
      print_b(os, *b.b, 0);
      os << ')';
      return;
    case SBKind::Fold:
      os << "fold(";
      print_b(os, *b.a, 0);
      os << ", ";
      print_b(os, *b.b, 0);
      os << ')';
      return;
    case SBKind::Log:
      os << "log2(";
      print_b(os, *b.a, 0);
      os << ')';
      return;
    case SBKind::Sum:
      os << "sum(" << b.name << " < ";
      print_b(os, *b.a, 0);
      os << ", ";
      print_b(os, *b.b, 0);
      os << ')';
      return;
    case SBKind::At:
      os << "at(" << b.name << " => ";
      print_b(os, *b.a, 0);
      os << ", ";
      print(os, *b.term, kExpr);
      os << ')';
      return;
  }
}

void print(std::ostream& os, const SExpr& e, int level) {
  bool paren = level_of(e) < level;
  if (paren) os << '(';
  const auto& k = e.kids;
  switch (e.kind) {
    case SKind::Name:
      os << e.name;
      break;
    case SKind::Num:
      os << e.num;
      break;
    case SKind::Universe:
      os << 'U';
      if (!e.grade.is_inf()) print_grade(os, e.grade);
      break;
    case SKind::Pi:
      if (e.binders[0] == "_") {
        print(os, *k[0], kProd);
      } else {
        os << '(' << e.binders[0] << " : ";
        print(os, *k[0], kExpr);
        os << ')';
      }
      os << " ->";
      if (e.bound) {
        os << '[';
        print_b(os, *e.bound, 0);
        os << ']';
      }
      os << ' ';
      print(os, *k[1], kExpr);
      break;
    case SKind::Sigma:
      if (e.binders[0] == "_") {
        print(os, *k[0], kApp);
      } else {
        os << '(' << e.binders[0] << " : ";
        print(os, *k[0], kExpr);
        os << ')';
      }
      os << " * ";
      print(os, *k[1], kProd);
      break;
    case SKind::Lam:
      os << "fun";
      for (const auto& x : e.binders) os << ' ' << x;
      os << " => ";
      print(os, *k[0], kExpr);
      break;
    case SKind::App:
      print(os, *k[0], kApp);
      os << ' ';
      print(os, *k[1], kAtom);
      break;
    case SKind::Pair:
      os << '(';
      print(os, *k[0], kExpr);
      os << ", ";
      print(os, *k[1], kExpr);
      os << ')';
      break;
    case SKind::VecLit:
      os << '[';
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (i) os << ", ";
        print(os, *k[i], kExpr);
      }
      os << ']';
      break;
    case SKind::BoxType:
    case SKind::BoxIntro:
      os << (e.kind == SKind::BoxType ? "Box" : "box");
      print_grade(os, e.grade);
      os << ' ';
      print(os, *k[0], kAtom);
      break;
    case SKind::Ann:
      os << '(';
      print(os, *k[0], kExpr);
      os << " : ";
      print(os, *k[1], kExpr);
      os << ')';
      break;
    case SKind::JElim:
      os << "jelim ";
      print(os, *k[0], kAtom);
      os << ' ';
      print(os, *k[1], kAtom);
      os << ' ';
      print(os, *k[2], kAtom);
      break;
    case SKind::NatRec:
    case SKind::VecRec: {
      bool nat = e.kind == SKind::NatRec;
      os << (nat ? "natrec " : "vecrec ");
      print(os, *k[0], kAtom);
      os << ' ';
      print(os, *k[1], kAtom);
      os << (nat ? " { zero => " : " { nil => ");
      print(os, *k[2], kExpr);
      os << (nat ? "; succ" : "; cons");
      for (const auto& x : e.case_binders[1]) os << ' ' << x;
      os << " => ";
      print(os, *k[3], kExpr);
      os << " }";
      break;
    }
  }
  if (paren) os << ')';
}

}  // namespace

SExprPtr delaborate(const TermPtr& t, const std::vector<std::string>& names) { return Delab(names).term(t); }

std::string print_expr(const SExprPtr& e) {
  std::ostringstream os;
  print(os, *e, kExpr);
  return os.str();
}

std::string print_bound(const SBoundPtr& b) {
  std::ostringstream os;
  print_b(os, *b, 0);
  return os.str();
}

std::string print_decl(const SurfaceDecl& d) {
  std::string s;
  if (d.expect_bound) s += "@expect_bound(" + print_bound(d.expect_bound) + ")\n";
  s += "def " + d.name + " : " + print_expr(d.type) + " :=\n  " + print_expr(d.body) + "\n";
  return s;
}

std::string pretty(const TermPtr& t, const std::vector<std::string>& names) { return print_expr(delaborate(t, names)); }

std::string pretty_type(const TermPtr& t, const std::vector<std::string>& telescope) {
  return print_expr(Delab({}).pi_chain(t, telescope, 0));
}

std::string pretty_bound(const BoundPtr& b, const std::vector<std::string>& names) {
  return print_bound(Delab(names).bound(b));
}

}  // namespace rbm
