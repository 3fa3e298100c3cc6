#include <map>

#include "rbmltt/syntax.hpp"

namespace rbm {

namespace {

enum class SizeKind : std::uint8_t { Nat, NonNat, Unknown };

struct Entry {
  std::string name;
  SizeKind kind;
};

struct Builtin {
  std::size_t arity;
  TermPtr (*make)(const std::vector<TermPtr>&);
};

const std::map<std::string, Builtin, std::less<>>& builtins() {
  static const std::map<std::string, Builtin, std::less<>> kTable = {
      {"Nat", {0, [](const std::vector<TermPtr>&) { return mk::nat(); }}},
      {"zero", {0, [](const std::vector<TermPtr>&) { return mk::zero(); }}},
      {"nil", {0, [](const std::vector<TermPtr>&) { return mk::nil(); }}},
      {"fzero", {0, [](const std::vector<TermPtr>&) { return mk::fzero(); }}},
      {"succ", {1, [](const std::vector<TermPtr>& a) { return mk::succ(a[0]); }}},
      {"add", {2, [](const std::vector<TermPtr>& a) { return mk::add(a[0], a[1]); }}},
      {"Vec", {2, [](const std::vector<TermPtr>& a) { return mk::vec(a[0], a[1]); }}},
      {"Fin", {1, [](const std::vector<TermPtr>& a) { return mk::fin(a[0]); }}},
      {"Id", {3, [](const std::vector<TermPtr>& a) { return mk::id(a[0], a[1], a[2]); }}},
      {"El", {1, [](const std::vector<TermPtr>& a) { return mk::el(a[0]); }}},
      {"fst", {1, [](const std::vector<TermPtr>& a) { return mk::proj1(a[0]); }}},
      {"snd", {1, [](const std::vector<TermPtr>& a) { return mk::proj2(a[0]); }}},
      {"refl", {1, [](const std::vector<TermPtr>& a) { return mk::refl(a[0]); }}},
      {"cons", {2, [](const std::vector<TermPtr>& a) { return mk::cons(a[0], a[1]); }}},
      {"fsucc", {1, [](const std::vector<TermPtr>& a) { return mk::fsucc(a[0]); }}},
      {"unbox", {1, [](const std::vector<TermPtr>& a) { return mk::unbox(a[0]); }}},
  };
  return kTable;
}

class Elaborator {
 public:
  Elaborator(const Program* defs, SpanMap* spans) : defs_(defs), spans_(spans) {}

  std::vector<Entry> scope;

  template <class F>
  decltype(auto) under(Entry e, F&& f) {
    scope.push_back(std::move(e));
    struct Pop {
      std::vector<Entry>& s;
      ~Pop() { s.pop_back(); }
    } pop{scope};
    return f();
  }

  template <class F>
  decltype(auto) under_many(const std::vector<Entry>& es, F&& f) {
    for (const auto& e : es) scope.push_back(e);
    struct Pop {
      std::vector<Entry>& s;
      std::size_t n;
      ~Pop() { s.resize(s.size() - n); }
    } pop{scope, es.size()};
    return f();
  }

  TermPtr term(const SExprPtr& e) { return record(e, term_impl(e)); }

  BoundPtr bound(const SBoundPtr& b) {
    switch (b->kind) {
      case SBKind::Num:
        return b->num == 0 ? bnd::bot() : bnd::constant(ExtNat{b->num});
      case SBKind::Inf:
        return bnd::constant(ExtNat::inf());
      case SBKind::Name: {
        auto [index, entry] = resolve(b->name, b->span);
        if (!entry) throw ElabError("bound refers to unknown size variable '" + b->name + "'", b->span);
        if (entry->kind == SizeKind::NonNat)
          throw ElabError("bound refers to '" + b->name + "', which is not a natural number", b->span);
        return bnd::var(index);
      }
      case SBKind::Plus:
        return bnd::plus(bound(b->a), bound(b->b));
      case SBKind::Join:
        return bnd::join(bound(b->a), bound(b->b));
      case SBKind::Scale:
        return bnd::scale(b->num, bound(b->a));
      case SBKind::Fold:
        return bnd::fold(bound(b->a), bound(b->b));
      case SBKind::Log:
        return bnd::log2(bound(b->a));
      case SBKind::Sum: {
        BoundPtr upper = bound(b->a);
        BoundPtr body = under({b->name, SizeKind::Nat}, [&] { return bound(b->b); });
        return bnd::sum(upper, body);
      }
      case SBKind::At: {
        TermPtr arg = term(b->term);
        BoundPtr body = under({b->name, SizeKind::Nat}, [&] { return bound(b->a); });
        return bnd::apply(body, arg);
      }
    }
    throw ElabError("malformed bound", b->span);
  }

 private:
  TermPtr record(const SExprPtr& e, TermPtr t) {
    if (spans_ && e->span.known()) spans_->emplace(t.get(), e->span);
    return t;
  }

  std::pair<std::size_t, const Entry*> resolve(const std::string& name, const SourceSpan&) const {
    if (name == "_") return {0, nullptr};
    for (std::size_t i = scope.size(); i-- > 0;)
      if (scope[i].name == name) return {scope.size() - 1 - i, &scope[i]};
    return {0, nullptr};
  }

  static SizeKind kind_of_type(const SExprPtr& dom) {
    const SExpr* head = dom.get();
    while (head->kind == SKind::App) head = head->kids[0].get();
    switch (head->kind) {
      case SKind::Name:
        if (head == dom.get() && head->name == "Nat") return SizeKind::Nat;
        if (head->name == "Vec" || head->name == "Fin" || head->name == "Id") return SizeKind::NonNat;
        return SizeKind::Unknown;
      case SKind::Universe:
      case SKind::Pi:
      case SKind::Sigma:
      case SKind::BoxType:
        return SizeKind::NonNat;
      default:
        return SizeKind::Unknown;
    }
  }

  const SExpr& motive_lambda(const SExprPtr& m, std::size_t arity, const char* what) const {
    if (m->kind != SKind::Lam || m->binders.size() != arity)
      throw ElabError(std::string(what) + " motive must be a function of " + std::to_string(arity) + " argument" +
                          (arity == 1 ? "" : "s") + " written `fun ... => ...`",
                      m->span);
    return *m;
  }

  TermPtr name_ref(const SExprPtr& e) {
    auto [index, entry] = resolve(e->name, e->span);
    if (entry) return mk::var(index);
    if (defs_)
      if (const CoreDecl* d = defs_->find(e->name)) return mk::ann(d->body, d->type);
    auto it = builtins().find(e->name);
    if (it != builtins().end()) {
      if (it->second.arity == 0) return it->second.make({});
      throw ElabError("'" + e->name + "' expects " + std::to_string(it->second.arity) + " argument(s)", e->span);
    }
    throw ElabError("unbound identifier '" + e->name + "'", e->span);
  }

  bool is_builtin_head(const SExpr& h) const {
    if (h.kind != SKind::Name) return false;
    if (resolve(h.name, h.span).second) return false;
    if (defs_ && defs_->find(h.name)) return false;
    return builtins().count(h.name) > 0;
  }

  TermPtr app(const SExprPtr& e) {
    std::vector<SExprPtr> args;
    const SExpr* head = e.get();
    while (head->kind == SKind::App) {
      args.push_back(head->kids[1]);
      head = head->kids[0].get();
    }
    std::reverse(args.begin(), args.end());
    if (is_builtin_head(*head)) {
      const Builtin& b = builtins().find(head->name)->second;
      if (args.size() < b.arity)
        throw ElabError("'" + head->name + "' expects " + std::to_string(b.arity) + " argument(s), got " +
                            std::to_string(args.size()),
                        e->span);
      std::vector<TermPtr> first;
      for (std::size_t i = 0; i < b.arity; ++i) first.push_back(term(args[i]));
      TermPtr t = b.make(first);
      for (std::size_t i = b.arity; i < args.size(); ++i) t = mk::app(t, term(args[i]));
      return t;
    }
    // Rebuild left-nested applications so every node keeps its own span.
    return mk::app(term(e->kids[0]), term(e->kids[1]));
  }

  TermPtr term_impl(const SExprPtr& e) {
    const auto& k = e->kids;
    switch (e->kind) {
      case SKind::Name:
        return name_ref(e);
      case SKind::Num:
        return mk::numeral(e->num);
      case SKind::Universe:
        return mk::universe(e->grade);
      case SKind::Pi: {
        TermPtr dom = term(k[0]);
        Entry x{e->binders[0], kind_of_type(k[0])};
        return under(x, [&] {
          BoundPtr b = e->bound ? bound(e->bound) : bnd::bot();
          return mk::pi(dom, b, term(k[1]));
        });
      }
      case SKind::Sigma: {
        TermPtr a = term(k[0]);
        Entry x{e->binders[0], kind_of_type(k[0])};
        return under(x, [&] { return mk::sigma(a, term(k[1])); });
      }
      case SKind::Lam: {
        std::vector<Entry> xs;
        for (const auto& n : e->binders) xs.push_back({n, SizeKind::Unknown});
        return under_many(xs, [&] {
          TermPtr body = term(k[0]);
          for (std::size_t i = 0; i < xs.size(); ++i) body = mk::lam(body);
          return body;
        });
      }
      case SKind::App:
        return app(e);
      case SKind::Pair:
        return mk::pair(term(k[0]), term(k[1]));
      case SKind::VecLit: {
        std::vector<TermPtr> elems;
        for (const auto& x : k) elems.push_back(term(x));
        return mk::vec_literal(elems);
      }
      case SKind::BoxType:
        return mk::box_type(e->grade, term(k[0]));
      case SKind::BoxIntro:
        return mk::box(e->grade, term(k[0]));
      case SKind::Ann:
        return mk::ann(term(k[0]), term(k[1]));
      case SKind::NatRec: {
        const SExpr& m = motive_lambda(k[0], 1, "natrec");
        TermPtr motive = under({m.binders[0], SizeKind::Nat}, [&] { return term(m.kids[0]); });
        TermPtr scrut = term(k[1]);
        TermPtr z = term(k[2]);
        const auto& nb = e->case_binders[1];
        TermPtr s = under_many({{nb[0], SizeKind::Nat}, {nb[1], SizeKind::Unknown}}, [&] { return term(k[3]); });
        return mk::natrec(motive, scrut, z, s);
      }
      case SKind::VecRec: {
        const SExpr& m = motive_lambda(k[0], 2, "vecrec");
        TermPtr motive = under_many({{m.binders[0], SizeKind::Nat}, {m.binders[1], SizeKind::NonNat}},
                                    [&] { return term(m.kids[0]); });
        TermPtr scrut = term(k[1]);
        TermPtr nilcase = term(k[2]);
        const auto& nb = e->case_binders[1];
        TermPtr conscase = under_many({{nb[0], SizeKind::Nat},
                                       {nb[1], SizeKind::Unknown},
                                       {nb[2], SizeKind::NonNat},
                                       {nb[3], SizeKind::Unknown}},
                                      [&] { return term(k[3]); });
        return mk::vecrec(motive, scrut, nilcase, conscase);
      }
      case SKind::JElim: {
        const SExpr& m = motive_lambda(k[0], 2, "jelim");
        TermPtr motive = under_many({{m.binders[0], SizeKind::Unknown}, {m.binders[1], SizeKind::NonNat}},
                                    [&] { return term(m.kids[0]); });
        return mk::j(motive, term(k[1]), term(k[2]));
      }
    }
    throw ElabError("malformed expression", e->span);
  }

  const Program* defs_;
  SpanMap* spans_;
};

}  // namespace

const CoreDecl* Program::find(std::string_view name) const {
  for (const auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

Program elaborate(const std::vector<SurfaceDecl>& decls) {
  Program prog;
  for (const auto& d : decls) {
    if (prog.find(d.name)) throw ElabError("duplicate declaration '" + d.name + "'", d.span);
    if (builtins().count(d.name)) throw ElabError("'" + d.name + "' is a builtin name", d.span);
    Elaborator el(&prog, &prog.spans);
    CoreDecl c;
    c.name = d.name;
    c.span = d.span;
    c.type = el.term(d.type);
    c.body = el.term(d.body);
    // Telescope of the declared Pi chain, used to read the expected bound.
    const SExpr* t = d.type.get();
    std::vector<Entry> tele;
    while (t->kind == SKind::Pi) {
      const SExpr& dom = *t->kids[0];
      bool nat = dom.kind == SKind::Name && dom.name == "Nat";
      tele.push_back({t->binders[0], nat ? SizeKind::Nat : SizeKind::NonNat});
      c.telescope.push_back(t->binders[0]);
      t = t->kids[1].get();
    }
    if (d.expect_bound) {
      Elaborator eb(&prog, nullptr);
      eb.scope = tele;
      c.expect_bound = eb.bound(d.expect_bound);
    }
    prog.decls.push_back(std::move(c));
  }
  return prog;
}

Program load_program(std::string_view text, const std::string& file) { return elaborate(parse_program(text, file)); }

TermPtr elaborate_expr(const SExprPtr& e, const std::vector<std::string>& names, const Program* defs,
                       SpanMap* spans) {
  Elaborator el(defs, spans);
  for (const auto& n : names) el.scope.push_back({n, SizeKind::Unknown});
  return el.term(e);
}

TermPtr parse_term(std::string_view text, const std::vector<std::string>& names, const Program* defs) {
  return elaborate_expr(parse_expr(text), names, defs);
}

BoundPtr parse_bound_text(std::string_view text, const std::vector<std::string>& names) {
  Elaborator el(nullptr, nullptr);
  for (const auto& n : names) el.scope.push_back({n, SizeKind::Unknown});
  return el.bound(parse_surface_bound(text));
}

}  // namespace rbm
