#include "rbmltt/evaluator.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"

namespace rbm {

Env env_push(const Env& env, ValuePtr v) {
  return std::make_shared<const EnvNode>(EnvNode{std::move(v), env});
}

std::size_t env_size(const Env& env) {
  std::size_t n = 0;
  for (const EnvNode* e = env.get(); e; e = e->next.get()) ++n;
  return n;
}

namespace val {
namespace {
std::shared_ptr<Value> make(Value::Kind k) {
  auto v = std::make_shared<Value>();
  v->kind = k;
  return v;
}
}  // namespace

ValuePtr nat(std::uint64_t n) {
  auto v = make(Value::Kind::Nat);
  v->n = n;
  return v;
}
ValuePtr closure(TermPtr body, Env env) {
  auto v = make(Value::Kind::Closure);
  v->body = std::move(body);
  v->env = std::move(env);
  return v;
}
ValuePtr pair(ValuePtr a, ValuePtr b) {
  auto v = make(Value::Kind::Pair);
  v->a = std::move(a);
  v->b = std::move(b);
  return v;
}
ValuePtr refl(ValuePtr a) {
  auto v = make(Value::Kind::Refl);
  v->a = std::move(a);
  return v;
}
ValuePtr nil() { return make(Value::Kind::Nil); }
ValuePtr cons(ValuePtr head, ValuePtr tail) {
  auto v = make(Value::Kind::Cons);
  v->n = tail->n + 1;
  v->a = std::move(head);
  v->b = std::move(tail);
  return v;
}
ValuePtr fin(std::uint64_t height) {
  auto v = make(Value::Kind::Fin);
  v->n = height;
  return v;
}
ValuePtr box(ExtNat grade, ValuePtr payload) {
  auto v = make(Value::Kind::Box);
  v->grade = grade;
  v->a = std::move(payload);
  return v;
}
ValuePtr type(TermPtr t) {
  auto v = make(Value::Kind::Type);
  v->body = std::move(t);
  return v;
}
}  // namespace val

// ------------------------------------------------------------------ ledger

void Ledger::charge(const std::string& rule, ExtNat delta) {
  Entry& e = rules[rule];
  e.count += 1;
  e.delta = delta;
  e.subtotal = e.subtotal + delta;
  total = total + delta;
}

nlohmann::json Ledger::to_json() const {
  auto num = [](ExtNat x) -> nlohmann::json {
    if (x.is_inf()) return "inf";
    return x.value();
  };
  nlohmann::json rules_json = nlohmann::json::object();
  for (const auto& [name, e] : rules)
    rules_json[name] = {{"count", e.count}, {"delta", num(e.delta)}, {"subtotal", num(e.subtotal)}};
  return {{"rules", rules_json}, {"total", num(total)}};
}

std::string Ledger::to_text() const {
  std::ostringstream os;
  for (const auto& [name, e] : rules)
    os << "  " << name << ": " << e.count << " x " << e.delta.str() << " = " << e.subtotal.str() << "\n";
  os << "  total: " << total.str() << "\n";
  return os.str();
}

// --------------------------------------------------------------- readback

namespace {

/// Readback with sharing: values reachable along several paths are read once.
class Reader {
 public:
  TermPtr read(const ValuePtr& v) {
    if (auto it = memo_.find(v.get()); it != memo_.end()) return it->second;
    TermPtr t = read_uncached(v);
    memo_.emplace(v.get(), t);
    return t;
  }

  /// Environment as instantiation arguments, outermost first. Entries the
  /// term does not mention are not read back.
  std::vector<TermPtr> env_terms(const TermPtr& t, const Env& env) {
    std::vector<TermPtr> out;
    std::size_t i = 0;
    for (const EnvNode* e = env.get(); e; e = e->next.get(), ++i)
      out.push_back(has_free_var(t, i) ? read(e->value) : mk::zero());
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  TermPtr read_uncached(const ValuePtr& v) {
    switch (v->kind) {
      case Value::Kind::Nat:
        return mk::numeral(v->n);
      case Value::Kind::Closure: {
        TermPtr lam = mk::lam(v->body);
        return instantiate(lam, env_terms(lam, v->env));
      }
      case Value::Kind::Pair:
        return mk::pair(read(v->a), read(v->b));
      case Value::Kind::Refl:
        return mk::refl(read(v->a));
      case Value::Kind::Nil:
        return mk::nil();
      case Value::Kind::Cons:
        return mk::cons(read(v->a), read(v->b));
      case Value::Kind::Fin: {
        TermPtr t = mk::fzero();
        for (std::uint64_t i = 0; i < v->n; ++i) t = mk::fsucc(t);
        return t;
      }
      case Value::Kind::Box:
        return mk::box(v->grade, read(v->a));
      case Value::Kind::Type:
        return v->body;
    }
    return mk::zero();
  }

  std::unordered_map<const Value*, TermPtr> memo_;
};

}  // namespace

TermPtr readback(const ValuePtr& v) { return Reader().read(v); }

std::string show_value(const ValuePtr& v) { return pretty(readback(v)); }

// -------------------------------------------------------------- evaluator

namespace {

struct Step {
  ValuePtr value;
  ExtNat cost;
};

class Evaluator {
 public:
  Evaluator(const CostModel& cm, const EvalOptions& opts) : cm_(cm), opts_(opts) {}

  Step run(const TermPtr& t, const Env& env) {
    if (opts_.step_limit && ++steps_ > opts_.step_limit)
      throw StepLimitExceeded("evaluation exceeded " + std::to_string(opts_.step_limit) + " steps");
    switch (t->tag) {
      case Tag::Var: {
        const EnvNode* e = env.get();
        for (std::size_t i = 0; i < t->index && e; ++i) e = e->next.get();
        if (!e) stuck("unbound variable", t);
        return {e->value, ExtNat{0}};
      }
      case Tag::Universe:
      case Tag::El:
      case Tag::Pi:
      case Tag::Sigma:
      case Tag::IdType:
      case Tag::Nat:
      case Tag::VecType:
      case Tag::FinType:
      case Tag::BoxType:
        return {val::type(normalize(close(t, env))), ExtNat{0}};
      case Tag::Lam:
        return {val::closure(t->kids[0], env), ExtNat{0}};
      case Tag::Ann:
        return run(t->kids[0], env);
      case Tag::App: {
        Step f = run(t->kids[0], env);
        Step a = run(t->kids[1], env);
        if (f.value->kind != Value::Kind::Closure) stuck("application of a non-function", t);
        Step r = run(f.value->body, env_push(f.value->env, a.value));
        return {r.value, f.cost + a.cost + r.cost + fire("app", Delta::App)};
      }
      case Tag::Pair: {
        Step a = run(t->kids[0], env);
        Step b = run(t->kids[1], env);
        return {val::pair(a.value, b.value), a.cost + b.cost};
      }
      case Tag::Proj1:
      case Tag::Proj2: {
        Step p = run(t->kids[0], env);
        if (p.value->kind != Value::Kind::Pair) stuck("projection from a non-pair", t);
        bool first = t->tag == Tag::Proj1;
        ExtNat d = first ? fire("proj1", Delta::Pi1) : fire("proj2", Delta::Pi2);
        return {first ? p.value->a : p.value->b, p.cost + d};
      }
      case Tag::Refl: {
        Step a = run(t->kids[0], env);
        return {val::refl(a.value), a.cost};
      }
      case Tag::J: {
        Step p = run(t->kids[1], env);
        if (p.value->kind != Value::Kind::Refl) stuck("J on a non-reflexivity proof", t);
        Step d = run(t->kids[2], env);
        return {d.value, p.cost + d.cost + fire("J", Delta::J)};
      }
      case Tag::Zero:
        return {val::nat(0), ExtNat{0}};
      case Tag::Succ: {
        Step n = run(t->kids[0], env);
        if (n.value->kind != Value::Kind::Nat) stuck("succ of a non-numeral", t);
        return {val::nat(n.value->n + 1), n.cost};
      }
      case Tag::PrimAdd: {
        Step a = run(t->kids[0], env);
        Step b = run(t->kids[1], env);
        if (a.value->kind != Value::Kind::Nat || b.value->kind != Value::Kind::Nat) stuck("add of non-numerals", t);
        return {val::nat(a.value->n + b.value->n), a.cost + b.cost + fire("add", Delta::Add)};
      }
      case Tag::NatRec:
        return natrec(t, env);
      case Tag::Nil:
        return {val::nil(), ExtNat{0}};
      case Tag::Cons: {
        Step h = run(t->kids[0], env);
        Step tl = run(t->kids[1], env);
        if (tl.value->kind != Value::Kind::Nil && tl.value->kind != Value::Kind::Cons) stuck("cons onto a non-vector", t);
        return {val::cons(h.value, tl.value), h.cost + tl.cost};
      }
      case Tag::VecRec:
        return vecrec(t, env);
      case Tag::FZero:
        return {val::fin(0), ExtNat{0}};
      case Tag::FSucc: {
        Step i = run(t->kids[0], env);
        if (i.value->kind != Value::Kind::Fin) stuck("fsucc of a non-index", t);
        return {val::fin(i.value->n + 1), i.cost};
      }
      case Tag::BoxIntro: {
        Step p = run(t->kids[0], env);
        return {val::box(t->grade, p.value), p.cost};
      }
      case Tag::Unbox: {
        Step b = run(t->kids[0], env);
        if (b.value->kind != Value::Kind::Box) stuck("unbox of a non-box", t);
        return {b.value->a, b.cost + fire("unbox", Delta::Unbox)};
      }
    }
    stuck("unknown node", t);
  }

  Ledger ledger;

 private:
  Step natrec(const TermPtr& t, const Env& env) {
    Step n = run(t->kids[1], env);
    if (n.value->kind != Value::Kind::Nat) stuck("natrec on a non-numeral", t);
    Step acc = run(t->kids[2], env);
    ExtNat cost = n.cost + acc.cost + fire("natrec", Delta::NatRec, true);
    for (std::uint64_t i = 0; i < n.value->n; ++i) {
      Step s = run(t->kids[3], env_push(env_push(env, val::nat(i)), acc.value));
      cost = cost + s.cost + fire("natrec", Delta::NatRec, true);
      acc.value = s.value;
    }
    return {acc.value, cost};
  }

  Step vecrec(const TermPtr& t, const Env& env) {
    Step v = run(t->kids[1], env);
    std::vector<ValuePtr> cells;  // cons cells, outermost first
    for (ValuePtr c = v.value; c->kind != Value::Kind::Nil; c = c->b) {
      if (c->kind != Value::Kind::Cons) stuck("vecrec on a non-vector", t);
      cells.push_back(c);
    }
    Step acc = run(t->kids[2], env);
    ExtNat cost = v.cost + acc.cost + fire("vecrec", Delta::VecRec, true);
    for (std::size_t j = cells.size(); j-- > 0;) {
      const ValuePtr& c = cells[j];
      Env e = env_push(env, val::nat(c->b->n));
      e = env_push(e, c->a);
      e = env_push(e, c->b);
      e = env_push(e, acc.value);
      Step s = run(t->kids[3], e);
      cost = cost + s.cost + fire("vecrec", Delta::VecRec, true);
      acc.value = s.value;
    }
    return {acc.value, cost};
  }

  ExtNat fire(const std::string& rule, Delta d, bool eliminator_step = false) {
    ExtNat delta = cm_[d];
    if (opts_.inject_bug && eliminator_step) delta = scale(ExtNat{5}, delta);
    ledger.charge(rule, delta);
    return delta;
  }

  static TermPtr close(const TermPtr& t, const Env& env) { return instantiate(t, Reader().env_terms(t, env)); }

  [[noreturn]] void stuck(const std::string& why, const TermPtr& t) const {
    throw EvalError("evaluation stuck (" + why + ") at " + debug_string(t));
  }

  const CostModel& cm_;
  const EvalOptions& opts_;
  std::uint64_t steps_ = 0;
};

}  // namespace

EvalResult eval(const TermPtr& t, const CostModel& cm, const EvalOptions& opts) {
  Evaluator ev(cm, opts);
  Step s = ev.run(t, nullptr);
  return {s.value, s.cost, std::move(ev.ledger)};
}

// ---------------------------------------------------- substitution reference

namespace {

class SubstEvaluator {
 public:
  explicit SubstEvaluator(const CostModel& cm) : cm_(cm) {}

  SubstEvalResult run(const TermPtr& t) {
    const ExtNat zero{0};
    switch (t->tag) {
      case Tag::Universe:
      case Tag::El:
      case Tag::Pi:
      case Tag::Sigma:
      case Tag::IdType:
      case Tag::Nat:
      case Tag::VecType:
      case Tag::FinType:
      case Tag::BoxType:
        return {normalize(t), zero};
      case Tag::Lam:
      case Tag::Zero:
      case Tag::Nil:
      case Tag::FZero:
        return {t, zero};
      case Tag::Var:
        throw EvalError("reference evaluator reached a free variable");
      case Tag::Ann:
        return run(t->kids[0]);
      case Tag::App: {
        auto f = run(t->kids[0]);
        auto a = run(t->kids[1]);
        if (f.value->tag != Tag::Lam) throw EvalError("reference evaluator: non-function applied");
        auto r = run(subst(f.value->kids[0], 0, a.value));
        return {r.value, f.cost + a.cost + r.cost + cm_[Delta::App]};
      }
      case Tag::Pair:
      case Tag::Cons: {
        auto a = run(t->kids[0]);
        auto b = run(t->kids[1]);
        return {mk::with_kids(*t, {a.value, b.value}, t->bound), a.cost + b.cost};
      }
      case Tag::Refl:
      case Tag::Succ:
      case Tag::FSucc:
      case Tag::BoxIntro: {
        auto a = run(t->kids[0]);
        return {mk::with_kids(*t, {a.value}, t->bound), a.cost};
      }
      case Tag::Proj1:
      case Tag::Proj2: {
        auto p = run(t->kids[0]);
        if (p.value->tag != Tag::Pair) throw EvalError("reference evaluator: projection from non-pair");
        bool first = t->tag == Tag::Proj1;
        return {p.value->kids[first ? 0 : 1], p.cost + cm_[first ? Delta::Pi1 : Delta::Pi2]};
      }
      case Tag::J: {
        auto p = run(t->kids[1]);
        auto d = run(t->kids[2]);
        return {d.value, p.cost + d.cost + cm_[Delta::J]};
      }
      case Tag::PrimAdd: {
        auto a = run(t->kids[0]);
        auto b = run(t->kids[1]);
        auto x = as_numeral(a.value), y = as_numeral(b.value);
        if (!x || !y) throw EvalError("reference evaluator: add of non-numerals");
        return {mk::numeral(*x + *y), a.cost + b.cost + cm_[Delta::Add]};
      }
      case Tag::Unbox: {
        auto b = run(t->kids[0]);
        if (b.value->tag != Tag::BoxIntro) throw EvalError("reference evaluator: unbox of non-box");
        return {b.value->kids[0], b.cost + cm_[Delta::Unbox]};
      }
      case Tag::NatRec: {
        auto n = run(t->kids[1]);
        auto k = as_numeral(n.value);
        if (!k) throw EvalError("reference evaluator: natrec on non-numeral");
        auto acc = run(t->kids[2]);
        ExtNat cost = n.cost + acc.cost + cm_[Delta::NatRec];
        for (std::uint64_t i = 0; i < *k; ++i) {
          auto s = run(instantiate(t->kids[3], {mk::numeral(i), acc.value}));
          cost = cost + s.cost + cm_[Delta::NatRec];
          acc.value = s.value;
        }
        return {acc.value, cost};
      }
      case Tag::VecRec: {
        auto v = run(t->kids[1]);
        auto elems = as_vec_literal(v.value);
        if (!elems) throw EvalError("reference evaluator: vecrec on non-vector");
        auto acc = run(t->kids[2]);
        ExtNat cost = v.cost + acc.cost + cm_[Delta::VecRec];
        std::vector<TermPtr> tails{mk::nil()};
        for (std::size_t j = elems->size(); j-- > 0;) {
          TermPtr tail = tails.back();
          std::uint64_t len = elems->size() - 1 - j;
          auto s = run(instantiate(t->kids[3], {mk::numeral(len), (*elems)[j], tail, acc.value}));
          cost = cost + s.cost + cm_[Delta::VecRec];
          acc.value = s.value;
          tails.push_back(mk::cons((*elems)[j], tail));
        }
        return {acc.value, cost};
      }
    }
    throw EvalError("reference evaluator: unknown node");
  }

 private:
  const CostModel& cm_;
};

}  // namespace

SubstEvalResult eval_by_substitution(const TermPtr& t, const CostModel& cm) { return SubstEvaluator(cm).run(t); }

}  // namespace rbm
