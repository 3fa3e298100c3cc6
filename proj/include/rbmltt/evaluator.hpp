#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rbmltt/cost_model.hpp"
#include "rbmltt/term.hpp"

namespace rbm {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

/// Persistent environment; index 0 is the innermost binding.
struct EnvNode {
  ValuePtr value;
  std::shared_ptr<const EnvNode> next;
};
using Env = std::shared_ptr<const EnvNode>;

Env env_push(const Env& env, ValuePtr v);
std::size_t env_size(const Env& env);

/// Canonical forms. Types are kept as closed normal terms.
struct Value {
  enum class Kind : std::uint8_t { Nat, Closure, Pair, Refl, Nil, Cons, Fin, Box, Type } kind = Kind::Nat;
  std::uint64_t n = 0;  // Nat: the numeral; Fin: FSucc height; Nil/Cons: length
  ExtNat grade;         // Box
  TermPtr body;         // Closure: Lam body under one binder; Type: the type
  Env env;              // Closure
  ValuePtr a, b;        // Pair components; Refl/Box payload in a; Cons head a, tail b
};

namespace val {
ValuePtr nat(std::uint64_t n);
ValuePtr closure(TermPtr body, Env env);
ValuePtr pair(ValuePtr a, ValuePtr b);
ValuePtr refl(ValuePtr a);
ValuePtr nil();
ValuePtr cons(ValuePtr head, ValuePtr tail);
ValuePtr fin(std::uint64_t height);
ValuePtr box(ExtNat grade, ValuePtr payload);
ValuePtr type(TermPtr t);
}  // namespace val

/// Reached a non-canonical scrutinee. Never expected for checked terms.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepLimitExceeded : public EvalError {
 public:
  using EvalError::EvalError;
};

/// Per-rule cost breakdown.
struct Ledger {
  struct Entry {
    std::uint64_t count = 0;
    ExtNat delta;
    ExtNat subtotal;
  };
  std::map<std::string, Entry> rules;  // keyed by rule name, e.g. "vecrec"
  ExtNat total;

  void charge(const std::string& rule, ExtNat delta);
  bool empty() const { return rules.empty(); }
  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct EvalOptions {
  std::uint64_t step_limit = 0;  // 0 = unlimited
  /// Development-only mutation: eliminator steps are overcharged so that the
  /// soundness suite has a bug to find.
  bool inject_bug = false;
};

struct EvalResult {
  ValuePtr value;
  ExtNat cost;
  Ledger ledger;
};

/// Big-step evaluation of a closed term with exact cost accounting.
EvalResult eval(const TermPtr& t, const CostModel& cm, const EvalOptions& opts = {});

/// Same semantics by textual substitution; slow, kept as a reference.
/// Returns the value as a term.
struct SubstEvalResult {
  TermPtr value;
  ExtNat cost;
};
SubstEvalResult eval_by_substitution(const TermPtr& t, const CostModel& cm);

/// Closed normal term denoting the value.
TermPtr readback(const ValuePtr& v);

/// Value printed in surface syntax (numerals and vector literals sugared).
std::string show_value(const ValuePtr& v);

}  // namespace rbm
