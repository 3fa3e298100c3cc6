#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbmltt/lattice.hpp"

namespace rbm {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Bound;
using BoundPtr = std::shared_ptr<const Bound>;

/// Symbolic cost expression over size variables.
///
/// Size variables are de Bruijn indices into the surrounding term context,
/// so bounds shift and substitute in lockstep with the terms they annotate.
/// `Sum`, `Apply` bind one extra variable (index 0) in their body.
enum class BTag : std::uint8_t {
  Const,  // lattice element
  Bot,
  Var,    // size variable
  Plus,   // a ⊕ b
  Join,   // a ⊔ b
  Scale,  // coef · a
  Log,    // ⌈log2(a + 1)⌉
  Apply,  // body(x := value of term)
  Sum,    // Σ_{i < a} body(i)
  Fold,   // a ⊗ body
};

struct Bound {
  BTag tag = BTag::Bot;
  ExtNat value;              // Const
  std::uint64_t coef = 0;    // Scale
  std::size_t index = 0;     // Var
  BoundPtr a;                // Plus/Join lhs, Scale/Log argument, Sum upper, Fold count, Apply body
  BoundPtr b;                // Plus/Join rhs, Sum/Fold body
  TermPtr term;              // Apply argument
};

namespace bnd {
BoundPtr constant(ExtNat v);
BoundPtr bot();
BoundPtr var(std::size_t i);
BoundPtr plus(BoundPtr a, BoundPtr b);
BoundPtr plus(std::initializer_list<BoundPtr> parts);
BoundPtr join(BoundPtr a, BoundPtr b);
BoundPtr scale(std::uint64_t c, BoundPtr a);
BoundPtr log2(BoundPtr a);
BoundPtr apply(BoundPtr body, TermPtr arg);
BoundPtr sum(BoundPtr upper, BoundPtr body);
BoundPtr fold(BoundPtr count, BoundPtr body);
}  // namespace bnd

class BoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values for free size variables, keyed by de Bruijn index.
using SizeEnv = std::map<std::size_t, std::uint64_t>;

/// Looks up a size variable, including binder-introduced ones.
using SizeLookup = std::function<std::optional<ExtNat>(std::size_t)>;

/// Turns the term argument of an `Apply` node into a number, given values for
/// the term's free variables. Returns nullopt when the term has no numeric value.
using TermResolver = std::function<std::optional<ExtNat>(const TermPtr&, const SizeLookup&)>;

ExtNat bound_eval(const BoundPtr& b, const SizeEnv& env, const TermResolver* resolver = nullptr);
ExtNat bound_eval(const BoundPtr& b, const SizeLookup& lookup, const TermResolver* resolver = nullptr);

/// Free size variables, including variables of `Apply` term arguments.
std::vector<std::size_t> bound_free_vars(const BoundPtr& b);
bool bound_mentions(const BoundPtr& b, std::size_t index);
bool bound_is_closed(const BoundPtr& b);

/// Adds `amount` to every free index >= cutoff (amount may be negative when
/// the affected range is known to be unused).
BoundPtr bound_shift(const BoundPtr& b, std::ptrdiff_t amount, std::size_t cutoff = 0);

/// Replaces size variable `index` by `replacement`, a size expression living in
/// the context with `index` removed. Indices above `index` drop by one.
BoundPtr bound_subst(const BoundPtr& b, std::size_t index, const BoundPtr& replacement);

/// Term-aware substitution: size occurrences become `size` when the argument
/// has a size reading, else an opaque application of the term; `Apply`
/// arguments receive the term itself.
BoundPtr bound_subst_term(const BoundPtr& b, std::size_t index, const TermPtr& term,
                          const std::optional<BoundPtr>& size);

/// Rewrites the term argument of every `Apply` node.
BoundPtr bound_map_terms(const BoundPtr& b,
                         const std::function<TermPtr(const TermPtr&, std::size_t depth)>& f);

/// Names for printing: index 0 is names.back().
std::string bound_to_string(const BoundPtr& b, const std::vector<std::string>& names = {});

bool bound_syntactic_eq(const BoundPtr& x, const BoundPtr& y);

// ---------------------------------------------------------------------------
// Normal form
// ---------------------------------------------------------------------------

/// Exact non-negative-denominator rational used for Faulhaber coefficients.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);
  friend bool operator==(const Rational&, const Rational&) = default;
  bool is_zero() const { return num == 0; }
  bool positive() const { return num > 0; }
};

Rational operator+(const Rational& x, const Rational& y);
Rational operator-(const Rational& x, const Rational& y);
Rational operator*(const Rational& x, const Rational& y);
bool operator<(const Rational& x, const Rational& y);

struct Factor {
  enum class Kind : std::uint8_t { Var, Log, Opaque } kind = Kind::Var;
  std::size_t index = 0;
  BoundPtr opaque;
  std::string key;  // canonical text for opaque factors

  friend bool operator<(const Factor& x, const Factor& y);
  friend bool operator==(const Factor& x, const Factor& y);
};

using Monomial = std::vector<Factor>;  // sorted multiset

struct PolySum {
  std::map<Monomial, Rational> terms;  // empty monomial = constant
  bool infinite = false;

  friend bool operator==(const PolySum&, const PolySum&) = default;
  friend bool operator<(const PolySum& x, const PolySum& y);
};

/// Canonical form: a max over polynomial sums.
struct BoundNF {
  std::vector<PolySum> alts;

  friend bool operator==(const BoundNF&, const BoundNF&) = default;
};

BoundNF bound_normalize(const BoundPtr& b);
ExtNat nf_eval(const BoundNF& nf, const SizeLookup& lookup, const TermResolver* resolver = nullptr);
std::string nf_to_string(const BoundNF& nf, const std::vector<std::string>& names = {});
std::vector<std::size_t> nf_free_vars(const BoundNF& nf);

/// Converts a single-alternative NF with natural coefficients back into a
/// bound expression; used for display and for comparing against sources.
BoundPtr nf_to_bound(const BoundNF& nf);

// ---------------------------------------------------------------------------
// Dominance
// ---------------------------------------------------------------------------

struct Verdict {
  enum class Kind : std::uint8_t { Proved, Refuted, Empirical } kind = Kind::Empirical;
  SizeEnv witness;          // Refuted
  std::uint64_t range = 0;  // Empirical: each variable checked in 0..range

  bool proved() const { return kind == Kind::Proved; }
  bool refuted() const { return kind == Kind::Refuted; }
  bool empirical() const { return kind == Kind::Empirical; }
  std::string str(const std::vector<std::string>& names = {}) const;
};

/// Sound, incomplete decision of b1 ≼ b2 for all size assignments.
Verdict bound_leq(const BoundPtr& b1, const BoundPtr& b2, std::uint64_t sample_range,
                  const TermResolver* resolver = nullptr);

/// Coefficient dominance only (no sampling).
bool nf_dominated(const BoundNF& lhs, const BoundNF& rhs);

}  // namespace rbm
