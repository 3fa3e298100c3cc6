#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbmltt/bound.hpp"
#include "rbmltt/lattice.hpp"

namespace rbm {

/// Core syntax. De Bruijn indices; eliminator motives and branches are raw
/// bodies under their binders (see `binders_of`), not lambdas.
enum class Tag : std::uint8_t {
  Var,
  Universe,  // grade
  El,
  Pi,        // domain, codomain(1 binder); bound under the same binder
  Lam,       // body(1)
  App,
  Sigma,     // first, second(1)
  Pair,
  Proj1,
  Proj2,
  IdType,    // type, lhs, rhs
  Refl,
  J,         // motive(2: z, w), proof, method
  Nat,
  Zero,
  Succ,
  NatRec,    // motive(1: m), scrutinee, zcase, scase(2: m, ih)
  VecType,   // elem, len
  Nil,
  Cons,      // head, tail
  VecRec,    // motive(2: m, w), scrutinee, nilcase, conscase(4: m, a, w, ih)
  FinType,
  FZero,
  FSucc,
  BoxType,   // grade, payload type
  BoxIntro,  // grade, payload
  Unbox,
  PrimAdd,
  Ann,       // term, type: ascription used for inlined definitions
};

struct Term {
  Tag tag = Tag::Zero;
  std::size_t index = 0;  // Var
  ExtNat grade;           // Universe, BoxType, BoxIntro
  BoundPtr bound;         // Pi
  std::vector<TermPtr> kids;
};

std::string_view tag_name(Tag t);

/// Number of binders each child of a node of this tag sits under.
std::size_t binders_of(Tag t, std::size_t child);

namespace mk {
TermPtr var(std::size_t i);
TermPtr universe(ExtNat grade);
TermPtr el(TermPtr a);
TermPtr pi(TermPtr dom, BoundPtr bound, TermPtr cod);
TermPtr arrow(TermPtr dom, BoundPtr bound, TermPtr cod);  // codomain not under the binder
TermPtr lam(TermPtr body);
TermPtr app(TermPtr f, TermPtr a);
TermPtr app(TermPtr f, std::initializer_list<TermPtr> args);
TermPtr sigma(TermPtr a, TermPtr b);
TermPtr pair(TermPtr a, TermPtr b);
TermPtr proj1(TermPtr p);
TermPtr proj2(TermPtr p);
TermPtr id(TermPtr type, TermPtr lhs, TermPtr rhs);
TermPtr refl(TermPtr a);
TermPtr j(TermPtr motive, TermPtr proof, TermPtr method);
TermPtr nat();
TermPtr zero();
TermPtr succ(TermPtr n);
TermPtr numeral(std::uint64_t n);
TermPtr natrec(TermPtr motive, TermPtr scrut, TermPtr zcase, TermPtr scase);
TermPtr vec(TermPtr elem, TermPtr len);
TermPtr nil();
TermPtr cons(TermPtr head, TermPtr tail);
TermPtr vec_literal(const std::vector<TermPtr>& elems);
TermPtr vecrec(TermPtr motive, TermPtr scrut, TermPtr nilcase, TermPtr conscase);
TermPtr fin(TermPtr n);
TermPtr fzero();
TermPtr fsucc(TermPtr i);
TermPtr box_type(ExtNat grade, TermPtr a);
TermPtr box(ExtNat grade, TermPtr t);
TermPtr unbox(TermPtr t);
TermPtr add(TermPtr a, TermPtr b);
TermPtr ann(TermPtr t, TermPtr type);
TermPtr with_kids(const Term& t, std::vector<TermPtr> kids, BoundPtr bound);
}  // namespace mk

/// Ordered list of types, innermost last.
struct Context {
  std::vector<TermPtr> types;
  std::vector<std::string> names;  // display only; parallel to types

  std::size_t size() const { return types.size(); }
  /// Type of Var(i), shifted into the full context.
  TermPtr lookup(std::size_t i) const;
  Context extend(TermPtr type, std::string name = {}) const;
};

TermPtr shift(const TermPtr& t, std::ptrdiff_t amount, std::size_t cutoff = 0);

/// t[index := replacement]; the replacement lives in the context with the
/// variable removed, free indices above `index` drop by one.
TermPtr subst(const TermPtr& t, std::size_t index, const TermPtr& replacement);

/// Instantiates the innermost `args.size()` binders of `body`; args[0] is the
/// outermost one. Each argument lives in the context outside the binders.
TermPtr instantiate(const TermPtr& body, const std::vector<TermPtr>& args);

/// Replaces Var(0) by `replacement`, where the replacement lives in the same
/// context as `body` (e.g. C[m := S m]).
TermPtr replace_top(const TermPtr& body, const TermPtr& replacement);

/// Identical trees; Pi bounds compared by normal form.
bool structural_eq(const TermPtr& a, const TermPtr& b);

/// Total order used to canonicalize sums of neutral terms.
int term_compare(const TermPtr& a, const TermPtr& b);

bool has_free_var(const TermPtr& t, std::size_t index);
/// Largest free index + 1 (0 when closed).
std::size_t free_var_bound(const TermPtr& t);
bool is_closed(const TermPtr& t);

std::optional<std::uint64_t> as_numeral(const TermPtr& t);
std::optional<std::vector<TermPtr>> as_vec_literal(const TermPtr& t);

/// Reads an N-typed term as a size expression (Zero, Succ, PrimAdd, Var).
std::optional<BoundPtr> syntactic_size(const TermPtr& t);

/// Size reading where succ and add distribute and any other subterm becomes
/// an opaque application of that subterm.
BoundPtr size_of(const TermPtr& t);

/// Head is zero, a variable, succ or add: size_of then makes progress.
bool size_decomposes(const TermPtr& t);

/// Compact debugging dump (de Bruijn form).
std::string debug_string(const TermPtr& t);

std::size_t term_size(const TermPtr& t);

}  // namespace rbm
