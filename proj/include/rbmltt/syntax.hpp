#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbmltt/bound.hpp"
#include "rbmltt/diagnostic.hpp"
#include "rbmltt/term.hpp"

namespace rbm {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourceSpan where, std::vector<std::string> expect = {});
  SourceSpan span;
  std::vector<std::string> expected;
};

/// Name resolution and shape errors found while translating to core terms.
class ElabError : public std::runtime_error {
 public:
  ElabError(const std::string& msg, SourceSpan where) : std::runtime_error(msg), span(std::move(where)) {}
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Surface syntax (named)
// ---------------------------------------------------------------------------

struct SExpr;
using SExprPtr = std::shared_ptr<const SExpr>;
struct SBound;
using SBoundPtr = std::shared_ptr<const SBound>;

enum class SBKind : std::uint8_t { Num, Inf, Name, Plus, Join, Scale, Log, Sum, Fold, At };

struct SBound {
  SBKind kind = SBKind::Num;
  std::uint64_t num = 0;  // Num, Scale coefficient
  std::string name;       // Name; binder of Sum/At
  SBoundPtr a, b;         // operands; Sum: upper, body; At: body
  SExprPtr term;          // At argument
  SourceSpan span;
};

enum class SKind : std::uint8_t {
  Name,      // identifier, including builtin constants
  Num,       // numeral literal
  Universe,  // U / U[s]
  Pi,        // binders[0] ("_" when anonymous), kids {dom, cod}, bound
  Sigma,     // binders[0], kids {first, second}
  Lam,       // binders (one or more), kids {body}
  App,       // kids {fn, arg}
  Pair,      // kids {a, b}
  VecLit,    // kids = elements
  BoxType,   // grade, kids {A}
  BoxIntro,  // grade, kids {t}
  NatRec,    // kids {motive, scrut, zcase, scase}; case_binders[1] = {m, ih}
  VecRec,    // kids {motive, scrut, nilcase, conscase}; case_binders[1] = {m, a, w, ih}
  JElim,     // kids {motive, proof, method}
  Ann,       // kids {term, type}
};

struct SExpr {
  SKind kind = SKind::Name;
  std::string name;
  std::uint64_t num = 0;
  ExtNat grade = ExtNat::inf();
  SBoundPtr bound;
  std::vector<std::string> binders;
  std::vector<std::vector<std::string>> case_binders;
  std::vector<SExprPtr> kids;
  SourceSpan span;
};

struct SurfaceDecl {
  std::string name;
  SExprPtr type;
  SExprPtr body;
  SBoundPtr expect_bound;  // null when absent
  SourceSpan span;
};

std::vector<SurfaceDecl> parse_program(std::string_view text, const std::string& file = {});
SExprPtr parse_expr(std::string_view text, const std::string& file = {});
SBoundPtr parse_surface_bound(std::string_view text, const std::string& file = {});

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

struct CoreDecl {
  std::string name;
  TermPtr type;
  TermPtr body;
  /// Pi binder names of the declared type, outermost first.
  std::vector<std::string> telescope;
  /// Expected bound over the telescope (index 0 = last binder), when annotated.
  std::optional<BoundPtr> expect_bound;
  SourceSpan span;
};

struct Program {
  std::vector<CoreDecl> decls;
  SpanMap spans;

  const CoreDecl* find(std::string_view name) const;
};

/// Names become de Bruijn indices; earlier declarations are inlined.
Program elaborate(const std::vector<SurfaceDecl>& decls);
Program load_program(std::string_view text, const std::string& file = {});

/// Elaborates an expression with `names` in scope (index 0 = names.back());
/// declarations of `defs`, when given, are visible and inlined.
TermPtr elaborate_expr(const SExprPtr& e, const std::vector<std::string>& names = {},
                       const Program* defs = nullptr, SpanMap* spans = nullptr);
TermPtr parse_term(std::string_view text, const std::vector<std::string>& names = {},
                   const Program* defs = nullptr);
BoundPtr parse_bound_text(std::string_view text, const std::vector<std::string>& names = {});

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Core term back to surface syntax; `names` label the free variables.
SExprPtr delaborate(const TermPtr& t, const std::vector<std::string>& names = {});
std::string print_expr(const SExprPtr& e);
std::string print_bound(const SBoundPtr& b);
std::string print_decl(const SurfaceDecl& d);

/// print_expr(delaborate(t)); parses back to a structurally equal term.
std::string pretty(const TermPtr& t, const std::vector<std::string>& names = {});
/// Closed type whose outer Pi binders take the given names where possible.
std::string pretty_type(const TermPtr& t, const std::vector<std::string>& telescope);
std::string pretty_bound(const BoundPtr& b, const std::vector<std::string>& names = {});

}  // namespace rbm
