#pragma once

#include <optional>
#include <vector>

#include "rbmltt/bound.hpp"
#include "rbmltt/cost_model.hpp"
#include "rbmltt/diagnostic.hpp"
#include "rbmltt/term.hpp"

namespace rbm {

struct CheckerConfig {
  ExtNat budget = ExtNat::inf();  // ambient budget r; violations only warn
  CostModel costs = CostModel::defaults();
  std::uint64_t sample_range = 16;
  bool strict = false;  // Empirical dominance verdicts become errors
};

struct TypingResult {
  TermPtr type;
  BoundPtr bound;
};

/// Bidirectional checker synthesizing a cost bound for every judgment.
/// Errors are thrown as CheckError; warnings accumulate.
class Checker {
 public:
  explicit Checker(CheckerConfig cfg = {}, const SpanMap* spans = nullptr);

  void check_context(const Context& ctx);
  BoundPtr infer_type_formation(const Context& ctx, const TermPtr& a);
  TypingResult infer(const Context& ctx, const TermPtr& t);
  BoundPtr check(const Context& ctx, const TermPtr& t, const TermPtr& type);

  /// Checks a declaration (or infers when `type` is null) and compares the
  /// final bound against the ambient budget.
  TypingResult check_top(const Context& ctx, const TermPtr& t, const TermPtr& type);

  /// Subtyping used by check mode: conversion plus 𝒰/□ grade monotonicity and
  /// Π bound weakening.
  bool subsumes(const TermPtr& actual, const TermPtr& expected) const;

  const std::vector<Diagnostic>& warnings() const { return warnings_; }
  void clear_warnings() { warnings_.clear(); }
  const CheckerConfig& config() const { return cfg_; }

 private:
  struct SpanGuard;

  TypingResult infer_impl(const Context& ctx, const TermPtr& t);
  BoundPtr check_impl(const Context& ctx, const TermPtr& t, const TermPtr& type);
  BoundPtr formation_impl(const Context& ctx, const TermPtr& a);
  void check_size_vars(const Context& ctx, const BoundPtr& b);

  TypingResult infer_app(const Context& ctx, const TermPtr& t);
  TypingResult infer_natrec(const Context& ctx, const TermPtr& t);
  TypingResult infer_vecrec(const Context& ctx, const TermPtr& t);
  TypingResult infer_j(const Context& ctx, const TermPtr& t);

  /// Applies a dominance verdict: Refuted is an error with `code`, Empirical a warning.
  void require_leq(const BoundPtr& lhs, const BoundPtr& rhs, const char* code, const std::string& what,
                   const Context& ctx);

  [[noreturn]] void fail(const std::string& code, const std::string& message) const;
  void warn(const std::string& code, const std::string& message);
  [[noreturn]] void mismatch(const Context& ctx, const TermPtr& expected, const TermPtr& actual,
                             const std::string& what) const;

  BoundPtr delta(Delta d) const { return bnd::constant(cfg_.costs[d]); }

  CheckerConfig cfg_;
  const SpanMap* spans_;
  std::vector<SourceSpan> span_stack_;
  std::vector<Diagnostic> warnings_;
};

}  // namespace rbm
