#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbmltt/checker.hpp"
#include "rbmltt/evaluator.hpp"
#include "rbmltt/syntax.hpp"

namespace rbm {

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Relative weights of the productions tried at each node.
struct GenWeights {
  unsigned intro = 4;     // constructor of the goal
  unsigned variable = 3;  // a context variable of the goal type
  unsigned redex = 2;     // (fun x => body) a, plain or ascribed
  unsigned natrec = 2;
  unsigned vecrec = 2;
  unsigned project = 1;
  unsigned jelim = 1;
  unsigned unbox = 1;
  unsigned add = 2;
};

struct GenConfig {
  std::uint64_t seed = 1;
  unsigned max_depth = 6;
  std::uint64_t max_size = 8;  // largest numeral literal / vector length
  GenWeights weights;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Closed goal types: Nat, Vec Nat k, Fin k, Nat * Nat, (x : Nat) * Vec Nat x,
/// (x : Nat) ->[c*x + d] Nat, Id Nat a a, Box[s] Nat.
TermPtr random_goal(std::mt19937_64& rng, const GenConfig& cfg, const CostModel& cm);

/// Type-directed generator. Every term it returns checks against its goal
/// under the checker it was built with.
class Generator {
 public:
  Generator(GenConfig cfg, CheckerConfig checker);

  /// A closed term of the closed goal type.
  TermPtr term(const TermPtr& goal);
  /// A term of `goal` in `ctx`; `sized[i]` tells whether context entry i
  /// (innermost last) may appear inside size positions.
  TermPtr term_in(const Context& ctx, const std::vector<bool>& sized, const TermPtr& goal);
  /// A closed canonical value of the goal type, costing nothing to build
  /// under the value-free cost model.
  TermPtr value(const TermPtr& goal);

  std::mt19937_64& rng() { return rng_; }

 private:
  struct Scope;
  TermPtr gen(Scope& s, const TermPtr& goal, unsigned depth, bool sized);
  TermPtr gen_nat(Scope& s, unsigned depth, bool sized);
  TermPtr gen_vec(Scope& s, const TermPtr& len, unsigned depth, bool sized);
  TermPtr gen_fin(Scope& s, std::uint64_t k, unsigned depth);
  TermPtr gen_pi(Scope& s, const TermPtr& goal, unsigned depth);
  TermPtr gen_box(Scope& s, const TermPtr& goal, unsigned depth);
  TermPtr gen_redex(Scope& s, const TermPtr& goal, unsigned depth, bool sized);
  TermPtr gen_natrec(Scope& s, const TermPtr& goal, unsigned depth, bool sized);
  TermPtr gen_vecrec(Scope& s, const TermPtr& goal, unsigned depth, bool sized);
  TermPtr gen_jelim(Scope& s, const TermPtr& goal, unsigned depth, bool sized);
  TermPtr small_scrutinee(Scope& s);
  std::optional<TermPtr> pick_var(Scope& s, const TermPtr& goal, bool sized);
  std::optional<BoundPtr> bound_of(Scope& s, const TermPtr& t, const TermPtr& goal);
  TermPtr fallback(Scope& s, const TermPtr& goal);
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool coin(unsigned num, unsigned den) { return below(den) < num; }

  GenConfig cfg_;
  CheckerConfig checker_;
  std::mt19937_64 rng_;
};

struct CorpusItem {
  TermPtr goal;
  TermPtr term;
};

/// Deterministic in the configuration.
std::vector<CorpusItem> generate_corpus(const GenConfig& cfg, const CheckerConfig& checker, std::size_t count);

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

struct Finding {
  bool pass = true;
  std::string detail;  // term dump and numbers on failure
};

Finding check_cost_soundness(const TermPtr& t, const TermPtr& goal, const CheckerConfig& cfg,
                             const EvalOptions& opts = {});
Finding check_preservation(const TermPtr& t, const TermPtr& goal, const CheckerConfig& cfg);
Finding check_canonicity(const TermPtr& t, const TermPtr& goal, const CostModel& cm);

/// An open term over (n : Nat, x : A) and a closed value for x.
struct SubstitutionCase {
  TermPtr arg_type;  // A, closed
  TermPtr open;      // in context [n : Nat, x : A]
  TermPtr arg;       // closed value of A
};

std::vector<SubstitutionCase> generate_substitution_cases(const GenConfig& cfg, const CheckerConfig& checker,
                                                          std::size_t count);
Finding check_substitution(const SubstitutionCase& c, const CheckerConfig& cfg);

struct SuiteReport {
  std::string name;
  std::size_t total = 0;
  std::size_t passed = 0;
  std::vector<std::string> failures;  // first few only
  bool ok() const { return passed == total; }
};

struct MetatheoryOptions {
  GenConfig gen;
  std::size_t corpus_size = 1000;
  std::size_t substitution_cases = 300;
  EvalOptions eval;
};

/// Soundness runs under the default model and under the value-free model;
/// preservation and substitution run under the value-free model.
std::vector<SuiteReport> run_metatheory(const MetatheoryOptions& opts, const CheckerConfig& base);

nlohmann::json to_json(const std::vector<SuiteReport>& reports);

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

struct AuditRow {
  std::uint64_t n = 0;
  ExtNat cost;
  ExtNat bound;
  bool ok = false;
};

struct AuditReport {
  std::string program;
  std::string cost_model;
  std::string declared;     // expected bound, printed
  std::string synthesized;  // normal form of the synthesized body bound
  std::optional<Verdict> synthesized_vs_declared;
  std::vector<std::string> telescope;  // names for the verdict witness
  std::vector<AuditRow> rows;

  bool ok() const;
  nlohmann::json to_json() const;
  std::string to_table() const;
};

class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical argument for a parameter of type `dom`, given the size n.
TermPtr canonical_argument(const TermPtr& dom, std::uint64_t n, bool is_size);

/// Synthesized bound of the declaration body under its full telescope, when
/// the body is a lambda for every declared parameter.
std::optional<BoundPtr> synthesized_body_bound(const CoreDecl& d, const CheckerConfig& cfg);

/// Applies `d` to canonical arguments for each size and compares the measured
/// cost with the expected bound.
AuditReport audit(const CoreDecl& d, const std::vector<std::uint64_t>& sizes, const CheckerConfig& cfg);

/// Runs the declaration on explicit argument terms.
EvalResult run_decl(const CoreDecl& d, const std::vector<TermPtr>& args, const CostModel& cm);

}  // namespace rbm
