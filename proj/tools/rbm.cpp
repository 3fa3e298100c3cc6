// rbm: check, run, audit and test resource-bounded programs.

#include <set>
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "rbmltt/checker.hpp"
#include "rbmltt/evaluator.hpp"
#include "rbmltt/harness.hpp"
#include "rbmltt/normalize.hpp"
#include "rbmltt/syntax.hpp"

using namespace rbm;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string cost_model;
  std::string budget = "inf";
  std::uint64_t sample_range = 16;
  std::uint64_t seed = 1;
  bool strict = false;
  bool json = false;
  bool trace = false;
  bool inject_bug = false;
  std::size_t corpus_size = 1000;
  std::size_t substitution_cases = 300;
  unsigned depth = 6;
  std::string sizes = "0..16";
  std::vector<std::string> paths;
  std::string run_path;
  std::string entry;
  std::vector<std::string> args;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExtNat parse_elem(const std::string& s) {
  if (s == "inf") return ExtNat::inf();
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s.front() != '-') return ExtNat{static_cast<std::uint64_t>(v)};
  } catch (const std::exception&) {
  }
  throw UsageError("expected a natural number or `inf`, got `" + s + "`");
}

/// Flag, then environment, then `<file>.cost` beside the source, then defaults.
CostModel cost_model_for(const Options& o, const std::string& source) {
  try {
    if (!o.cost_model.empty()) return CostModel::load(o.cost_model);
    if (const char* env = std::getenv("RBMLTT_COST_MODEL"); env && *env) return CostModel::load(env);
    if (!source.empty()) {
      std::filesystem::path sib = std::filesystem::path(source).replace_extension(".cost");
      if (std::filesystem::exists(sib)) return CostModel::load(sib.string());
    }
  } catch (const CostModelError& e) {
    throw UsageError(e.what());
  }
  return CostModel::defaults();
}

CheckerConfig checker_config(const Options& o, const std::string& source) {
  CheckerConfig cfg;
  cfg.budget = parse_elem(o.budget);
  cfg.costs = cost_model_for(o, source);
  if (o.sample_range < 1) throw UsageError("--sample-range must be at least 1");
  cfg.sample_range = o.sample_range;
  cfg.strict = o.strict;
  return cfg;
}

json span_json(const SourceSpan& s) {
  if (!s.known()) return {{"file", s.file}};
  return {{"file", s.file}, {"line", s.line}, {"col", s.col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

json diag_json(const Diagnostic& d) {
  return {{"code", d.code},
          {"severity", d.severity == Severity::Error ? "error" : "warning"},
          {"span", span_json(d.span)},
          {"message", d.message}};
}

/// Source errors as diagnostics.
Diagnostic front_error(const std::exception& e) {
  Diagnostic d;
  if (auto* pe = dynamic_cast<const ParseError*>(&e)) {
    d.code = "E-PARSE";
    d.span = pe->span;
  } else if (auto* ee = dynamic_cast<const ElabError*>(&e)) {
    d.code = "E-ELAB";
    d.span = ee->span;
  } else if (auto* ce = dynamic_cast<const CheckError*>(&e)) {
    return ce->diag;
  } else {
    d.code = "E-INTERNAL";
  }
  d.message = e.what();
  return d;
}

/// Declared type with each Π bound replaced by its normal form.
TermPtr with_normal_bounds(const TermPtr& t) {
  if (t->tag != Tag::Pi) return t;
  BoundPtr b = t->bound;
  try {
    b = nf_to_bound(bound_normalize(b));
  } catch (const BoundError&) {
  }
  return mk::pi(with_normal_bounds(t->kids[0]), b, with_normal_bounds(t->kids[1]));
}

Program load(const std::string& path) { return load_program(read_file(path), path); }

// ------------------------------------------------------------------ check

int cmd_check(const Options& o) {
  bool ok = true;
  json files = json::array();
  for (const auto& path : o.paths) {
    CheckerConfig cfg = checker_config(o, path);
    json decls = json::array();
    json file_diags = json::array();
    std::set<std::string> seen_warnings;
    Program prog;
    try {
      prog = load(path);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      Diagnostic d = front_error(e);
      if (d.span.file.empty()) d.span.file = path;
      ok = false;
      if (o.json) file_diags.push_back(diag_json(d));
      else std::cerr << d.str() << "\n";
      files.push_back({{"path", path}, {"declarations", decls}, {"diagnostics", file_diags}});
      continue;
    }
    for (const auto& d : prog.decls) {
      Checker ch(cfg, &prog.spans);
      json dj{{"name", d.name}};
      std::string type_text = pretty_type(with_normal_bounds(d.type), d.telescope);
      dj["type"] = type_text;
      try {
        ch.check_top(Context{}, d.body, d.type);
        auto synth = synthesized_body_bound(d, cfg);
        std::string bound_text = synth ? nf_to_string(bound_normalize(*synth), d.telescope) : std::string("0");
        dj["bound"] = bound_text;
        dj["status"] = "ok";
        if (!o.json) std::cout << d.name << " : " << type_text << " ✓\n  bound: " << bound_text << "\n";
      } catch (const CheckError& e) {
        ok = false;
        dj["status"] = "error";
        file_diags.push_back(diag_json(e.diag));
        if (!o.json) std::cout << d.name << " : " << type_text << " ✗\n" << e.diag.str() << "\n";
      }
      json warns = json::array();
      for (const auto& w : ch.warnings()) {
        // Inlined definitions re-report their own warnings; report each once per file.
        if (!seen_warnings.insert(w.str()).second) continue;
        warns.push_back(diag_json(w));
        if (!o.json) std::cout << w.str() << "\n";
        if (o.strict) ok = false;
      }
      dj["warnings"] = warns;
      decls.push_back(dj);
    }
    files.push_back({{"path", path}, {"declarations", decls}, {"diagnostics", file_diags}});
  }
  if (o.json) std::cout << json{{"files", files}, {"ok", ok}}.dump(2) << "\n";
  return ok ? kOk : kFailure;
}

// -------------------------------------------------------------------- run

int cmd_run(const Options& o) {
  const std::string& path = o.run_path;
  CheckerConfig cfg = checker_config(o, path);
  Program prog = load(path);
  const CoreDecl* d = prog.find(o.entry);
  if (!d) throw UsageError("no declaration named `" + o.entry + "` in " + path);
  if (o.args.size() > d->telescope.size())
    throw UsageError(o.entry + " takes " + std::to_string(d->telescope.size()) + " arguments, got " +
                     std::to_string(o.args.size()));
  Checker ch(cfg, &prog.spans);
  ch.check_top(Context{}, d->body, d->type);

  std::vector<TermPtr> args;
  TermPtr ty = d->type;
  for (std::size_t i = 0; i < o.args.size(); ++i) {
    TermPtr a = parse_term(o.args[i], {}, &prog);
    TermPtr dom = ty->kids[0];
    try {
      Checker(cfg).check(Context{}, a, dom);
    } catch (const CheckError& e) {
      throw CheckError(Diagnostic{"E-ARGUMENT", Severity::Error, {},
                                  "argument " + std::to_string(i + 1) + " (`" + o.args[i] + "`) does not have type " +
                                      pretty(normalize(dom)) + ": " + e.diag.message});
    }
    args.push_back(a);
    ty = subst(ty->kids[1], 0, a);
  }
  EvalResult r = run_decl(*d, args, cfg.costs);
  if (r.cost != r.ledger.total) throw std::logic_error("cost ledger does not add up to the measured cost");
  std::string shown = show_value(r.value);
  if (o.json) {
    json j{{"value", shown}, {"cost", r.cost.is_inf() ? json("inf") : json(r.cost.value())}, {"ok", true}};
    if (o.trace) j["ledger"] = r.ledger.to_json();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << shown << " (cost " << r.cost.str() << ")\n";
    if (o.trace) std::cout << r.ledger.to_text();
  }
  return kOk;
}

// ------------------------------------------------------------------ audit

std::vector<std::uint64_t> parse_sizes(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto num = [](const std::string& s) {
    ExtNat e = parse_elem(s);
    if (e.is_inf()) throw UsageError("sizes must be finite");
    return e.value();
  };
  if (auto dots = text.find(".."); dots != std::string::npos) {
    std::uint64_t lo = num(text.substr(0, dots)), hi = num(text.substr(dots + 2));
    for (std::uint64_t n = lo; n <= hi; ++n) out.push_back(n);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(num(item));
  }
  if (out.empty()) throw UsageError("empty sizes list");
  return out;
}

int cmd_audit(const Options& o) {
  std::vector<std::uint64_t> sizes = parse_sizes(o.sizes);
  bool ok = true;
  json reports = json::array(), skipped = json::array(), errors = json::array();
  for (const auto& path : o.paths) {
    CheckerConfig cfg = checker_config(o, path);
    Program prog = load(path);
    for (const auto& d : prog.decls) {
      if (!d.expect_bound) {
        skipped.push_back(d.name);
        if (!o.json) std::cout << "skipping " << d.name << ": no @expect_bound annotation\n";
        continue;
      }
      try {
        Checker(cfg, &prog.spans).check_top(Context{}, d.body, d.type);
        AuditReport rep = audit(d, sizes, cfg);
        ok = ok && rep.ok();
        reports.push_back(rep.to_json());
        if (!o.json) std::cout << rep.to_table() << "  " << (rep.ok() ? "PASS" : "FAIL") << "\n\n";
      } catch (const CheckError& e) {
        ok = false;
        errors.push_back(diag_json(e.diag));
        if (!o.json) std::cout << d.name << ": " << e.diag.str() << "\n";
      } catch (const AuditError& e) {
        ok = false;
        errors.push_back({{"program", d.name}, {"message", e.what()}});
        if (!o.json) std::cout << d.name << ": " << e.what() << "\n";
      }
    }
  }
  if (o.json) std::cout << json{{"reports", reports}, {"skipped", skipped}, {"errors", errors}, {"ok", ok}}.dump(2) << "\n";
  return ok ? kOk : kFailure;
}

// ------------------------------------------------------------- metatheory

int cmd_metatheory(const Options& o) {
  MetatheoryOptions mo;
  mo.gen.seed = o.seed;
  mo.gen.max_depth = o.depth;
  mo.corpus_size = o.corpus_size;
  mo.substitution_cases = std::max<std::size_t>(1, o.substitution_cases);
  mo.eval.inject_bug = o.inject_bug;
  mo.eval.step_limit = 50'000'000;
  try {
    mo.gen.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto reports = run_metatheory(mo, checker_config(o, ""));
  std::size_t passing = 0;
  for (const auto& r : reports) passing += r.ok() ? 1 : 0;
  if (o.json) {
    std::cout << to_json(reports).dump(2) << "\n";
  } else {
    for (const auto& r : reports) {
      std::cout << r.name << ": " << r.passed << "/" << r.total << (r.ok() ? " PASS" : " FAIL") << "\n";
      for (const auto& f : r.failures) std::cout << "  " << f << "\n";
    }
    std::cout << passing << "/" << reports.size() << " suites pass\n";
  }
  return passing == reports.size() ? kOk : kFailure;
}

// -------------------------------------------------------------------- fmt

int cmd_fmt(const Options& o) {
  json out = json::array();
  for (const auto& path : o.paths) {
    auto decls = parse_program(read_file(path), path);
    elaborate(decls);  // reject programs that do not elaborate
    std::string text;
    for (std::size_t i = 0; i < decls.size(); ++i) text += (i ? "\n" : "") + print_decl(decls[i]);
    if (o.json) out.push_back({{"path", path}, {"text", text}});
    else std::cout << text;
  }
  if (o.json) std::cout << json{{"files", out}, {"ok", true}}.dump(2) << "\n";
  return kOk;
}

int fail_with(bool json_mode, int code, const std::string& kind, const json& detail, const std::string& text) {
  if (json_mode) std::cout << json{{"ok", false}, {"error", kind}, {"detail", detail}, {"exit", code}}.dump(2) << "\n";
  else std::cerr << text << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  bool json_mode = false;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--json") json_mode = true;

  CLI::App app{"Resource-bounded type checker, evaluator and bound auditor"};
  app.require_subcommand(1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--cost-model", o.cost_model, "cost model file (key = value lines)");
    sub->add_option("--budget", o.budget, "ambient budget: a natural number or inf");
    sub->add_option("--sample-range", o.sample_range, "largest value tried per size variable in dominance checks");
    sub->add_flag("--strict", o.strict, "treat empirical dominance verdicts as errors");
    sub->add_flag("--json", o.json, "machine-readable output");
  };

  auto* check = app.add_subcommand("check", "type-check files and print synthesized bounds");
  common(check);
  check->add_option("paths", o.paths, "source files")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "evaluate a declaration on literal arguments");
  common(run);
  run->add_option("path", o.run_path, "source file")->required()->check(CLI::ExistingFile);
  run->add_option("entry", o.entry, "declaration to run")->required();
  // Arguments are collected as extras: CLI11 would split "[1,2]" in a vector option.
  run->allow_extras();
  run->add_flag("--trace", o.trace, "print the per-rule cost ledger");

  auto* aud = app.add_subcommand("audit", "compare measured cost with @expect_bound across sizes");
  common(aud);
  aud->add_option("paths", o.paths, "source files")->required()->check(CLI::ExistingFile);
  aud->add_option("--sizes", o.sizes, "sizes as lo..hi or a comma-separated list");

  auto* meta = app.add_subcommand("metatheory", "run the soundness, preservation, canonicity and substitution suites");
  common(meta);
  meta->add_option("--seed", o.seed, "generator seed");
  meta->add_option("--corpus-size", o.corpus_size, "generated terms per corpus");
  meta->add_option("--substitution-cases", o.substitution_cases, "generated substitution instances");
  meta->add_option("--depth", o.depth, "maximum generation depth");
  meta->add_flag("--inject-bug", o.inject_bug, "development only: overcharge eliminator steps at runtime");

  auto* fmt = app.add_subcommand("fmt", "print files in canonical layout");
  fmt->add_option("paths", o.paths, "source files")->required()->check(CLI::ExistingFile);
  fmt->add_flag("--json", o.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (json_mode) return fail_with(true, kUsage, "usage", e.what(), e.what());
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (check->parsed()) return cmd_check(o);
    if (run->parsed()) {
      o.args = run->remaining();
      for (const auto& a : o.args)
        if (a.rfind("--", 0) == 0) throw UsageError("unknown option " + a);
      return cmd_run(o);
    }
    if (aud->parsed()) return cmd_audit(o);
    if (meta->parsed()) return cmd_metatheory(o);
    if (fmt->parsed()) return cmd_fmt(o);
  } catch (const UsageError& e) {
    return fail_with(json_mode, kUsage, "usage", e.what(), std::string("rbm: ") + e.what());
  } catch (const CheckError& e) {
    return fail_with(json_mode, kFailure, "check", diag_json(e.diag), e.diag.str());
  } catch (const ParseError& e) {
    return fail_with(json_mode, kFailure, "parse", diag_json(front_error(e)), front_error(e).str());
  } catch (const ElabError& e) {
    return fail_with(json_mode, kFailure, "elaboration", diag_json(front_error(e)), front_error(e).str());
  } catch (const std::exception& e) {
    return fail_with(json_mode, kFailure, "internal", e.what(), std::string("rbm: internal error: ") + e.what());
  }
  return kUsage;
}
