#pragma once

// Hand-rolled generators shared by the property tests.

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbmltt/bound.hpp"
#include "rbmltt/lattice.hpp"
#include "rbmltt/term.hpp"

namespace rbm::testing {

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

/// Small naturals, with infinity and the saturation edge now and then.
inline ExtNat random_extnat(std::mt19937_64& rng) {
  switch (rng() % 10) {
    case 0:
      return ExtNat::inf();
    case 1:
      return ExtNat{std::numeric_limits<std::uint64_t>::max() - pick(rng, 1, 3)};
    default:
      return ExtNat{pick(rng, 0, 40)};
  }
}

/// Bound over `vars` free size variables; `Sum` and `Fold` bodies may use
/// their binder. Scale coefficients and nesting stay small so that sampled
/// values fit comfortably below saturation.
inline BoundPtr random_bound(std::mt19937_64& rng, std::size_t vars, unsigned depth) {
  if (depth == 0 || rng() % 4 == 0) {
    if (vars > 0 && rng() % 2 == 0) return bnd::var(rng() % vars);
    return rng() % 5 == 0 ? bnd::bot() : bnd::constant(ExtNat{pick(rng, 0, 9)});
  }
  switch (rng() % 7) {
    case 0:
      return bnd::plus(random_bound(rng, vars, depth - 1), random_bound(rng, vars, depth - 1));
    case 1:
      return bnd::join(random_bound(rng, vars, depth - 1), random_bound(rng, vars, depth - 1));
    case 2:
      return bnd::scale(pick(rng, 0, 5), random_bound(rng, vars, depth - 1));
    case 3:
      return bnd::log2(random_bound(rng, vars, depth - 1));
    case 4: {
      // Linear upper limits keep the unrolled evaluation of nested sums cheap.
      BoundPtr upper = vars > 0 ? bnd::plus(bnd::scale(pick(rng, 0, 2), bnd::var(rng() % vars)),
                                            bnd::constant(ExtNat{pick(rng, 0, 5)}))
                                : bnd::constant(ExtNat{pick(rng, 0, 30)});
      return bnd::sum(upper, random_bound(rng, vars + 1, depth - 1));
    }
    case 5:
      return bnd::fold(random_bound(rng, vars, depth - 1), random_bound(rng, vars, depth - 1));
    default:
      if (vars == 0) return bnd::constant(ExtNat{pick(rng, 0, 9)});
      return bnd::plus(bnd::scale(pick(rng, 1, 4), bnd::var(rng() % vars)),
                       bnd::constant(ExtNat{pick(rng, 0, 9)}));
  }
}

/// Linear or quadratic polynomial in Var(0) with natural coefficients.
inline BoundPtr random_poly(std::mt19937_64& rng) {
  BoundPtr n = bnd::var(0);
  BoundPtr b = bnd::constant(ExtNat{pick(rng, 0, 6)});
  b = bnd::plus(b, bnd::scale(pick(rng, 0, 5), n));
  if (rng() % 3 == 0) b = bnd::plus(b, bnd::scale(pick(rng, 1, 2), bnd::fold(n, n)));
  return b;
}

/// Raw (not necessarily well-typed) term over `free` variables, for
/// syntactic properties of shifting and substitution.
inline TermPtr random_raw_term(std::mt19937_64& rng, std::size_t free, unsigned depth) {
  if (depth == 0 || rng() % 5 == 0) {
    if (free > 0 && rng() % 2 == 0) return mk::var(rng() % free);
    return rng() % 2 ? mk::zero() : mk::nat();
  }
  auto sub = [&](std::size_t extra) { return random_raw_term(rng, free + extra, depth - 1); };
  switch (rng() % 12) {
    case 0:
      return mk::lam(sub(1));
    case 1:
      return mk::app(sub(0), sub(0));
    case 2: {
      BoundPtr b = rng() % 2 ? bnd::plus(bnd::var(rng() % (free + 1)), bnd::constant(ExtNat{1}))
                         : bnd::constant(ExtNat{pick(rng, 0, 3)});
      return mk::pi(sub(0), b, sub(1));
    }
    case 3:
      return mk::sigma(sub(0), sub(1));
    case 4:
      return mk::pair(sub(0), sub(0));
    case 5:
      return mk::succ(sub(0));
    case 6:
      return mk::natrec(sub(1), sub(0), sub(0), sub(2));
    case 7:
      return mk::vecrec(sub(2), sub(0), sub(0), sub(4));
    case 8:
      return mk::j(sub(2), sub(0), sub(0));
    case 9:
      return mk::add(sub(0), sub(0));
    case 10:
      return mk::cons(sub(0), sub(0));
    default:
      return mk::box(ExtNat{pick(rng, 0, 5)}, sub(0));
  }
}

// n copies of x combined; zero copies are bottom even when x is infinite.
inline ExtNat times(ExtNat n, ExtNat x) {
  if (n == ExtNat{0} || x == ExtNat{0}) return ExtNat{0};
  if (n.is_inf() || x.is_inf()) return ExtNat::inf();
  unsigned __int128 p = static_cast<unsigned __int128>(n.value()) * x.value();
  if (p >= std::numeric_limits<std::uint64_t>::max()) return ExtNat::inf();
  return ExtNat{static_cast<std::uint64_t>(p)};
}

// Direct recursive evaluation, written independently of the library: sums
// and folds are unrolled, so closed forms never enter the picture.
// `env[0]` is the innermost variable.
inline ExtNat oracle(const BoundPtr& b, const std::vector<std::uint64_t>& env) {
  switch (b->tag) {
    case BTag::Const:
      return b->value;
    case BTag::Bot:
      return ExtNat{0};
    case BTag::Var:
      if (b->index >= env.size()) throw std::logic_error("oracle: unbound size variable");
      return ExtNat{env[b->index]};
    case BTag::Plus:
      return oracle(b->a, env) + oracle(b->b, env);
    case BTag::Join:
      return std::max(oracle(b->a, env), oracle(b->b, env));
    case BTag::Scale:
      return times(ExtNat{b->coef}, oracle(b->a, env));
    case BTag::Log: {
      ExtNat x = oracle(b->a, env);
      if (x.is_inf()) return x;
      // ceil(log2(x + 1)) is the bit width of x.
      return ExtNat{static_cast<std::uint64_t>(std::bit_width(x.value()))};
    }
    case BTag::Sum: {
      ExtNat n = oracle(b->a, env), acc{0};
      if (n.is_inf()) throw std::logic_error("oracle: infinite sum");
      std::vector<std::uint64_t> inner(env.size() + 1);
      std::copy(env.begin(), env.end(), inner.begin() + 1);
      for (std::uint64_t i = 0; i < n.value(); ++i) {
        inner[0] = i;
        acc = acc + oracle(b->b, inner);
      }
      return acc;
    }
    case BTag::Fold:
      return times(oracle(b->a, env), oracle(b->b, env));
    case BTag::Apply:
      throw std::logic_error("Apply is outside the oracle's fragment");
  }
  return ExtNat{0};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_path(const std::string& name) { return std::string(RBM_CORPUS_DIR) + "/" + name; }

}  // namespace rbm::testing
