#include <bit>
#include <cmath>
#include <limits>
#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "rbmltt/bound.hpp"
#include "rbmltt/term.hpp"

namespace rbm {

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw BoundError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
}

namespace {
Rational from128(__int128 n, __int128 d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
  if (n > kMax || -n > kMax || d > kMax) throw BoundError("coefficient overflow in bound normalization");
  return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}
}  // namespace

Rational operator+(const Rational& x, const Rational& y) {
  return from128(static_cast<__int128>(x.num) * y.den + static_cast<__int128>(y.num) * x.den,
                 static_cast<__int128>(x.den) * y.den);
}
Rational operator-(const Rational& x, const Rational& y) { return x + Rational(-y.num, y.den); }
Rational operator*(const Rational& x, const Rational& y) {
  return from128(static_cast<__int128>(x.num) * y.num, static_cast<__int128>(x.den) * y.den);
}
bool operator<(const Rational& x, const Rational& y) {
  return static_cast<__int128>(x.num) * y.den < static_cast<__int128>(y.num) * x.den;
}

// ---------------------------------------------------------------------------
// Factors and polynomials
// ---------------------------------------------------------------------------

bool operator<(const Factor& x, const Factor& y) {
  if (x.kind != y.kind) return x.kind < y.kind;
  if (x.kind == Factor::Kind::Opaque) return x.key < y.key;
  return x.index < y.index;
}

bool operator==(const Factor& x, const Factor& y) {
  if (x.kind != y.kind) return false;
  if (x.kind == Factor::Kind::Opaque) return x.key == y.key;
  return x.index == y.index;
}

bool operator<(const PolySum& x, const PolySum& y) {
  if (x.infinite != y.infinite) return x.infinite < y.infinite;
  return x.terms < y.terms;
}

namespace {

using Poly = std::map<Monomial, Rational>;

void add_term(Poly& p, Monomial m, const Rational& c) {
  if (c.is_zero()) return;
  std::sort(m.begin(), m.end());
  auto [it, inserted] = p.emplace(std::move(m), c);
  if (!inserted) {
    it->second = it->second + c;
    if (it->second.is_zero()) p.erase(it);
  }
}

Poly poly_mul(const Poly& x, const Poly& y) {
  Poly r;
  for (const auto& [mx, cx] : x)
    for (const auto& [my, cy] : y) {
      Monomial m = mx;
      m.insert(m.end(), my.begin(), my.end());
      add_term(r, std::move(m), cx * cy);
    }
  return r;
}

Poly poly_add(const Poly& x, const Poly& y) {
  Poly r = x;
  for (const auto& [m, c] : y) add_term(r, m, c);
  return r;
}

Poly poly_scale(const Poly& x, const Rational& c) {
  Poly r;
  for (const auto& [m, cm] : x) add_term(r, m, cm * c);
  return r;
}

Poly poly_const(std::int64_t c) {
  Poly p;
  add_term(p, {}, Rational(c));
  return p;
}

/// Σ_{i<p} i^d as a polynomial in p, d ≤ 3.
Poly faulhaber(const Poly& p, int d) {
  Poly p2 = poly_mul(p, p);
  switch (d) {
    case 0:
      return p;
    case 1:
      return poly_add(poly_scale(p2, Rational(1, 2)), poly_scale(p, Rational(-1, 2)));
    case 2: {
      Poly p3 = poly_mul(p2, p);
      return poly_add(poly_add(poly_scale(p3, Rational(1, 3)), poly_scale(p2, Rational(-1, 2))),
                      poly_scale(p, Rational(1, 6)));
    }
    default: {
      Poly p3 = poly_mul(p2, p);
      Poly p4 = poly_mul(p3, p);
      return poly_add(poly_add(poly_scale(p4, Rational(1, 4)), poly_scale(p3, Rational(-1, 2))),
                      poly_scale(p2, Rational(1, 4)));
    }
  }
}

std::string nf_key(const BoundNF& nf);

std::string opaque_key(const BoundPtr& b) {
  switch (b->tag) {
    case BTag::Log:
      return "log2(" + nf_key(bound_normalize(b->a)) + ")";
    case BTag::Apply:
      return "at(" + nf_key(bound_normalize(b->a)) + "," + debug_string(b->term) + ")";
    case BTag::Sum:
      return "sum(" + nf_key(bound_normalize(b->a)) + "," + nf_key(bound_normalize(b->b)) + ")";
    case BTag::Fold:
      return "fold(" + nf_key(bound_normalize(b->a)) + "," + nf_key(bound_normalize(b->b)) + ")";
    default:
      return bound_to_string(b);
  }
}

Factor opaque_factor(const BoundPtr& b) {
  Factor f;
  f.kind = Factor::Kind::Opaque;
  f.opaque = b;
  f.key = opaque_key(b);
  return f;
}

BoundNF single(PolySum s) { return BoundNF{{std::move(s)}}; }

BoundNF zero_nf() { return single(PolySum{}); }

BoundNF inf_nf() {
  PolySum s;
  s.infinite = true;
  return single(s);
}

BoundNF poly_nf(Poly p) {
  PolySum s;
  s.terms = std::move(p);
  return single(std::move(s));
}

BoundNF factor_nf(Factor f) {
  Poly p;
  add_term(p, {std::move(f)}, Rational(1));
  return poly_nf(std::move(p));
}

bool alt_dominated(const PolySum& s, const PolySum& t);

BoundNF canonical(std::vector<PolySum> alts) {
  std::sort(alts.begin(), alts.end());
  alts.erase(std::unique(alts.begin(), alts.end()), alts.end());
  std::vector<PolySum> kept;
  for (std::size_t i = 0; i < alts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < alts.size() && !dominated; ++j)
      if (i != j && alt_dominated(alts[i], alts[j])) dominated = true;
    if (!dominated) kept.push_back(alts[i]);
  }
  if (kept.empty()) kept.push_back(PolySum{});
  return BoundNF{std::move(kept)};
}

BoundNF nf_plus(const BoundNF& x, const BoundNF& y) {
  std::vector<PolySum> alts;
  for (const auto& a : x.alts)
    for (const auto& b : y.alts) {
      PolySum s;
      s.infinite = a.infinite || b.infinite;
      if (!s.infinite) s.terms = poly_add(a.terms, b.terms);
      alts.push_back(std::move(s));
    }
  return canonical(std::move(alts));
}

bool is_zero(const PolySum& s) { return !s.infinite && s.terms.empty(); }

bool is_positive_const(const PolySum& s) {
  if (s.infinite) return true;
  return s.terms.size() == 1 && s.terms.begin()->first.empty() && s.terms.begin()->second.positive();
}

/// Shifts factor indices down by one after leaving a binder.
std::optional<Factor> lower(const Factor& f) {
  switch (f.kind) {
    case Factor::Kind::Var:
    case Factor::Kind::Log:
      if (f.index == 0) return std::nullopt;
      return Factor{f.kind, f.index - 1, nullptr, {}};
    case Factor::Kind::Opaque:
      if (bound_mentions(f.opaque, 0)) return std::nullopt;
      return opaque_factor(bound_shift(f.opaque, -1, 0));
  }
  return std::nullopt;
}

std::optional<BoundNF> sum_closed(const BoundNF& upper, const BoundNF& body) {
  if (upper.alts.size() != 1 || body.alts.size() != 1) return std::nullopt;
  const PolySum& u = upper.alts[0];
  const PolySum& s = body.alts[0];
  if (is_zero(u)) return zero_nf();
  if (s.infinite) {
    if (is_positive_const(u)) return inf_nf();
    return std::nullopt;
  }
  if (u.infinite) {
    if (is_zero(s)) return zero_nf();
    return std::nullopt;
  }
  Poly result;
  for (const auto& [m, c] : s.terms) {
    int degree = 0;
    Monomial rest;
    for (const Factor& f : m) {
      if (f.kind == Factor::Kind::Var && f.index == 0) {
        ++degree;
        continue;
      }
      auto low = lower(f);
      if (!low) return std::nullopt;
      rest.push_back(*low);
    }
    if (degree > 3) return std::nullopt;
    Poly restp;
    add_term(restp, rest, c);
    result = poly_add(result, poly_mul(restp, faulhaber(u.terms, degree)));
  }
  return poly_nf(std::move(result));
}

std::optional<BoundNF> fold_nf(const BoundNF& x, const BoundNF& y) {
  std::vector<PolySum> alts;
  for (const auto& a : x.alts)
    for (const auto& b : y.alts) {
      if (is_zero(a) || is_zero(b)) {
        alts.push_back(PolySum{});
      } else if (a.infinite || b.infinite) {
        if (!is_positive_const(a) || !is_positive_const(b)) return std::nullopt;
        PolySum s;
        s.infinite = true;
        alts.push_back(s);
      } else {
        PolySum s;
        s.terms = poly_mul(a.terms, b.terms);
        alts.push_back(std::move(s));
      }
    }
  return canonical(std::move(alts));
}

BoundNF normalize_rec(const BoundPtr& b) {
  switch (b->tag) {
    case BTag::Bot:
      return zero_nf();
    case BTag::Const:
      if (b->value.is_inf()) return inf_nf();
      return poly_nf(poly_const(static_cast<std::int64_t>(b->value.value())));
    case BTag::Var:
      return factor_nf(Factor{Factor::Kind::Var, b->index, nullptr, {}});
    case BTag::Plus:
      return nf_plus(normalize_rec(b->a), normalize_rec(b->b));
    case BTag::Join: {
      BoundNF x = normalize_rec(b->a), y = normalize_rec(b->b);
      x.alts.insert(x.alts.end(), y.alts.begin(), y.alts.end());
      return canonical(std::move(x.alts));
    }
    case BTag::Scale: {
      if (b->coef == 0) return zero_nf();
      BoundNF x = normalize_rec(b->a);
      for (auto& s : x.alts)
        if (!s.infinite) s.terms = poly_scale(s.terms, Rational(static_cast<std::int64_t>(b->coef)));
      return canonical(std::move(x.alts));
    }
    case BTag::Log: {
      BoundNF x = normalize_rec(b->a);
      if (x.alts.size() == 1) {
        const PolySum& s = x.alts[0];
        if (s.infinite) return inf_nf();
        if (s.terms.empty()) return zero_nf();
        if (s.terms.size() == 1) {
          const auto& [m, c] = *s.terms.begin();
          if (m.empty() && c.den == 1 && c.num > 0)
            return poly_nf(poly_const(std::bit_width(static_cast<std::uint64_t>(c.num))));
          if (m.size() == 1 && m[0].kind == Factor::Kind::Var && c == Rational(1))
            return factor_nf(Factor{Factor::Kind::Log, m[0].index, nullptr, {}});
        }
      }
      return factor_nf(opaque_factor(b));
    }
    case BTag::Apply: {
      if (size_decomposes(b->term)) return normalize_rec(bound_subst(b->a, 0, size_of(b->term)));
      if (!bound_mentions(b->a, 0)) return normalize_rec(bound_shift(b->a, -1, 0));
      return factor_nf(opaque_factor(b));
    }
    case BTag::Sum: {
      if (auto r = sum_closed(normalize_rec(b->a), normalize_rec(b->b))) return *r;
      return factor_nf(opaque_factor(b));
    }
    case BTag::Fold: {
      if (auto r = fold_nf(normalize_rec(b->a), normalize_rec(b->b))) return *r;
      return factor_nf(opaque_factor(b));
    }
  }
  return zero_nf();
}

std::string rational_str(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return "(" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
}

std::string factor_str(const Factor& f, const std::vector<std::string>& names) {
  switch (f.kind) {
    case Factor::Kind::Var:
      return bound_to_string(bnd::var(f.index), names);
    case Factor::Kind::Log:
      return "log2(" + bound_to_string(bnd::var(f.index), names) + ")";
    case Factor::Kind::Opaque:
      return bound_to_string(f.opaque, names);
  }
  return "?";
}

std::string poly_str(const PolySum& s, const std::vector<std::string>& names) {
  if (s.infinite) return "inf";
  if (s.terms.empty()) return "0";
  std::vector<std::pair<Monomial, Rational>> items(s.terms.begin(), s.terms.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
  std::string out;
  bool first = true;
  for (const auto& [m, c] : items) {
    Rational mag = c.num < 0 ? Rational(-c.num, c.den) : c;
    if (first) {
      if (c.num < 0) out += "-";
    } else {
      out += c.num < 0 ? " - " : " + ";
    }
    first = false;
    std::string body;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) body += "*";
      body += factor_str(m[i], names);
    }
    if (m.empty()) {
      out += rational_str(mag);
    } else if (mag == Rational(1)) {
      out += body;
    } else {
      out += rational_str(mag) + "*" + body;
    }
  }
  return out;
}

std::string nf_key(const BoundNF& nf) {
  std::string s;
  for (const auto& a : nf.alts) {
    if (!s.empty()) s += "|";
    if (a.infinite) {
      s += "inf";
      continue;
    }
    for (const auto& [m, c] : a.terms) {
      s += std::to_string(c.num) + "/" + std::to_string(c.den);
      for (const auto& f : m) {
        switch (f.kind) {
          case Factor::Kind::Var: s += "v" + std::to_string(f.index); break;
          case Factor::Kind::Log: s += "l" + std::to_string(f.index); break;
          case Factor::Kind::Opaque: s += "{" + f.key + "}"; break;
        }
      }
      s += ";";
    }
  }
  return s;
}

// q(x) >= m(x) for every assignment of naturals.
bool monomial_covers(const Monomial& q, const Monomial& m) {
  std::vector<bool> used(q.size(), false);
  std::set<std::size_t> mvars;
  for (const Factor& f : m) {
    if (f.kind != Factor::Kind::Opaque) mvars.insert(f.index);
    bool found = false;
    for (std::size_t i = 0; i < q.size() && !found; ++i) {
      if (used[i]) continue;
      if (q[i] == f) found = true;
      else if (f.kind == Factor::Kind::Log && q[i].kind == Factor::Kind::Var && q[i].index == f.index) found = true;
      if (found) used[i] = true;
    }
    if (!found) return false;
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (used[i]) continue;
    if (q[i].kind == Factor::Kind::Opaque) return false;
    if (!mvars.count(q[i].index)) return false;
  }
  return true;
}

bool alt_dominated(const PolySum& s, const PolySum& t) {
  if (t.infinite) return true;
  if (s.infinite) return false;
  Poly d = t.terms;
  for (const auto& [m, c] : s.terms) add_term(d, m, Rational(-c.num, c.den));
  std::vector<std::pair<Monomial, Rational>> pos, neg;
  for (const auto& [m, c] : d) {
    if (c.positive()) pos.emplace_back(m, c);
    else neg.emplace_back(m, Rational(-c.num, c.den));
  }
  // Cover higher-degree deficits first; they have the fewest candidates.
  std::sort(neg.begin(), neg.end(), [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
  for (auto& [m, need] : neg) {
    for (auto& [q, avail] : pos) {
      if (need.is_zero()) break;
      if (avail.is_zero() || !monomial_covers(q, m)) continue;
      Rational take = need < avail ? need : avail;
      need = need - take;
      avail = avail - take;
    }
    if (!need.is_zero()) return false;
  }
  return true;
}

ExtNat eval_alt(const PolySum& s, const SizeLookup& lookup, const TermResolver* resolver) {
  if (s.infinite) return ExtNat::inf();
  __int128 num = 0, den = 1;
  bool has_inf_pos = false, has_inf_neg = false;
  constexpr __int128 kCap = static_cast<__int128>(1) << 100;
  bool overflow = false;
  for (const auto& [m, c] : s.terms) {
    __int128 prod = 1;
    bool inf = false, zero = false;
    for (const Factor& f : m) {
      ExtNat v;
      switch (f.kind) {
        case Factor::Kind::Var: {
          auto x = lookup(f.index);
          if (!x) throw BoundError("unbound size variable #" + std::to_string(f.index));
          v = *x;
          break;
        }
        case Factor::Kind::Log: {
          auto x = lookup(f.index);
          if (!x) throw BoundError("unbound size variable #" + std::to_string(f.index));
          v = bound_eval(bnd::log2(bnd::constant(*x)), SizeEnv{});
          break;
        }
        case Factor::Kind::Opaque:
          v = bound_eval(f.opaque, lookup, resolver);
          break;
      }
      if (v == ExtNat{0}) zero = true;
      else if (v.is_inf()) inf = true;
      else if (!inf && !overflow) {
        prod *= static_cast<__int128>(v.value());
        if (prod > kCap) overflow = true;
      }
    }
    if (zero) continue;
    if (inf) {
      (c.positive() ? has_inf_pos : has_inf_neg) = true;
      continue;
    }
    if (overflow) continue;
    // num/den += c.num * prod / c.den
    __int128 tn = static_cast<__int128>(c.num) * prod;
    num = num * c.den + tn * den;
    den = den * c.den;
    __int128 a = num < 0 ? -num : num, b = den;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    if (num > kCap || -num > kCap) overflow = true;
  }
  if (has_inf_pos || has_inf_neg || overflow) return ExtNat::inf();
  if (num <= 0) return ExtNat{0};
  __int128 q = (num + den - 1) / den;
  if (q >= static_cast<__int128>(std::numeric_limits<std::uint64_t>::max())) return ExtNat::inf();
  return ExtNat{static_cast<std::uint64_t>(q)};
}

BoundPtr monomial_bound(const Monomial& m) {
  BoundPtr acc;
  for (const Factor& f : m) {
    BoundPtr x;
    switch (f.kind) {
      case Factor::Kind::Var: x = bnd::var(f.index); break;
      case Factor::Kind::Log: x = bnd::log2(bnd::var(f.index)); break;
      case Factor::Kind::Opaque: x = f.opaque; break;
    }
    acc = acc ? bnd::fold(acc, x) : x;
  }
  return acc;
}

}  // namespace

BoundNF bound_normalize(const BoundPtr& b) { return normalize_rec(b); }

ExtNat nf_eval(const BoundNF& nf, const SizeLookup& lookup, const TermResolver* resolver) {
  ExtNat best{0};
  for (const auto& a : nf.alts) best = join(best, eval_alt(a, lookup, resolver));
  return best;
}

std::string nf_to_string(const BoundNF& nf, const std::vector<std::string>& names) {
  if (nf.alts.size() == 1) return poly_str(nf.alts[0], names);
  std::string s = "max(";
  for (std::size_t i = 0; i < nf.alts.size(); ++i) {
    if (i) s += ", ";
    s += poly_str(nf.alts[i], names);
  }
  return s + ")";
}

std::vector<std::size_t> nf_free_vars(const BoundNF& nf) {
  std::set<std::size_t> out;
  for (const auto& a : nf.alts)
    for (const auto& [m, c] : a.terms)
      for (const Factor& f : m) {
        if (f.kind == Factor::Kind::Opaque) {
          for (auto v : bound_free_vars(f.opaque)) out.insert(v);
        } else {
          out.insert(f.index);
        }
      }
  return {out.begin(), out.end()};
}

BoundPtr nf_to_bound(const BoundNF& nf) {
  BoundPtr result;
  for (const auto& a : nf.alts) {
    BoundPtr alt;
    if (a.infinite) {
      alt = bnd::constant(ExtNat::inf());
    } else {
      std::vector<std::pair<Monomial, Rational>> items(a.terms.begin(), a.terms.end());
      std::stable_sort(items.begin(), items.end(),
                       [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });
      for (const auto& [m, c] : items) {
        if (c.den != 1 || c.num < 0) throw BoundError("normal form has non-natural coefficients");
        auto n = static_cast<std::uint64_t>(c.num);
        BoundPtr part = m.empty() ? bnd::constant(ExtNat{n})
                                  : (n == 1 ? monomial_bound(m) : bnd::scale(n, monomial_bound(m)));
        alt = alt ? bnd::plus(alt, part) : part;
      }
      if (!alt) alt = bnd::bot();
    }
    result = result ? bnd::join(result, alt) : alt;
  }
  return result ? result : bnd::bot();
}

bool nf_dominated(const BoundNF& lhs, const BoundNF& rhs) {
  for (const auto& s : lhs.alts) {
    bool ok = false;
    for (const auto& t : rhs.alts)
      if (alt_dominated(s, t)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

Verdict bound_leq(const BoundPtr& b1, const BoundPtr& b2, std::uint64_t sample_range,
                  const TermResolver* resolver) {
  Verdict v;
  BoundNF n1 = bound_normalize(b1), n2 = bound_normalize(b2);
  if (nf_dominated(n1, n2)) {
    v.kind = Verdict::Kind::Proved;
    return v;
  }
  std::set<std::size_t> vars;
  for (auto x : bound_free_vars(b1)) vars.insert(x);
  for (auto x : bound_free_vars(b2)) vars.insert(x);
  std::vector<std::size_t> order(vars.begin(), vars.end());

  constexpr double kMaxPoints = 200000.0;
  std::uint64_t range = sample_range;
  while (range > 0 && std::pow(static_cast<double>(range + 1), static_cast<double>(order.size())) > kMaxPoints)
    --range;

  std::vector<std::uint64_t> point(order.size(), 0);
  SizeLookup lookup = [&](std::size_t i) -> std::optional<ExtNat> {
    for (std::size_t k = 0; k < order.size(); ++k)
      if (order[k] == i) return ExtNat{point[k]};
    return std::nullopt;
  };
  try {
    while (true) {
      ExtNat x = nf_eval(n1, lookup, resolver);
      ExtNat y = nf_eval(n2, lookup, resolver);
      if (!leq(x, y)) {
        v.kind = Verdict::Kind::Refuted;
        for (std::size_t k = 0; k < order.size(); ++k) v.witness[order[k]] = point[k];
        return v;
      }
      if (order.empty()) {
        v.kind = Verdict::Kind::Proved;
        return v;
      }
      // Odometer over 0..range for each variable.
      std::size_t k = 0;
      while (k < point.size() && point[k] == range) point[k++] = 0;
      if (k == point.size()) break;
      ++point[k];
    }
  } catch (const BoundError&) {
    v.kind = Verdict::Kind::Empirical;
    v.range = 0;
    return v;
  }
  v.kind = Verdict::Kind::Empirical;
  v.range = range;
  return v;
}

}  // namespace rbm
