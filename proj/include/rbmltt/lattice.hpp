#pragma once

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

namespace rbm {

/// Extended naturals N ∪ {∞}: the default resource lattice.
/// combine = saturating addition, join = max, bottom = 0.
class ExtNat {
 public:
  constexpr ExtNat() = default;
  constexpr ExtNat(std::uint64_t v) : v_(v == kInf ? kInf - 1 : v) {}  // NOLINT: implicit from literals

  static constexpr ExtNat inf() {
    ExtNat e;
    e.v_ = kInf;
    return e;
  }
  static constexpr ExtNat bot() { return ExtNat{}; }

  constexpr bool is_inf() const { return v_ == kInf; }
  constexpr std::uint64_t value() const { return v_; }

  friend constexpr bool operator==(ExtNat, ExtNat) = default;
  friend constexpr auto operator<=>(ExtNat a, ExtNat b) { return a.v_ <=> b.v_; }

  std::string str() const { return is_inf() ? "inf" : std::to_string(v_); }

 private:
  static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t v_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, ExtNat e) { return os << e.str(); }

constexpr ExtNat combine(ExtNat a, ExtNat b) {
  if (a.is_inf() || b.is_inf()) return ExtNat::inf();
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a.value(), b.value(), &r) || r == std::numeric_limits<std::uint64_t>::max())
    return ExtNat::inf();
  return ExtNat{r};
}

constexpr ExtNat operator+(ExtNat a, ExtNat b) { return combine(a, b); }

constexpr ExtNat join(ExtNat a, ExtNat b) { return std::max(a, b); }
constexpr bool leq(ExtNat a, ExtNat b) { return a <= b; }

/// n-fold combine; 0 ⊗ b = ⊥ even when b = ∞.
constexpr ExtNat scale(ExtNat n, ExtNat b) {
  if (n == ExtNat{0} || b == ExtNat{0}) return ExtNat{0};
  if (n.is_inf() || b.is_inf()) return ExtNat::inf();
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(n.value(), b.value(), &r) || r == std::numeric_limits<std::uint64_t>::max())
    return ExtNat::inf();
  return ExtNat{r};
}

/// Componentwise product of two lattices, used for multi-resource accounting.
template <class A, class B>
struct Product {
  A first{};
  B second{};

  static constexpr Product bot() { return {A::bot(), B::bot()}; }
  friend constexpr bool operator==(const Product&, const Product&) = default;
};

template <class A, class B>
constexpr Product<A, B> combine(const Product<A, B>& x, const Product<A, B>& y) {
  return {combine(x.first, y.first), combine(x.second, y.second)};
}

template <class A, class B>
constexpr Product<A, B> join(const Product<A, B>& x, const Product<A, B>& y) {
  return {join(x.first, y.first), join(x.second, y.second)};
}

template <class A, class B>
constexpr bool leq(const Product<A, B>& x, const Product<A, B>& y) {
  return leq(x.first, y.first) && leq(x.second, y.second);
}

template <class A, class B>
std::ostream& operator<<(std::ostream& os, const Product<A, B>& p) {
  return os << '(' << p.first << ", " << p.second << ')';
}

using ExtNat2 = Product<ExtNat, ExtNat>;

template <class L>
concept ResourceLattice = requires(L a, L b) {
  { L::bot() } -> std::same_as<L>;
  { combine(a, b) } -> std::same_as<L>;
  { join(a, b) } -> std::same_as<L>;
  { leq(a, b) } -> std::same_as<bool>;
};

static_assert(ResourceLattice<ExtNat>);
static_assert(ResourceLattice<ExtNat2>);

}  // namespace rbm
