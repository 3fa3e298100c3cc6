#pragma once

#include <array>
#include <string>
#include <stdexcept>
#include <string_view>

#include "rbmltt/lattice.hpp"

namespace rbm {

enum class Delta : std::uint8_t {
  U, El, Pi, Sigma, Pi1, Pi2, Id, Refl, J, JBeta, Nat, Z, S, NatRec, Vec, Nil, Cons, VecRec,
  Fin, FZ, FS, Box, Unbox, App, Beta, Add,
  Count_,
};

constexpr std::size_t kDeltaCount = static_cast<std::size_t>(Delta::Count_);

/// File key for each constant, e.g. "delta_app".
std::string_view delta_key(Delta d);

class CostModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One lattice element per primitive rule.
struct CostModel {
  std::array<ExtNat, kDeltaCount> values{};
  std::string name = "default";

  ExtNat operator[](Delta d) const { return values[static_cast<std::size_t>(d)]; }
  ExtNat& operator[](Delta d) { return values[static_cast<std::size_t>(d)]; }

  /// δ_Z = 1, δ_+ = 2, δ_app = δ_β = 0, everything else 1.
  static CostModel defaults();

  /// Defaults with every constructor of a value priced at zero, so that
  /// closed values cost nothing to build and substituting them is free.
  static CostModel value_free();

  /// Flat `key = value` text; `#` and `--` start comments; value `inf` allowed.
  /// Unlisted keys keep their default.
  static CostModel parse(std::string_view text, std::string name = "custom");
  static CostModel load(const std::string& path);

  /// Path from the argument, else $RBMLTT_COST_MODEL, else defaults.
  static CostModel resolve(const std::string& path_or_empty);

  std::string to_text() const;
};

}  // namespace rbm
