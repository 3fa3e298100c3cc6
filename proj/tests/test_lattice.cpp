#include <doctest.h>

#include <vector>

#include "rbmltt/lattice.hpp"
#include "support.hpp"

using namespace rbm;
using rbm::testing::random_extnat;

namespace {

std::vector<ExtNat> sample_extnats() {
  std::mt19937_64 rng(11);
  std::vector<ExtNat> xs{ExtNat{0}, ExtNat{1}, ExtNat{2}, ExtNat::inf()};
  while (xs.size() < 24) xs.push_back(random_extnat(rng));
  return xs;
}

std::vector<ExtNat2> sample_pairs() {
  std::vector<ExtNat> xs = sample_extnats();
  std::vector<ExtNat2> ps;
  for (std::size_t i = 0; i < xs.size(); i += 2)
    for (std::size_t k = 1; k < xs.size(); k += 5) ps.push_back({xs[i], xs[k]});
  return ps;
}

template <class L>
void check_laws(const std::vector<L>& xs) {
  const L bot = L::bot();
  for (const L& a : xs) {
    CHECK(combine(a, bot) == a);
    CHECK(combine(bot, a) == a);
    CHECK(leq(bot, a));
    CHECK(leq(a, a));
    for (const L& b : xs) {
      CHECK(combine(a, b) == combine(b, a));
      const L j = join(a, b);
      CHECK(leq(a, j));
      CHECK(leq(b, j));
      for (const L& c : xs) {
        CHECK(combine(combine(a, b), c) == combine(a, combine(b, c)));
        if (leq(a, c) && leq(b, c)) CHECK(leq(j, c));
        if (leq(a, b)) CHECK(leq(combine(a, c), combine(b, c)));
        if (leq(a, b) && leq(b, c)) CHECK(leq(a, c));
      }
    }
  }
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("combine examples") {
    CHECK(combine(ExtNat{0}, ExtNat{5}) == ExtNat{5});
    CHECK(combine(ExtNat{3}, ExtNat{4}) == ExtNat{7});
    CHECK(combine(ExtNat2{1, 2}, ExtNat2{3, 0}) == ExtNat2{4, 2});
    CHECK(ExtNat{3} + ExtNat{4} == ExtNat{7});
  }

  TEST_CASE("join and order examples") {
    CHECK(join(ExtNat{3}, ExtNat{5}) == ExtNat{5});
    CHECK_FALSE(leq(ExtNat2{1, 5}, ExtNat2{2, 4}));
    CHECK_FALSE(leq(ExtNat2{2, 4}, ExtNat2{1, 5}));
    for (ExtNat x : sample_extnats()) CHECK(leq(ExtNat{0}, x));
  }

  TEST_CASE("infinity absorbs and saturation never wraps") {
    const ExtNat big{std::numeric_limits<std::uint64_t>::max() - 1};
    CHECK(combine(big, ExtNat{1}).is_inf());
    CHECK(combine(ExtNat::inf(), ExtNat{0}).is_inf());
    CHECK(scale(ExtNat{0}, ExtNat::inf()) == ExtNat{0});
    CHECK(scale(ExtNat{3}, ExtNat{5}) == ExtNat{15});
    CHECK(scale(ExtNat{2}, big).is_inf());
    CHECK(ExtNat{std::numeric_limits<std::uint64_t>::max()} != ExtNat::inf());
  }

  TEST_CASE("scale agrees with repeated combine") {
    for (std::uint64_t n = 0; n < 12; ++n)
      for (ExtNat b : sample_extnats()) {
        ExtNat acc{0};
        for (std::uint64_t i = 0; i < n; ++i) acc = combine(acc, b);
        CHECK(scale(ExtNat{n}, b) == acc);
      }
  }

  TEST_CASE("monoid and join-semilattice laws, extended naturals") { check_laws(sample_extnats()); }

  TEST_CASE("monoid and join-semilattice laws, product instance") { check_laws(sample_pairs()); }
}
