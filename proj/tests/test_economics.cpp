#include <random>

#include "doctest.h"
#include "oracle/rational.hpp"
#include "utm/economics.hpp"

using namespace utm;
using namespace utm::economics;

namespace {

Fixed fx(const char* s) { return Fixed::parse(s); }

}  // namespace

TEST_CASE("fixed-point parse and canonical formatting") {
  CHECK(fx("0.75").raw() == 750'000);
  CHECK(fx("-0.714286").raw() == -714'286);
  CHECK(fx("1").to_string() == "1.000000");
  CHECK(Fixed::from_raw(-5).to_string() == "-0.000005");
  CHECK(Fixed::from_ratio(1, 3).to_string() == "0.333333");
  CHECK(Fixed::from_ratio(2, 3).to_string() == "0.666667");
  CHECK(Fixed::from_ratio(-1, 4'000'000).raw() == 0);  // -0.25 grid units rounds to 0
  CHECK_THROWS_AS(Fixed::parse("0.1234567"), Error);
  CHECK_THROWS_AS(Fixed::parse("abc"), Error);
  CHECK_THROWS_AS(Fixed::parse("."), Error);
}

TEST_CASE("rounding is half-up on the grid") {
  CHECK(div_round_half_up(29, 2) == 15);   // 14.5
  CHECK(div_round_half_up(-29, 2) == -14); // -14.5 ties toward +inf
  CHECK(div_round_half_up(-5, 7) == -1);
  CHECK(div_round_half_up(5, 7) == 1);
}

TEST_CASE("dynamic fee examples") {
  CHECK(dynamic_fee(Fixed::from_int(1), 10, 5, 0) == 15);
  CHECK(dynamic_fee(Fixed::from_int(1), 10, 5, 2) == 17);
  CHECK(dynamic_fee(fx("0.75"), 10, 5, 2) == 15);  // 14.5 rounds up
  CHECK(dynamic_fee(fx("0.75"), 0, 0, 0) == 0);
  CHECK_THROWS_AS(dynamic_fee(Fixed::from_int(1), -1, 0, 0), Error);
}

TEST_CASE("congestion surcharge") {
  CHECK(congestion_surcharge(0, 7) == 0);
  CHECK(congestion_surcharge(3, 2) == 6);
  for (int n = 0; n < 50; ++n) CHECK(congestion_surcharge(n, 3) <= congestion_surcharge(n + 1, 3));
  CHECK_THROWS_AS(congestion_surcharge(-1, 2), Error);
}

TEST_CASE("beta reputation examples") {
  CHECK(reputation(0, 0).raw() == 0);
  for (std::uint64_t r : {1u, 7u, 50u, 1000u}) CHECK(reputation(r, r).raw() == 0);
  CHECK(reputation(8, 2) == fx("0.5"));
  CHECK(reputation(3, 1) == Fixed::from_ratio(1, 3));
  CHECK(reputation(0, 5).to_string() == "-0.714286");
  CHECK(reputation(5, 0).to_string() == "0.714286");
}

TEST_CASE("cost-scaling update examples") {
  CHECK(update_k(Fixed{}, Fixed::from_int(1), fx("0.5"), fx("0.05")) == fx("0.75"));
  // alpha -> 1, R -> 1: blend goes to zero and the floor takes over.
  CHECK(update_k(Fixed::from_int(1), Fixed::from_int(1), Fixed::from_int(1), fx("0.05")) == fx("0.05"));
  CHECK(update_k(fx("0.999999"), fx("0.05"), fx("0.999999"), fx("0.05")) == fx("0.05"));
  CHECK(update_k(Fixed::from_int(-1), fx("0.3"), Fixed::from_int(1), fx("0.05")) == Fixed::from_int(1));
  CHECK(update_k(Fixed{}, Fixed::from_int(1), fx("0.3"), fx("0.05")) == fx("0.85"));
  CHECK_THROWS_AS(update_k(Fixed{}, fx("0.01"), fx("0.3"), fx("0.05")), Error);
  CHECK_THROWS_AS(update_k(Fixed{}, Fixed::from_int(1), Fixed{}, fx("0.05")), Error);
}

TEST_CASE("fee parameter validation") {
  FeeParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha = Fixed::from_int(1);
  CHECK_THROWS_AS(p.validate(), Error);
  p = FeeParams{};
  p.k_min = Fixed{};
  CHECK_THROWS_AS(p.validate(), Error);
  p = FeeParams{};
  p.rcd = -1;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("reputation stays in (-1, 1) and is strictly monotone") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> count(0, 1'000'000);
  for (int i = 0; i < 2000; ++i) {
    auto r = count(rng), p = count(rng);
    Fixed R = reputation(r, p);
    CHECK(R.raw() > -Fixed::kScale);
    CHECK(R.raw() < Fixed::kScale);
  }
  CHECK(reputation(1'000'000, 0).raw() < Fixed::kScale);
  CHECK(reputation(0, 1'000'000).raw() > -Fixed::kScale);
  for (std::uint64_t r = 0; r < 60; ++r) {
    for (std::uint64_t p = 0; p < 60; ++p) {
      CHECK(reputation(r + 1, p) > reputation(r, p));
      CHECK(reputation(r, p + 1) < reputation(r, p));
    }
  }
}

TEST_CASE("update_k keeps k inside [k_min, 1] and rewards good reputation") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::int64_t> unit(1, Fixed::kScale - 1);
  std::uniform_int_distribution<std::int64_t> rep(-Fixed::kScale + 1, Fixed::kScale - 1);
  Fixed k_min = fx("0.05");
  for (int i = 0; i < 5000; ++i) {
    Fixed alpha = Fixed::from_raw(unit(rng));
    Fixed k_prev = Fixed::from_raw(std::uniform_int_distribution<std::int64_t>(k_min.raw(), Fixed::kScale)(rng));
    Fixed r1 = Fixed::from_raw(rep(rng));
    Fixed r2 = Fixed::from_raw(rep(rng));
    Fixed k1 = update_k(r1, k_prev, alpha, k_min);
    CHECK(k1 >= k_min);
    CHECK(k1 <= Fixed::from_int(1));
    // Higher reputation never makes the next flight dearer.
    Fixed k2 = update_k(r2, k_prev, alpha, k_min);
    if (r1 < r2) {
      CHECK(k2 <= k1);
      CHECK(dynamic_fee(k2, 1000, 500, 0) <= dynamic_fee(k1, 1000, 500, 0));
    }
  }
}

TEST_CASE("dynamic fee is nondecreasing in every argument") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::int64_t> money(0, 1'000'000);
  std::uniform_int_distribution<std::int64_t> kraw(0, 2 * Fixed::kScale);
  for (int i = 0; i < 5000; ++i) {
    Fixed k = Fixed::from_raw(kraw(rng));
    auto d = money(rng), c = money(rng), a = money(rng);
    Amount base = dynamic_fee(k, d, c, a);
    CHECK(dynamic_fee(Fixed::from_raw(k.raw() + 1), d, c, a) >= base);
    CHECK(dynamic_fee(k, d + 1, c, a) >= base);
    CHECK(dynamic_fee(k, d, c + 1, a) >= base);
    CHECK(dynamic_fee(k, d, c, a + 1) >= base);
  }
}

TEST_CASE("fixed-point results agree with exact rationals") {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<std::uint64_t> count(0, 1'000'000);
  std::uniform_int_distribution<std::int64_t> unit(1, Fixed::kScale - 1);
  for (int i = 0; i < 2000; ++i) {
    auto r = count(rng), p = count(rng);
    CHECK(oracle::grid_units_apart(reputation(r, p).raw(), oracle::exact_reputation(r, p)) <= 1);

    Fixed R = Fixed::from_raw(std::uniform_int_distribution<std::int64_t>(-Fixed::kScale + 1, Fixed::kScale - 1)(rng));
    Fixed alpha = Fixed::from_raw(unit(rng));
    Fixed k_prev = Fixed::from_raw(std::uniform_int_distribution<std::int64_t>(50'000, Fixed::kScale)(rng));
    auto exact = oracle::exact_update_k(oracle::grid(R.raw()), oracle::grid(k_prev.raw()),
                                        oracle::grid(alpha.raw()), oracle::grid(50'000));
    CHECK(oracle::grid_units_apart(update_k(R, k_prev, alpha, Fixed::from_raw(50'000)).raw(), exact) <= 1);
  }
}
