#include "qkd/keyrate.hpp"

#include <cmath>

#include <doctest.h>

using namespace qkd;

TEST_CASE("entropy") {
  CHECK(keyrate::binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(keyrate::entropy_hd(0.0, 4) == 0.0);
  CHECK(keyrate::entropy_hd(0.75, 4) == doctest::Approx(2.0));  // log2(4) at x=(d-1)/d
  CHECK(keyrate::entropy_hd(1.0, 2) == 0.0);
  CHECK(keyrate::entropy_hd(1.0, 8) == doctest::Approx(std::log2(7.0)));
  CHECK_THROWS_AS(keyrate::entropy_hd(-0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(keyrate::entropy_hd(1.1, 2), std::invalid_argument);

  for (const int d : {2, 4, 8}) {
    const double peak = (d - 1.0) / d;
    double worst = 0.0;
    for (double x = 0.0; x <= 1.0; x += 1e-3) {
      worst = std::max(worst, keyrate::entropy_hd(x, d));
      CHECK(keyrate::entropy_hd(x, d) <= std::log2(static_cast<double>(d)) + 1e-12);
    }
    CHECK(keyrate::entropy_hd(peak, d) == doctest::Approx(std::log2(static_cast<double>(d))));
    CHECK(worst == doctest::Approx(std::log2(static_cast<double>(d))).epsilon(1e-6));
  }
}

TEST_CASE("key rates reproduce the reference table") {
  CHECK(keyrate::rate_bb84(2, 0.00628) == doctest::Approx(0.8901).epsilon(0.0005 / 0.8901));
  CHECK(keyrate::rate_bb84(4, 0.0351) == doctest::Approx(1.4500).epsilon(0.0005 / 1.45));
  CHECK(keyrate::rate_bb84(8, 0.109) == doctest::Approx(1.3942).epsilon(0.0005 / 1.3942));
  CHECK(keyrate::rate_mub(2, 0.00923) == doctest::Approx(0.8727).epsilon(0.0005 / 0.8727));
  CHECK(keyrate::rate_mub(4, 0.0387) == doctest::Approx(1.5316).epsilon(0.0005 / 1.5316));

  for (const int d : {2, 4, 8}) {
    CHECK(keyrate::rate_bb84(d, 0.0) == doctest::Approx(std::log2(static_cast<double>(d))));
  }
  for (const int d : {2, 4}) {
    CHECK(keyrate::rate_mub(d, 0.0) == doctest::Approx(std::log2(static_cast<double>(d))));
  }
}

TEST_CASE("rates decrease monotonically up to the threshold") {
  for (const int d : {2, 4, 8}) {
    const double cap = keyrate::threshold(
        [d](double e) { return keyrate::rate_bb84(d, e); }, d);
    double prev = keyrate::rate_bb84(d, 0.0);
    for (double e = 1e-3; e < cap; e += 1e-3) {
      const double r = keyrate::rate_bb84(d, e);
      CHECK(r < prev);
      prev = r;
    }
  }
  for (const int d : {2, 4}) {
    const double cap = keyrate::threshold(
        [d](double e) { return keyrate::rate_mub(d, e); }, d);
    double prev = keyrate::rate_mub(d, 0.0);
    for (double e = 1e-3; e < cap; e += 1e-3) {
      const double r = keyrate::rate_mub(d, e);
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("multiphoton-corrected rate") {
  for (const double e : {0.0, 0.01, 0.05}) {
    CHECK(keyrate::rate_bb84_multiphoton(e, 0.0) ==
          doctest::Approx(keyrate::rate_bb84(2, e)).epsilon(1e-12));
  }
  const double base = keyrate::rate_bb84(2, 0.00628);
  const double corrected = keyrate::rate_bb84_multiphoton(0.00628, 4e-5);
  CHECK(std::abs(base - corrected) < 1e-4);
  CHECK(keyrate::rate_bb84_multiphoton(0.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(keyrate::rate_bb84_multiphoton(0.9, 0.2), std::invalid_argument);
}

TEST_CASE("singapore rate scaling") {
  CHECK(keyrate::rate_singapore_from_mi(0.415) == doctest::Approx(0.400));
  CHECK(keyrate::rate_singapore_from_mi(0.388) == doctest::Approx(0.374).epsilon(0.001 / 0.374));
  CHECK(keyrate::rate_singapore_from_mi(0.0) == 0.0);
  CHECK_THROWS_AS(keyrate::rate_singapore_from_mi(-0.1), std::invalid_argument);
}

TEST_CASE("thresholds reproduce the reference table") {
  const double bb84_expect[3] = {0.1100, 0.1893, 0.2470};
  const int dims[3] = {2, 4, 8};
  for (int i = 0; i < 3; ++i) {
    const int d = dims[i];
    const double t = keyrate::threshold(
        [d](double e) { return keyrate::rate_bb84(d, e); }, d);
    CHECK(std::abs(t - bb84_expect[i]) < 1e-4);
  }
  const double mub_expect[2] = {0.1262, 0.2317};
  for (int i = 0; i < 2; ++i) {
    const int d = dims[i];
    const double t = keyrate::threshold(
        [d](double e) { return keyrate::rate_mub(d, e); }, d);
    CHECK(std::abs(t - mub_expect[i]) < 1e-4);
  }
  CHECK_THROWS_AS(keyrate::threshold([](double) { return 1.0; }, 2),
                  std::invalid_argument);
}

TEST_CASE("table report") {
  const auto rows = keyrate::table1_report({});
  REQUIRE(rows.size() == 8);

  const auto& bb84_d4 = rows[3];
  CHECK(bb84_d4.protocol == "bb84");
  CHECK(bb84_d4.dim == 4);
  CHECK(bb84_d4.rate_times_sifting == doctest::Approx(0.7250).epsilon(0.0005));

  const auto& mub_d4 = rows[6];
  CHECK(mub_d4.sifting.num == 1);
  CHECK(mub_d4.sifting.den == 5);
  CHECK(mub_d4.rate == doctest::Approx(1.5316).epsilon(0.0005));

  const auto& chau_d8 = rows[1];
  CHECK(chau_d8.rate_reference);
  CHECK(chau_d8.rate == doctest::Approx(0.8172));
  CHECK(chau_d8.rate_times_sifting == doctest::Approx(0.0292).epsilon(0.001));

  const auto& sing = rows[7];
  CHECK(sing.rate == doctest::Approx(0.374).epsilon(0.001));
  CHECK(sing.threshold == doctest::Approx(0.3893));
}
