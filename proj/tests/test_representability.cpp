#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "structkan/representability.hpp"

namespace sk = structkan;

namespace {

// Pascal-triangle binomial oracle, independent of the checked_binomial
// implementation under test.
std::int64_t pascal(int a, int b) {
  if (b < 0 || b > a) return 0;
  std::vector<std::vector<std::int64_t>> c(static_cast<std::size_t>(a) + 1);
  for (int i = 0; i <= a; ++i) {
    c[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i) + 1, 1);
    for (int j = 1; j < i; ++j)
      c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
  }
  return c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

}  // namespace

TEST_CASE("known counting values", "[representability]") {
  REQUIRE(sk::param_bound(5, 4, 3) == 65);
  REQUIRE(sk::param_bound(1, 1, 0) == 3);
  REQUIRE(sk::param_bound(7, 3, 10) == 147);

  REQUIRE(sk::deriv_dim_exact(3, 2) == 6);
  REQUIRE(sk::deriv_dim_exact(4, 3) == 20);
  REQUIRE(sk::deriv_dim_exact(5, 4) == 70);
  REQUIRE(sk::deriv_dim_exact(1, 9) == 1);
  REQUIRE(sk::deriv_dim_exact(7, 0) == 1);

  REQUIRE(sk::claimed_lower_bound(3, 4) == 24);
  REQUIRE(sk::claimed_lower_bound(4, 3) == 27);
  REQUIRE(sk::claimed_lower_bound(3, 7) == 74);  // ceil(3 * 49 / 2)

  REQUIRE(sk::smoothness_limit(5, 3) == 8);
  REQUIRE(sk::smoothness_limit(5, 4) == 6);
}

TEST_CASE("deriv_dim_exact matches the Pascal oracle", "[representability]") {
  for (int n = 1; n <= 8; ++n)
    for (int p = 0; p <= 20; ++p)
      REQUIRE(sk::deriv_dim_exact(n, p) == pascal(n + p - 1, p));
}

TEST_CASE("param_bound and claimed_lower_bound match direct arithmetic",
          "[representability]") {
  for (std::int64_t m = 1; m <= 12; ++m)
    for (std::int64_t n = 1; n <= 8; ++n)
      for (std::int64_t p = 0; p <= 15; ++p)
        REQUIRE(sk::param_bound(m, n, p) == (p + 1) * m + m * (n + m));

  for (std::int64_t n = 3; n <= 8; ++n)
    for (std::int64_t p = 1; p <= 15; ++p) {
      const std::int64_t q = n * (n - 1) / 2 * p * p;
      REQUIRE(sk::claimed_lower_bound(n, p) == (q + 1) / 2);
    }
}

TEST_CASE("counting_report agrees with its own pieces", "[representability]") {
  for (std::int64_t m = 1; m <= 10; ++m)
    for (std::int64_t n = 3; n <= 8; ++n)
      for (std::int64_t p = 1; p <= 20; ++p) {
        auto r = sk::counting_report(m, n, p);
        REQUIRE(r.p == p);
        REQUIRE(r.n_p_bound == sk::param_bound(m, n, p));
        REQUIRE(r.deriv_dim_exact == sk::deriv_dim_exact(n, p));
        REQUIRE(r.claimed_lower_bound == sk::claimed_lower_bound(n, p));
        REQUIRE(r.representable_all == (r.claimed_lower_bound <= r.n_p_bound));
        REQUIRE(r.bound_exceeds_exact == (r.claimed_lower_bound > r.deriv_dim_exact));
      }
}

TEST_CASE("the m=5 n=3 example rows", "[representability]") {
  auto at7 = sk::counting_report(5, 3, 7);
  REQUIRE(at7.n_p_bound == 80);
  REQUIRE(at7.claimed_lower_bound == 74);
  REQUIRE(at7.representable_all);

  auto at8 = sk::counting_report(5, 3, 8);
  REQUIRE(at8.n_p_bound == 85);
  REQUIRE(at8.claimed_lower_bound == 96);
  REQUIRE_FALSE(at8.representable_all);
}

TEST_CASE("the quadratic bound can exceed the exact derivative count",
          "[representability]") {
  // At n = 4, p = 3 the quadratic bound claims 27 derivative combinations
  // but only C(6,3) = 20 distinct order-3 partials exist.
  REQUIRE(sk::deriv_dim_exact(4, 3) == 20);
  REQUIRE(sk::claimed_lower_bound(4, 3) == 27);
  auto r = sk::counting_report(2, 4, 3);
  REQUIRE(r.bound_exceeds_exact);
}

TEST_CASE("once violated, the counting verdict stays violated",
          "[representability]") {
  for (std::int64_t m : {1, 3, 10, 25, 50})
    for (std::int64_t n = 3; n <= 8; ++n) {
      const std::int64_t p_star = sk::smoothness_limit(m, n);
      for (std::int64_t p = 1; p <= 2 * p_star + 4; ++p)
        REQUIRE(sk::counting_report(m, n, p).representable_all == (p < p_star));
    }
}

TEST_CASE("smoothness_limit respects its sanity cap", "[representability]") {
  REQUIRE(sk::smoothness_limit(5, 3, 8) == 8);
  REQUIRE_THROWS_AS(sk::smoothness_limit(5, 3, 7), std::runtime_error);
}

TEST_CASE("vitushkin ratio test", "[representability]") {
  using sk::Smoothness;
  auto spec = [](Smoothness k, std::int64_t n, Smoothness kp, std::int64_t np) {
    return sk::SmoothnessSpec{k, n, kp, np};
  };

  // k'/n' > k/n violates.
  REQUIRE(sk::vitushkin_violates(spec(Smoothness::finite(1), 2, Smoothness::finite(1), 1)));
  REQUIRE_FALSE(
      sk::vitushkin_violates(spec(Smoothness::finite(1), 1, Smoothness::finite(1), 1)));
  REQUIRE_FALSE(
      sk::vitushkin_violates(spec(Smoothness::finite(2), 2, Smoothness::finite(1), 1)));
  REQUIRE(sk::vitushkin_violates(spec(Smoothness::finite(2), 3, Smoothness::finite(3), 4)));

  // Ratio invariance: scaling k and n together changes nothing.
  for (std::int64_t s = 1; s <= 9; ++s) {
    REQUIRE(sk::vitushkin_violates(spec(Smoothness::finite(2 * s), 3 * s,
                                        Smoothness::finite(3), 4)) ==
            sk::vitushkin_violates(spec(Smoothness::finite(2), 3, Smoothness::finite(3), 4)));
    REQUIRE(sk::vitushkin_violates(spec(Smoothness::finite(1), 1,
                                        Smoothness::finite(s), s)) == false);
  }

  // Infinitely smooth nodes violate against any finite target.
  REQUIRE(sk::vitushkin_violates(spec(Smoothness::finite(5), 2, Smoothness::inf(), 9)));
  REQUIRE_FALSE(sk::vitushkin_violates(spec(Smoothness::inf(), 2, Smoothness::inf(), 9)));

  // Analytic target: finite nodes violate exactly when they lose dimensions.
  REQUIRE(sk::vitushkin_violates(spec(Smoothness::inf(), 3, Smoothness::finite(3), 1)));
  REQUIRE_FALSE(sk::vitushkin_violates(spec(Smoothness::inf(), 3, Smoothness::finite(3), 3)));

  // Huge orders must not overflow the comparison.
  const std::int64_t big = 4'000'000'000LL;
  REQUIRE(sk::vitushkin_violates(
      spec(Smoothness::finite(big), 2, Smoothness::finite(big), 1)));

  REQUIRE_THROWS_AS(
      sk::vitushkin_violates(spec(Smoothness::finite(1), 0, Smoothness::finite(1), 1)),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      sk::vitushkin_violates(spec(Smoothness::finite(1), 1, Smoothness::finite(1), -2)),
      std::invalid_argument);
  REQUIRE_THROWS_AS(Smoothness::finite(-1), std::invalid_argument);
}

TEST_CASE("counting preconditions and overflow", "[representability]") {
  REQUIRE_THROWS_AS(sk::param_bound(0, 1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::param_bound(1, 0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::param_bound(1, 1, -1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::deriv_dim_exact(0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::deriv_dim_exact(1, -1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::claimed_lower_bound(2, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::claimed_lower_bound(3, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::counting_report(1, 2, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::smoothness_limit(1, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::smoothness_limit(0, 3), std::invalid_argument);

  const std::int64_t huge = std::int64_t{1} << 31;
  REQUIRE_THROWS_AS(sk::param_bound(huge, huge, huge), std::overflow_error);
  REQUIRE_THROWS_AS(sk::claimed_lower_bound(3, huge * 8), std::overflow_error);
  REQUIRE_THROWS_AS(sk::deriv_dim_exact(1000, 500), std::overflow_error);
}
