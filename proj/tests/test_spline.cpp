#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "structkan/rng.hpp"
#include "structkan/spline.hpp"

namespace sk = structkan;

namespace {

// Dense probe grid including both endpoints and the interior knots.
std::vector<double> probe_grid(const sk::CubicSpline& s, int per_interval) {
  std::vector<double> xs;
  const double lo = s.domain_lo(), hi = s.domain_hi();
  const int n = s.intervals() * per_interval;
  for (int i = 0; i <= n; ++i) xs.push_back(lo + (hi - lo) * i / n);
  return xs;
}

// Solves the small dense least-squares system A c = y by normal equations
// with Gaussian elimination. Independent of the spline code under test.
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& y, int n_coeffs) {
  std::vector<std::vector<double>> ata(
      static_cast<std::size_t>(n_coeffs),
      std::vector<double>(static_cast<std::size_t>(n_coeffs), 0.0));
  std::vector<double> aty(static_cast<std::size_t>(n_coeffs), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < n_coeffs; ++i) {
      aty[static_cast<std::size_t>(i)] += rows[r][static_cast<std::size_t>(i)] * y[r];
      for (int j = 0; j < n_coeffs; ++j)
        ata[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            rows[r][static_cast<std::size_t>(i)] * rows[r][static_cast<std::size_t>(j)];
    }
  }
  for (int col = 0; col < n_coeffs; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n_coeffs; ++r)
      if (std::abs(ata[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::abs(ata[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    std::swap(ata[static_cast<std::size_t>(col)], ata[static_cast<std::size_t>(pivot)]);
    std::swap(aty[static_cast<std::size_t>(col)], aty[static_cast<std::size_t>(pivot)]);
    for (int r = 0; r < n_coeffs; ++r) {
      if (r == col) continue;
      const double f = ata[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                       ata[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c < n_coeffs; ++c)
        ata[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * ata[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      aty[static_cast<std::size_t>(r)] -= f * aty[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> c(static_cast<std::size_t>(n_coeffs));
  for (int i = 0; i < n_coeffs; ++i)
    c[static_cast<std::size_t>(i)] =
        aty[static_cast<std::size_t>(i)] /
        ata[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  return c;
}

}  // namespace

TEST_CASE("basis functions form a partition of unity", "[spline]") {
  for (int intervals : {1, 2, 8, 13}) {
    sk::CubicSpline s(-1.0, 1.0, intervals);
    REQUIRE(s.coefficient_count() == intervals + 3);
    for (double& c : s.coefficients()) c = 1.0;
    for (double x : probe_grid(s, 17))
      REQUIRE(s.eval(x) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("greville coefficients reproduce the identity", "[spline]") {
  sk::CubicSpline s(-1.0, 1.0, 8);
  s.set_identity();
  for (double x : probe_grid(s, 23)) REQUIRE(s.eval(x) == Catch::Approx(x).margin(1e-12));

  sk::CubicSpline wide(-3.0, 5.0, 5);
  wide.set_identity();
  for (double x : probe_grid(wide, 11))
    REQUIRE(wide.eval(x) == Catch::Approx(x).margin(1e-12));
}

TEST_CASE("least squares on the reported basis recovers identity coefficients",
          "[spline]") {
  sk::CubicSpline s(-1.0, 1.0, 6);
  const int n_coeffs = s.coefficient_count();

  std::vector<std::vector<double>> design;
  std::vector<double> y;
  sk::Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-1.0, 1.0);
    auto e = s.eval_full(x);
    std::vector<double> row(static_cast<std::size_t>(n_coeffs), 0.0);
    for (int r = 0; r < 4; ++r)
      row[static_cast<std::size_t>(e.first + r)] = e.dcoeff[r];
    design.push_back(std::move(row));
    y.push_back(x);
  }

  auto solved = solve_least_squares(design, y, n_coeffs);
  auto greville = s.greville();
  for (int i = 0; i < n_coeffs; ++i)
    REQUIRE(solved[static_cast<std::size_t>(i)] ==
            Catch::Approx(greville[static_cast<std::size_t>(i)]).margin(1e-8));
}

TEST_CASE("dcoeff matches finite differences in the coefficients", "[spline]") {
  sk::CubicSpline s(-1.0, 1.0, 8);
  sk::Rng rng(13);
  for (double& c : s.coefficients()) c = rng.uniform(-2.0, 2.0);

  for (double x : {-1.0, -0.99, -0.3, 0.0, 0.25, 0.999, 1.0, -1.7, 1.6}) {
    auto e = s.eval_full(x);
    for (int r = 0; r < 4; ++r) {
      const int i = e.first + r;
      REQUIRE(i >= 0);
      REQUIRE(i < s.coefficient_count());
      const double h = 1e-6;
      const double saved = s.coefficients()[static_cast<std::size_t>(i)];
      s.coefficients()[static_cast<std::size_t>(i)] = saved + h;
      const double up = s.eval(x);
      s.coefficients()[static_cast<std::size_t>(i)] = saved - h;
      const double down = s.eval(x);
      s.coefficients()[static_cast<std::size_t>(i)] = saved;
      // The curve is linear in its coefficients, so the FD is exact up to
      // rounding.
      REQUIRE(e.dcoeff[r] == Catch::Approx((up - down) / (2.0 * h)).margin(1e-8));
    }
  }
}

TEST_CASE("dx matches finite differences in x", "[spline]") {
  sk::CubicSpline s(-1.0, 1.0, 8);
  sk::Rng rng(14);
  for (double& c : s.coefficients()) c = rng.uniform(-2.0, 2.0);

  // Stay 1e-4 clear of knots so the central difference never straddles a
  // change in the active span (the value is C2, but dx comparisons are
  // cleanest inside one span).
  sk::Rng points(15);
  int checked = 0;
  while (checked < 200) {
    const double x = points.uniform(-0.999, 0.999);
    const double h = 1e-5;
    const double pos = (x + 1.0) * 4.0;  // knot coordinates for 8 intervals
    if (std::abs(pos - std::round(pos)) < 1e-3) continue;
    auto e = s.eval_full(x);
    const double fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
    REQUIRE(e.dx == Catch::Approx(fd).margin(1e-5));
    ++checked;
  }
}

TEST_CASE("extrapolation continues linearly past the domain", "[spline]") {
  sk::CubicSpline s(-1.0, 1.0, 8);
  sk::Rng rng(16);
  for (double& c : s.coefficients()) c = rng.uniform(-2.0, 2.0);

  auto hi = s.eval_full(1.0);
  for (double step : {0.5, 2.0, 10.0}) {
    auto e = s.eval_full(1.0 + step);
    REQUIRE(e.value == Catch::Approx(hi.value + step * hi.dx).epsilon(1e-12));
    REQUIRE(e.dx == Catch::Approx(hi.dx).epsilon(1e-12));
  }

  auto lo = s.eval_full(-1.0);
  for (double step : {0.5, 2.0, 10.0}) {
    auto e = s.eval_full(-1.0 - step);
    REQUIRE(e.value == Catch::Approx(lo.value - step * lo.dx).epsilon(1e-12));
    REQUIRE(e.dx == Catch::Approx(lo.dx).epsilon(1e-12));
  }

  // Identity splines extrapolate to the identity everywhere.
  sk::CubicSpline ident(-1.0, 1.0, 4);
  ident.set_identity();
  for (double x : {-6.0, -1.5, 1.5, 3.0, 9.0})
    REQUIRE(ident.eval(x) == Catch::Approx(x).margin(1e-12));
}

TEST_CASE("spline construction is validated", "[spline]") {
  REQUIRE_THROWS_AS(sk::CubicSpline(1.0, 1.0, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::CubicSpline(2.0, -2.0, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(sk::CubicSpline(-1.0, 1.0, 0), std::invalid_argument);
}
