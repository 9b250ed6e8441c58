#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace structkan {

// Value and local derivatives of a cubic spline at one point. At most four
// basis functions are nonzero, starting at coefficient index `first`.
struct SplineEval {
  double value = 0.0;
  double dx = 0.0;         // d value / d x
  int first = 0;           // index of the first active coefficient
  double dcoeff[4] = {0.0, 0.0, 0.0, 0.0};  // d value / d coeff[first + k]
};

// Cubic B-spline on a uniform clamped knot vector over [lo, hi] with
// `intervals` knot spans, giving intervals + 3 coefficients. Outside the
// domain the curve continues linearly with the boundary value and slope,
// so extrapolation never blows up and stays differentiable.
class CubicSpline {
 public:
  CubicSpline(double lo, double hi, int intervals)
      : lo_(lo), hi_(hi), intervals_(intervals) {
    if (!(lo < hi)) throw std::invalid_argument("CubicSpline: empty domain");
    if (intervals < 1) throw std::invalid_argument("CubicSpline: intervals < 1");
    // Clamped: four copies of each endpoint, uniform interior knots.
    knots_.resize(static_cast<std::size_t>(intervals) + 7);
    const double h = (hi - lo) / intervals;
    for (int i = 0; i < 4; ++i) knots_[static_cast<std::size_t>(i)] = lo;
    for (int k = 1; k < intervals; ++k)
      knots_[static_cast<std::size_t>(3 + k)] = lo + h * k;
    for (int i = 0; i < 4; ++i)
      knots_[static_cast<std::size_t>(intervals + 3 + i)] = hi;
    coeffs_.assign(static_cast<std::size_t>(intervals) + 3, 0.0);
  }

  int coefficient_count() const { return static_cast<int>(coeffs_.size()); }
  std::vector<double>& coefficients() { return coeffs_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double domain_lo() const { return lo_; }
  double domain_hi() const { return hi_; }
  int intervals() const { return intervals_; }

  // Greville abscissae: the knot averages where placing coeff[i] = greville[i]
  // reproduces the identity function exactly on [lo, hi].
  std::vector<double> greville() const {
    std::vector<double> g(coeffs_.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = (knots_[i + 1] + knots_[i + 2] + knots_[i + 3]) / 3.0;
    return g;
  }

  void set_identity() { coeffs_ = greville(); }

  double eval(double x) const { return eval_full(x).value; }

  SplineEval eval_full(double x) const {
    if (x < lo_) return extend(lo_, x);
    if (x > hi_) return extend(hi_, x);
    return eval_inside(x);
  }

 private:
  double lo_, hi_;
  int intervals_;
  std::vector<double> knots_;
  std::vector<double> coeffs_;

  // Knot span index: largest j with knots[j] <= x, clamped to real spans.
  // Uniform spacing makes this a direct computation.
  int find_span(double x) const {
    const double h = (hi_ - lo_) / intervals_;
    int k = static_cast<int>(std::floor((x - lo_) / h));
    if (k < 0) k = 0;
    if (k > intervals_ - 1) k = intervals_ - 1;
    // Floating-point defence: step back/forward if the estimate is off.
    int span = 3 + k;
    while (span > 3 && x < knots_[static_cast<std::size_t>(span)]) --span;
    while (span < intervals_ + 2 && x >= knots_[static_cast<std::size_t>(span + 1)])
      ++span;
    return span;
  }

  // Cox-de Boor basis of the given degree on one span; out[0..degree] are
  // the nonzero values N_{span-degree+r, degree}(x).
  void basis(int span, double x, int degree, double* out) const {
    double left[4], right[4];
    out[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
      right[j] = knots_[static_cast<std::size_t>(span + j)] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double temp = out[r] / (right[r + 1] + left[j - r]);
        out[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      out[j] = saved;
    }
  }

  SplineEval eval_inside(double x) const {
    const int span = find_span(x);
    double n3[4], q2[3];
    basis(span, x, 3, n3);
    basis(span, x, 2, q2);
    SplineEval e;
    e.first = span - 3;
    e.value = 0.0;
    e.dx = 0.0;
    for (int r = 0; r < 4; ++r) {
      const int i = span - 3 + r;
      // d/dx N_{i,3} = 3 [ Q_i / (t_{i+3} - t_i) - Q_{i+1} / (t_{i+4} - t_{i+1}) ]
      // with the usual 0/0 = 0 convention at repeated end knots.
      double a = 0.0, b = 0.0;
      if (r > 0) {
        const double den = knots_[static_cast<std::size_t>(i + 3)] -
                           knots_[static_cast<std::size_t>(i)];
        if (den > 0.0) a = q2[r - 1] / den;
      }
      if (r < 3) {
        const double den = knots_[static_cast<std::size_t>(i + 4)] -
                           knots_[static_cast<std::size_t>(i + 1)];
        if (den > 0.0) b = q2[r] / den;
      }
      const double dn = 3.0 * (a - b);
      e.dcoeff[r] = n3[r];
      e.value += coeffs_[static_cast<std::size_t>(i)] * n3[r];
      e.dx += coeffs_[static_cast<std::size_t>(i)] * dn;
    }
    return e;
  }

  // Linear continuation past a boundary: value and slope taken at the
  // boundary, coefficient partials extended to match.
  SplineEval extend(double boundary, double x) const {
    SplineEval at = eval_inside(boundary);
    const int span = find_span(boundary);
    double q2[3];
    basis(span, boundary, 2, q2);
    SplineEval e;
    e.first = at.first;
    const double dx = x - boundary;
    e.value = at.value + at.dx * dx;
    e.dx = at.dx;
    for (int r = 0; r < 4; ++r) {
      const int i = at.first + r;
      double a = 0.0, b = 0.0;
      if (r > 0) {
        const double den = knots_[static_cast<std::size_t>(i + 3)] -
                           knots_[static_cast<std::size_t>(i)];
        if (den > 0.0) a = q2[r - 1] / den;
      }
      if (r < 3) {
        const double den = knots_[static_cast<std::size_t>(i + 4)] -
                           knots_[static_cast<std::size_t>(i + 1)];
        if (den > 0.0) b = q2[r] / den;
      }
      const double dn = 3.0 * (a - b);
      e.dcoeff[r] = at.dcoeff[r] + dn * dx;
    }
    return e;
  }
};

}  // namespace structkan
