#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "expsamp/errors.hpp"

namespace expsamp {

/// Gauss-Legendre rule on [-1, 1].
///
/// Nodes are stored in ascending order and the rule is built from one half of
/// the roots, so node[i] == -node[n-1-i] holds bitwise. That symmetry keeps
/// integrals of odd integrands at exact zero up to summation order.
class GaussLegendreRule {
 public:
  explicit GaussLegendreRule(int n) {
    if (n < 2) throw InvalidParameter("Gauss-Legendre rule needs at least 2 nodes");
    nodes_.resize(n);
    weights_.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_[i] = -x;  // initial guesses start at the largest root
      nodes_[n - 1 - i] = x;
      weights_[i] = w;
      weights_[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes_[n / 2] = 0.0;
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double fa, double b, double fb,
                                   double whole, double fm, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    if (std::abs(delta) > 15.0 * tol)
      throw NumericFailure("adaptive quadrature did not converge");
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 40) {
  if (!(b > a)) throw InvalidParameter("adaptive_simpson needs a < b");
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double r =
      detail::adaptive_simpson_rec(f, a, fa, b, fb, whole, fm, tol, max_depth);
  if (!std::isfinite(r)) throw NumericFailure("adaptive quadrature produced a non-finite value");
  return r;
}

}  // namespace expsamp
