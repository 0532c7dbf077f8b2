#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "expsamp/errors.hpp"
#include "expsamp/kernels.hpp"
#include "expsamp/moments.hpp"
#include "expsamp/sampling.hpp"
#include "expsamp/test_functions.hpp"

namespace expsamp {

/// w(z) = 1 / (1 + ln^2 z), in (0, 1] with equality only at z = 1.
inline double weight(double z) {
  if (!(z > 0.0)) throw InvalidParameter("weight requires z > 0");
  const double t = std::log(z);
  return 1.0 / (1.0 + t * t);
}

/// Phi(z) = 1 + ln^2 z, the reciprocal of the weight.
inline double inverse_weight(double z) {
  if (!(z > 0.0)) throw InvalidParameter("inverse_weight requires z > 0");
  const double t = std::log(z);
  return 1.0 + t * t;
}

/// Shared evaluation grids for weighted suprema. All sup-type quantities in
/// this module are grid maxima over these log-uniform grids, hence
/// deterministic lower bounds of the true suprema.
class WeightContext {
 public:
  WeightContext(double z_min = 1e-3, double z_max = 1e3, int z_count = 2049,
                int u_count = 129)
      : z_min_(z_min), z_max_(z_max), u_count_(u_count) {
    if (!(z_min > 0.0 && z_min < z_max))
      throw InvalidParameter("weight context requires 0 < z_min < z_max");
    if (z_count < 3 || u_count < 3)
      throw InvalidParameter("weight context grids need at least 3 points");
    log_z_.resize(z_count);
    const double lo = std::log(z_min);
    const double hi = std::log(z_max);
    for (int i = 0; i < z_count; ++i)
      log_z_[i] = lo + (hi - lo) * static_cast<double>(i) / (z_count - 1);
  }

  const std::vector<double>& log_z() const { return log_z_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  int u_count() const { return u_count_; }

  /// Same grids with count scaling applied, for one-shot refinement.
  WeightContext refined(int factor = 2) const {
    return WeightContext(z_min_, z_max_,
                         static_cast<int>(log_z_.size() - 1) * factor + 1,
                         (u_count_ - 1) * factor + 1);
  }

 private:
  double z_min_;
  double z_max_;
  int u_count_;
  std::vector<double> log_z_;
};

/// Grid estimate of the weighted norm sup_z w(z) |h(z)|.
inline double weighted_norm(const TestFunction& h, const WeightContext& ctx) {
  double best = 0.0;
  for (const double t : ctx.log_z()) {
    const double y = h.eval(std::exp(t));
    if (!std::isfinite(y))
      throw NumericFailure("weighted_norm: non-finite value of " + h.name +
                           " at log z=" + std::to_string(t));
    best = std::max(best, std::abs(y) / (1.0 + t * t));
  }
  return best;
}

/// Grid estimate of the weighted logarithmic modulus of continuity.
struct ModulusEstimate {
  double rho = 0.0;
  double value = 0.0;
  int z_grid_size = 0;
  int u_grid_size = 0;
};

/// Upsilon(h, rho) = sup over |ln u| <= rho and z > 0 of
///   |h(uz) - h(z)| / ((1 + ln^2 z)(1 + ln^2 u)),
/// estimated on the context's z-grid and a symmetric u-grid.
inline ModulusEstimate log_modulus(const std::function<double(double)>& h, double rho,
                                   const WeightContext& ctx) {
  if (!(rho > 0.0)) throw InvalidParameter("log_modulus requires rho > 0");
  const auto& lz = ctx.log_z();
  std::vector<double> hz(lz.size());
  for (size_t i = 0; i < lz.size(); ++i) {
    hz[i] = h(std::exp(lz[i]));
    if (!std::isfinite(hz[i]))
      throw NumericFailure("log_modulus: non-finite function value");
  }
  const int uc = ctx.u_count();
  double best = 0.0;
  for (int iu = 0; iu < uc; ++iu) {
    const double lu = -rho + 2.0 * rho * static_cast<double>(iu) / (uc - 1);
    const double du = 1.0 + lu * lu;
    for (size_t i = 0; i < lz.size(); ++i) {
      const double shifted = h(std::exp(lz[i] + lu));
      if (!std::isfinite(shifted))
        throw NumericFailure("log_modulus: non-finite function value");
      const double v = std::abs(shifted - hz[i]) / ((1.0 + lz[i] * lz[i]) * du);
      best = std::max(best, v);
    }
  }
  ModulusEstimate est;
  est.rho = rho;
  est.value = best;
  est.z_grid_size = static_cast<int>(lz.size());
  est.u_grid_size = uc;
  return est;
}

inline ModulusEstimate log_modulus(const TestFunction& h, double rho,
                                   const WeightContext& ctx) {
  return log_modulus(h.eval, rho, ctx);
}

/// Mellin derivative theta^r h at z, with theta h(z) = z h'(z), i.e.
/// differentiation in the log variable. Analytic derivatives attached to the
/// function take precedence; otherwise central differences with one
/// Richardson step are used (step 1e-4 for r=1; wider steps for the higher
/// orders to balance truncation against rounding).
inline double mellin_derivative(const TestFunction& h, int r, double z) {
  if (r < 1 || r > 3)
    throw InvalidParameter("mellin_derivative supports orders 1..3");
  if (!(z > 0.0)) throw InvalidParameter("mellin_derivative requires z > 0");
  if (h.mellin_derivs.size() >= static_cast<size_t>(r))
    return h.mellin_derivs[r - 1](z);

  const double t = std::log(z);
  auto g = [&h](double tt) {
    const double y = h.eval(std::exp(tt));
    if (!std::isfinite(y))
      throw NumericFailure("mellin_derivative: non-finite function value");
    return y;
  };

  double result;
  if (r == 1) {
    auto d1 = [&g, t](double e) { return (g(t + e) - g(t - e)) / (2.0 * e); };
    const double e = 1e-4;
    result = (4.0 * d1(0.5 * e) - d1(e)) / 3.0;
  } else if (r == 2) {
    auto d2 = [&g, t](double e) {
      return (g(t + e) - 2.0 * g(t) + g(t - e)) / (e * e);
    };
    const double e = 1e-3;
    result = (4.0 * d2(0.5 * e) - d2(e)) / 3.0;
  } else {
    auto d3 = [&g, t](double e) {
      return (g(t + 2.0 * e) - 2.0 * g(t + e) + 2.0 * g(t - e) - g(t - 2.0 * e)) /
             (2.0 * e * e * e);
    };
    const double e = 5e-3;
    result = (4.0 * d3(0.5 * e) - d3(e)) / 3.0;
  }
  if (!std::isfinite(result))
    throw NumericFailure("mellin_derivative: non-finite difference quotient");
  return result;
}

/// Modulus-based uniform rate bound
///   256 Upsilon(h, 1/m) / zeta * (m_0 + 4 m_5).
/// Requires a finite order-5 sup-moment; kernels with slower tail decay make
/// the bound inapplicable.
inline double convergence_rate_bound(const TestFunction& h, double m,
                                     const KernelProfile& k, const WeightContext& ctx) {
  if (!(m > 0.0)) throw InvalidParameter("convergence_rate_bound requires m > 0");
  const MomentEstimate m0 = sup_moment(k, 0.0);
  const MomentEstimate m5 = sup_moment(k, 5.0);
  if (m0.diverged || m5.diverged)
    throw BoundInapplicable("order-5 sup-moment diverges for kernel " + k.id());
  const double ups = log_modulus(h, 1.0 / m, ctx).value;
  return 256.0 * ups / kernel_zeta(k) * (m0.value + 4.0 * m5.value);
}

/// Weighted operator-norm bound
///   (1/zeta) [ m_0 (1 + 1/m + 1/(3 m^2)) + (1/m + 1/m^2) m_1 + (1/m^2) m_2 ].
inline double operator_norm_bound(double m, const KernelProfile& k) {
  if (!(m > 0.0)) throw InvalidParameter("operator_norm_bound requires m > 0");
  const MomentEstimate m0 = sup_moment(k, 0.0);
  const MomentEstimate m1 = sup_moment(k, 1.0);
  const MomentEstimate m2 = sup_moment(k, 2.0);
  if (m0.diverged || m1.diverged || m2.diverged)
    throw BoundInapplicable("order-2 sup-moment diverges for kernel " + k.id());
  const double inv_m = 1.0 / m;
  const double inv_m2 = inv_m * inv_m;
  return (m0.value * (1.0 + inv_m + inv_m2 / 3.0) + (inv_m + inv_m2) * m1.value +
          inv_m2 * m2.value) /
         kernel_zeta(k);
}

/// Variant of the norm bound with a squared-infimum prefactor; emitted next
/// to the primary form in verbose outputs.
inline double operator_norm_bound_zeta2(double m, const KernelProfile& k) {
  return operator_norm_bound(m, k) / kernel_zeta(k);
}

/// One evaluation of the asymptotic expansion of m (M(h, z) - h(z)).
///
/// The algebraic moments entering the correction are evaluated at the
/// specific point s = z^m rather than as constants; kernels whose algebraic
/// moments vary with z make the two normalizations below differ, so both are
/// reported.
struct VoronovskajaProbe {
  double lhs = 0.0;              // m (M(h,z) - h(z)), operator's own denominator
  double lhs_alg = 0.0;          // same numerator normalized by a0 instead
  double correction = 0.0;       // expansion terms up to the requested order
  double residual = 0.0;         // |lhs - correction|
  double remainder_bound = 0.0;  // quantitative remainder estimate
  double a0 = 0.0;               // algebraic moment of order 0 at z^m
  double denominator = 0.0;      // max-product denominator at z
};

inline VoronovskajaProbe voronovskaja_probe(const TestFunction& h,
                                            const KernelProfile& k,
                                            const SamplingScheme& s, double z, int n,
                                            const WeightContext& ctx = WeightContext()) {
  if (n < 1 || n > 3)
    throw InvalidParameter("voronovskaja_probe supports expansion orders 1..3");
  const double m = s.m();
  const auto parts = detail::max_product_parts(k, h, s, z);
  const double value = parts.numerator / parts.denominator;
  const double hz = h.eval(z);

  VoronovskajaProbe probe;
  probe.denominator = parts.denominator;
  probe.lhs = m * (value - hz);

  const double log_s = m * std::log(z);
  const double radius = std::max(40.0, k.support_radius().value_or(0.0) + 2.0);
  probe.a0 = detail::algebraic_sup_moment_log(k, 0, log_s, radius);
  probe.lhs_alg = m * (parts.numerator / probe.a0 - hz);

  double thetas[3] = {0.0, 0.0, 0.0};
  for (int r = 1; r <= n; ++r) thetas[r - 1] = mellin_derivative(h, r, z);

  double corr = 0.0;
  double r_fact = 1.0;
  double m_pow = 1.0;  // m^{r-1}
  for (int r = 1; r <= n; ++r) {
    r_fact *= r;
    if (r > 1) m_pow *= m;
    double inner = 0.0;
    double binom = 1.0;  // C(r, l)
    for (int l = 1; l <= r; ++l) {
      binom = binom * (r - l + 1) / l;
      const double al = detail::algebraic_sup_moment_log(k, l, log_s, radius);
      inner += binom * al / static_cast<double>(r - l + 1);
    }
    corr += thetas[r - 1] / (r_fact * m_pow) * inner;
  }
  probe.correction = corr / probe.a0;
  probe.residual = std::abs(probe.lhs - probe.correction);

  const MomentEstimate m0 = sup_moment(k, 0.0);
  const MomentEstimate mn = sup_moment(k, static_cast<double>(n));
  const MomentEstimate mn5 = sup_moment(k, static_cast<double>(n) + 5.0);
  if (m0.diverged || mn.diverged || mn5.diverged)
    throw BoundInapplicable("sup-moment of order " + std::to_string(n + 5) +
                            " diverges for kernel " + k.id());
  auto theta_n = [&h, n](double zz) { return mellin_derivative(h, n, zz); };
  const double ups = log_modulus(theta_n, 1.0 / m, ctx).value;
  double n_fact = 1.0;
  for (int r = 2; r <= n; ++r) n_fact *= r;
  const double lz = std::log(z);
  probe.remainder_bound = std::pow(2.0, n + 5) /
                          (probe.a0 * std::pow(m, n - 1) * n_fact) *
                          (1.0 + lz * lz) * ups *
                          (m0.value / (n + 1.0) + 32.0 * m0.value / (n + 6.0) +
                           mn.value + 32.0 * mn5.value);
  return probe;
}

}  // namespace expsamp
