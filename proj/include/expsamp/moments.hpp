#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "expsamp/errors.hpp"
#include "expsamp/kernels.hpp"

namespace expsamp {

/// Result of a discrete sup-moment estimation.
///
/// The estimate is a grid supremum and therefore a lower bound of the true
/// value; it is deterministic and bit-reproducible for identical inputs, and
/// nondecreasing in the truncation radius.
struct MomentEstimate {
  double order = 0.0;
  double value = 0.0;
  double truncation_radius = 0.0;
  int grid_resolution = 0;
  bool diverged = false;
};

/// Sup-moment of order nu: sup over shifts of |phi(j - log s)| |j - log s|^nu,
/// which collapses to sup_x |phi(x)| |x|^nu because the fractional part of
/// log s sweeps [0, 1).
///
/// resolution counts grid samples per unit of x. For kernels with unbounded
/// support the analytic decay metadata decides divergence: the sup grows
/// without bound whenever the decay exponent does not exceed nu.
inline MomentEstimate sup_moment(const KernelProfile& k, double nu,
                                 double radius = 64.0, int resolution = 2048) {
  if (!(nu >= 0.0)) throw InvalidParameter("sup_moment requires nu >= 0");
  if (!(radius > 0.0)) throw InvalidParameter("sup_moment requires radius > 0");
  if (resolution < 64) throw InvalidParameter("sup_moment requires resolution >= 64");

  MomentEstimate est;
  est.order = nu;
  est.truncation_radius = radius;
  est.grid_resolution = resolution;

  if (!k.support_radius()) {
    const auto decay = k.decay_exponent();
    if (!decay || *decay <= nu) {
      est.value = std::numeric_limits<double>::infinity();
      est.diverged = true;
      return est;
    }
  }

  const double reach = k.support_radius() ? std::min(radius, *k.support_radius()) : radius;
  const long cells = std::max(2L, std::lround(2.0 * reach * resolution));
  auto f = [&k, nu](double x) { return std::abs(k(x)) * std::pow(std::abs(x), nu); };

  double best = 0.0;
  long arg = 0;
  for (long i = 0; i <= cells; ++i) {
    const double x = -reach + 2.0 * reach * static_cast<double>(i) / cells;
    const double v = f(x);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  const double step = 2.0 * reach / cells;
  const double lo = std::max(-reach, -reach + arg * step - step);
  const double hi = std::min(reach, -reach + arg * step + step);
  est.value = std::max(best, detail::golden_extremum(f, lo, hi, true, 1e-12));
  return est;
}

namespace detail {

inline double algebraic_sup_moment_log(const KernelProfile& k, int order,
                                       double log_s, double radius) {
  if (order < 0) throw InvalidParameter("algebraic moment order must be >= 0");
  if (!(radius > 0.0)) throw InvalidParameter("algebraic moment radius must be > 0");
  const long lo = static_cast<long>(std::ceil(log_s - radius));
  const long hi = static_cast<long>(std::floor(log_s + radius));
  if (hi < lo) throw InvalidParameter("algebraic moment has an empty index window");
  double best = -std::numeric_limits<double>::infinity();
  for (long j = lo; j <= hi; ++j) {
    const double x = static_cast<double>(j) - log_s;
    best = std::max(best, k(x) * pow_int(x, order));
  }
  return best;
}

}  // namespace detail

/// Algebraic moment: sup over |j - log s| <= radius of
/// phi(j - log s) (j - log s)^order, with signed powers.
inline double algebraic_sup_moment(const KernelProfile& k, int order, double s,
                                   double radius = 40.0) {
  if (!(s > 0.0)) throw InvalidParameter("algebraic moment requires s > 0");
  return detail::algebraic_sup_moment_log(k, order, std::log(s), radius);
}

/// Tail of the kernel past the window |j - log s| <= m rho: the sup over a
/// log-grid of offsets of the largest |phi| among the excluded indices.
/// Compact-support kernels give an exact zero once the window covers the
/// support. For decaying kernels the scan extends a couple of oscillation
/// lobes past the cutoff, where the decaying envelope attains its tail sup.
inline double tail_remainder(const KernelProfile& k, double m, double rho) {
  if (!(m > 0.0)) throw InvalidParameter("tail_remainder requires m > 0");
  if (!(rho > 0.0)) throw InvalidParameter("tail_remainder requires rho > 0");
  const double cut = m * rho;
  if (k.support_radius() && cut >= *k.support_radius()) return 0.0;

  double window;
  if (k.support_radius()) {
    window = *k.support_radius() - cut;
  } else {
    window = std::max(64.0, 2.0 * k.lobe_period().value_or(0.0));
  }

  constexpr int kOffsets = 128;
  double best = 0.0;
  for (int io = 0; io < kOffsets; ++io) {
    const double f = static_cast<double>(io) / kOffsets;
    const long jlo = static_cast<long>(std::floor(f + cut)) + 1;
    const long jhi = static_cast<long>(std::floor(f + cut + window));
    for (long j = jlo; j <= jhi; ++j) {
      const double x = static_cast<double>(j) - f;
      best = std::max(best, std::abs(k(x)));
      best = std::max(best, std::abs(k(-x)));
    }
  }
  return best;
}

}  // namespace expsamp
