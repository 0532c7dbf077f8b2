#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "expsamp/errors.hpp"
#include "expsamp/kernels.hpp"
#include "expsamp/moments.hpp"
#include "expsamp/quadrature.hpp"
#include "expsamp/test_functions.hpp"

namespace expsamp {

/// Inclusive integer range of sample indices.
struct IndexRange {
  long lo = 0;
  long hi = -1;
  long count() const { return hi - lo + 1; }
};

/// Index set {ceil(m ln a), ..., floor(m ln b) - 1} (natural logarithm).
inline IndexRange index_set(double m, double a, double b) {
  if (!(m > 0.0)) throw InvalidParameter("index_set requires m > 0");
  if (!(a > 0.0 && a < b)) throw InvalidParameter("index_set requires 0 < a < b");
  const long lo = static_cast<long>(std::ceil(m * std::log(a)));
  const long hi = static_cast<long>(std::floor(m * std::log(b))) - 1;
  if (hi < lo)
    throw DegenerateInterval("index set for m=" + std::to_string(m) +
                             " on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "] is empty");
  return {lo, hi};
}

/// Evaluation plan for the sampling operators: rate m, compact interval or
/// whole-line window, and the per-cell quadrature rule.
///
/// In compact mode the index set is exact and the truncation radius is
/// unused. In whole-line mode indices are restricted to |j - m log z| <= R,
/// and the discarded tail is validated against the kernel at apply time.
/// Schemes are immutable and safe to share across threads.
class SamplingScheme {
 public:
  static SamplingScheme compact(double m, double a, double b,
                                int quadrature_nodes = 8,
                                double truncation_radius = 64.0) {
    SamplingScheme s(m, quadrature_nodes, truncation_radius);
    s.compact_ = true;
    s.a_ = a;
    s.b_ = b;
    s.indices_ = index_set(m, a, b);
    return s;
  }

  static SamplingScheme whole_line(double m, double truncation_radius = 64.0,
                                   int quadrature_nodes = 8) {
    return SamplingScheme(m, quadrature_nodes, truncation_radius);
  }

  double m() const { return m_; }
  bool is_compact() const { return compact_; }
  double a() const { return a_; }
  double b() const { return b_; }
  IndexRange indices() const { return indices_; }
  double truncation_radius() const { return truncation_radius_; }
  int quadrature_nodes() const { return rule_.size(); }
  const GaussLegendreRule& rule() const { return rule_; }

 private:
  SamplingScheme(double m, int nodes, double truncation_radius)
      : m_(m), truncation_radius_(truncation_radius), rule_(nodes) {
    if (!(m > 0.0)) throw InvalidParameter("sampling rate m must be positive");
    if (!(truncation_radius > 0.0))
      throw InvalidParameter("truncation radius must be positive");
  }

  double m_;
  bool compact_ = false;
  double a_ = 0.0;
  double b_ = 0.0;
  IndexRange indices_;
  double truncation_radius_;
  GaussLegendreRule rule_;
};

/// Cell average m * integral_{j/m}^{(j+1)/m} h(e^v) dv by Gauss-Legendre
/// quadrature mapped to the cell.
inline double cell_average(const TestFunction& h, long j, double m,
                           const GaussLegendreRule& rule) {
  const double lo = static_cast<double>(j) / m;
  const double hi = static_cast<double>(j + 1) / m;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  const auto& xs = rule.nodes();
  const auto& ws = rule.weights();
  for (int i = 0; i < rule.size(); ++i) {
    const double v = mid + half * xs[i];
    const double y = h.eval(std::exp(v));
    if (!std::isfinite(y))
      throw NumericFailure("non-finite integrand in cell j=" + std::to_string(j) +
                           ", m=" + std::to_string(m));
    acc += ws[i] * y;
  }
  return 0.5 * acc;  // m (hi - lo) / 2 == 1/2
}

inline double cell_average(const TestFunction& h, long j, double m, int nodes = 8) {
  if (nodes < 2) throw InvalidParameter("cell_average requires nodes >= 2");
  return cell_average(h, j, m, GaussLegendreRule(nodes));
}

namespace detail {

inline void validate_whole_line(const KernelProfile& k, const SamplingScheme& s) {
  if (k.support_radius() && s.truncation_radius() >= *k.support_radius()) return;
  const double tail = tail_remainder(k, s.m(), s.truncation_radius() / s.m());
  if (tail > 1e-12 * k.sup_abs())
    throw InvalidParameter("truncation radius " + std::to_string(s.truncation_radius()) +
                           " leaves a non-negligible tail for kernel " + k.id());
}

inline IndexRange apply_window(const SamplingScheme& s, double t) {
  if (s.is_compact()) return s.indices();
  const double r = s.truncation_radius();
  return {static_cast<long>(std::ceil(t - r)), static_cast<long>(std::floor(t + r))};
}

struct MaxProductParts {
  double numerator;
  double denominator;
};

inline MaxProductParts max_product_parts(const KernelProfile& k, const TestFunction& h,
                                         const SamplingScheme& s, double z) {
  if (!(z > 0.0)) throw InvalidParameter("operator argument z must be positive");
  if (s.is_compact() && (z < s.a() || z > s.b()))
    throw InvalidParameter("z=" + std::to_string(z) + " lies outside the compact domain");
  if (!s.is_compact()) validate_whole_line(k, s);

  const double t = s.m() * std::log(z);
  const IndexRange win = apply_window(s, t);
  double num = -std::numeric_limits<double>::infinity();
  double den = -std::numeric_limits<double>::infinity();
  for (long j = win.lo; j <= win.hi; ++j) {
    const double kv = k(t - static_cast<double>(j));
    den = std::max(den, kv);
    const double prod = (kv == 0.0) ? 0.0 : kv * cell_average(h, j, s.m(), s.rule());
    num = std::max(num, prod);
  }
  if (!(den > 0.0))
    throw KernelInadmissible("max-product denominator is not positive at z=" +
                             std::to_string(z) + " for kernel " + k.id());
  return {num, den};
}

}  // namespace detail

/// Max-product operator: the ratio of suprema
///   [sup_j phi(m log z - j) * cell_average(h, j, m)] / [sup_j phi(m log z - j)]
/// over the scheme's index window.
inline double max_product_apply(const KernelProfile& k, const TestFunction& h,
                                const SamplingScheme& s, double z) {
  const auto parts = detail::max_product_parts(k, h, s, z);
  return parts.numerator / parts.denominator;
}

/// Linear Kantorovich series: sum_j phi(m log z - j) * cell_average(h, j, m).
inline double linear_kantorovich_apply(const KernelProfile& k, const TestFunction& h,
                                       const SamplingScheme& s, double z) {
  if (!(z > 0.0)) throw InvalidParameter("operator argument z must be positive");
  if (s.is_compact() && (z < s.a() || z > s.b()))
    throw InvalidParameter("z=" + std::to_string(z) + " lies outside the compact domain");
  if (!s.is_compact()) detail::validate_whole_line(k, s);
  const double t = s.m() * std::log(z);
  const IndexRange win = detail::apply_window(s, t);
  double acc = 0.0;
  for (long j = win.lo; j <= win.hi; ++j) {
    const double kv = k(t - static_cast<double>(j));
    if (kv != 0.0) acc += kv * cell_average(h, j, s.m(), s.rule());
  }
  return acc;
}

/// Generalized sampling series: sum_j phi(m log z - j) * h(e^{j/m}).
inline double generalized_apply(const KernelProfile& k, const TestFunction& h,
                                const SamplingScheme& s, double z) {
  if (!(z > 0.0)) throw InvalidParameter("operator argument z must be positive");
  if (s.is_compact() && (z < s.a() || z > s.b()))
    throw InvalidParameter("z=" + std::to_string(z) + " lies outside the compact domain");
  if (!s.is_compact()) detail::validate_whole_line(k, s);
  const double t = s.m() * std::log(z);
  const IndexRange win = detail::apply_window(s, t);
  double acc = 0.0;
  for (long j = win.lo; j <= win.hi; ++j) {
    const double kv = k(t - static_cast<double>(j));
    if (kv == 0.0) continue;
    const double y = h.eval(std::exp(static_cast<double>(j) / s.m()));
    if (!std::isfinite(y))
      throw NumericFailure("non-finite sample at node j=" + std::to_string(j));
    acc += kv * y;
  }
  return acc;
}

/// lin kernel: z^{-l} sinc(log z) with the continuous extension lin(1) = 1.
inline double lin_kernel(double l, double z) {
  if (!(z > 0.0)) throw InvalidParameter("lin_kernel requires z > 0");
  const double t = std::log(z);
  return std::exp(-l * t) * sinc(t);
}

/// Classical exponential sampling sum over |j + P log z| <= window:
///   sum_j lin_{l/P}(e^j z^P) h(e^{j/P}),
/// evaluated through logarithms so e^j z^P never overflows.
inline double classical_exp_sampling(double l, double P,
                                     const std::function<double(long)>& samples,
                                     double z, long window = 100) {
  if (!(P > 0.0)) throw InvalidParameter("classical sampling requires P > 0");
  if (!(z > 0.0)) throw InvalidParameter("classical sampling requires z > 0");
  if (window < 1) throw InvalidParameter("classical sampling requires window >= 1");
  const double plz = P * std::log(z);
  const double c = l / P;
  const long jlo = static_cast<long>(std::ceil(-plz - static_cast<double>(window)));
  const long jhi = static_cast<long>(std::floor(-plz + static_cast<double>(window)));
  double acc = 0.0;
  for (long j = jlo; j <= jhi; ++j) {
    const double t = static_cast<double>(j) + plz;
    acc += std::exp(-c * t) * sinc(t) * samples(j);
  }
  return acc;
}

}  // namespace expsamp
