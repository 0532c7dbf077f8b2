#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expsamp/errors.hpp"
#include "expsamp/quadrature.hpp"

namespace expsamp {

/// sin(pi u) / (pi u) with the continuous extension sinc(0) = 1.
inline double sinc(double u) {
  const double p = M_PI * u;
  if (std::abs(p) < 1e-4) {
    const double p2 = p * p;
    return 1.0 - p2 / 6.0 * (1.0 - p2 / 20.0);
  }
  return std::sin(p) / p;
}

namespace detail {

inline double pow_int(double x, int n) {
  double r = 1.0;
  double base = x;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r *= base;
    base *= base;
  }
  return r;
}

/// Golden-section refinement of an extremum bracketed by [lo, hi].
inline double golden_extremum(const std::function<double(double)>& f, double lo,
                              double hi, bool maximize, double tol = 1e-12) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  int guard = 200;
  while (b - a > tol && guard-- > 0) {
    const bool keep_left = maximize ? (fc > fd) : (fc < fd);
    if (keep_left) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  if (maximize) return std::max(fm, std::max(fc, fd));
  return std::min(fm, std::min(fc, fd));
}

inline std::string format_decimal(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

/// A kernel viewed in the logarithmic domain.
///
/// The kernel on the positive half-line is kappa(z) = phi(log z), and every
/// consumer evaluates phi(m log z - j) instead of kappa(e^{-j} z^m), so the
/// product e^{-j} z^m is never formed and cannot overflow.
///
/// Profiles are immutable after construction; the admissibility constants
/// (infimum over [0, 1], global sup) are computed eagerly and cached, so
/// sharing a profile across threads is safe.
class KernelProfile {
 public:
  using Profile = std::function<double(double)>;

  /// Builds a profile and computes its cached constants. Exactly one of
  /// support_radius / decay_exponent should be supplied for kernels meant to
  /// pass the moment machinery; profiles with neither are treated as having
  /// divergent sup-moments of every order.
  static KernelProfile custom(std::string id, Profile profile,
                              std::optional<double> support_radius,
                              std::optional<double> decay_exponent,
                              std::map<std::string, double> params = {},
                              std::optional<double> lobe_period = {},
                              std::optional<double> normalization = {}) {
    KernelProfile k;
    k.id_ = std::move(id);
    k.profile_ = std::move(profile);
    k.support_radius_ = support_radius;
    k.decay_exponent_ = decay_exponent;
    k.params_ = std::move(params);
    k.lobe_period_ = lobe_period;
    k.normalization_ = normalization;
    k.compute_caches();
    return k;
  }

  double operator()(double x) const { return profile_(x); }

  const std::string& id() const { return id_; }
  const std::map<std::string, double>& params() const { return params_; }
  std::optional<double> support_radius() const { return support_radius_; }
  std::optional<double> decay_exponent() const { return decay_exponent_; }
  std::optional<double> lobe_period() const { return lobe_period_; }
  std::optional<double> normalization() const { return normalization_; }

  /// Cached infimum of the profile over [0, 1] (z in [1, e]).
  double zeta_cached() const { return zeta_; }
  /// Cached global sup of |phi|, used as the scale for truncation checks.
  double sup_abs() const { return sup_abs_; }

 private:
  KernelProfile() = default;

  void compute_caches() {
    // 4097-point grid on [0, 1] with golden-section refinement around the
    // grid minimizer.
    constexpr int kGrid = 4097;
    double best = profile_(0.0);
    int arg = 0;
    for (int i = 1; i < kGrid; ++i) {
      const double x = static_cast<double>(i) / (kGrid - 1);
      const double v = profile_(x);
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    const double step = 1.0 / (kGrid - 1);
    const double lo = std::max(0.0, arg * step - step);
    const double hi = std::min(1.0, arg * step + step);
    zeta_ = std::min(best, detail::golden_extremum(profile_, lo, hi, false, 1e-10));

    const double r0 = support_radius_.value_or(64.0);
    constexpr int kSupGrid = 8193;
    double sup = 0.0;
    int supArg = 0;
    for (int i = 0; i < kSupGrid; ++i) {
      const double x = -r0 + 2.0 * r0 * i / (kSupGrid - 1);
      const double v = std::abs(profile_(x));
      if (v > sup) {
        sup = v;
        supArg = i;
      }
    }
    const double sstep = 2.0 * r0 / (kSupGrid - 1);
    const double slo = -r0 + supArg * sstep - sstep;
    const double shi = -r0 + supArg * sstep + sstep;
    auto absf = [this](double x) { return std::abs(profile_(x)); };
    sup_abs_ = std::max(sup, detail::golden_extremum(absf, slo, shi, true, 1e-12));
  }

  std::string id_;
  Profile profile_;
  std::optional<double> support_radius_;
  std::optional<double> decay_exponent_;
  std::optional<double> lobe_period_;
  std::optional<double> normalization_;
  std::map<std::string, double> params_;
  double zeta_ = 0.0;
  double sup_abs_ = 0.0;
};

/// Symmetric B-spline profile of order n: support [-n/2, n/2], truncated
/// powers of exponent n-1, nonnegative and continuous.
inline KernelProfile make_bspline(int n) {
  if (n < 2) throw InvalidParameter("bspline order must be an integer >= 2");
  const double half = 0.5 * n;
  std::vector<double> coeff(static_cast<size_t>(n) + 1);
  double fact = 1.0;
  for (int k = 2; k <= n - 1; ++k) fact *= k;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    coeff[k] = (k % 2 == 0 ? binom : -binom) / fact;
    binom = binom * (n - k) / (k + 1);
  }
  auto phi = [n, half, coeff](double x) -> double {
    if (std::abs(x) >= half) return 0.0;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double t = half + x - k;
      if (t <= 0.0) break;  // arguments decrease with k
      s += coeff[k] * detail::pow_int(t, n - 1);
    }
    return s > 0.0 ? s : 0.0;
  };
  return KernelProfile::custom("bspline:n=" + std::to_string(n), phi, half, {},
                               {{"n", static_cast<double>(n)}});
}

/// Mellin-Fejer profile phi(x) = (beta/2pi) e^{-t x} sinc^2(beta x / 2pi).
/// Quadratic tail decay; the decay exponent is only recorded for t = 0 since
/// the exponential tilt destroys boundedness on one side otherwise.
inline KernelProfile make_fejer(double beta, double t) {
  if (!(beta >= 1.0)) throw InvalidParameter("fejer requires beta >= 1");
  const double scale = beta / (2.0 * M_PI);
  auto phi = [beta, t, scale](double x) {
    const double s = sinc(beta * x / (2.0 * M_PI));
    const double tilt = (t == 0.0) ? 1.0 : std::exp(-t * x);
    return scale * tilt * s * s;
  };
  std::optional<double> decay;
  if (t == 0.0) decay = 2.0;
  const std::string id =
      "fejer:beta=" + detail::format_decimal(beta) + ",t=" + detail::format_decimal(t);
  return KernelProfile::custom(id, phi, {}, decay,
                               {{"beta", beta}, {"t", t}}, 2.0 * M_PI / beta);
}

/// Mellin-Jackson profile phi(x) = C e^{-t x} sinc(x / 2 beta pi n)^{2n}.
///
/// The normalization C is fixed so that the untilted profile integrates to
/// one over the real line; it is computed once per profile by adaptive
/// quadrature, lobe by lobe, with the algebraic tail bounded analytically.
inline KernelProfile make_jackson(double beta, int n, double t) {
  if (!(beta >= 1.0)) throw InvalidParameter("jackson requires beta >= 1");
  if (n < 1) throw InvalidParameter("jackson requires integer n >= 1");
  const double width = 2.0 * beta * M_PI * n;
  const int two_n = 2 * n;
  auto shape = [width, two_n](double x) {
    const double s = sinc(x / width);
    return detail::pow_int(s * s, two_n / 2);
  };

  const double lobe = width;  // zeros of the sinc argument are spaced by width
  double acc = 0.0;
  int k = 0;
  for (; k < 100000; ++k) {
    const double a = k * lobe;
    const double b = (k + 1) * lobe;
    acc += adaptive_simpson(shape, a, b, 1e-13 / (1.0 + k));
    // remaining tail under the envelope (2 beta n / x)^{2n}
    const double tail = detail::pow_int(2.0 * beta * n / b, two_n) * b / (two_n - 1);
    if (k >= 1 && tail < 1e-14 * acc) break;
  }
  if (k >= 100000) throw NumericFailure("jackson normalization quadrature did not converge");
  const double c_inv = 2.0 * acc;
  if (!(std::isfinite(c_inv) && c_inv > 0.0))
    throw NumericFailure("jackson normalization quadrature failed");
  const double c = 1.0 / c_inv;

  auto phi = [shape, c, t](double x) {
    const double tilt = (t == 0.0) ? 1.0 : std::exp(-t * x);
    return c * tilt * shape(x);
  };
  std::optional<double> decay;
  if (t == 0.0) decay = static_cast<double>(two_n);
  const std::string id = "jackson:beta=" + detail::format_decimal(beta) +
                         ",n=" + std::to_string(n) + ",t=" + detail::format_decimal(t);
  return KernelProfile::custom(id, phi, {}, decay,
                               {{"beta", beta}, {"n", static_cast<double>(n)}, {"t", t}},
                               lobe, c);
}

/// Infimum of the profile over [0, 1] (z in [1, e]); positive for admissible
/// kernels. Throws when the cached value is not positive.
inline double kernel_zeta(const KernelProfile& k) {
  const double z = k.zeta_cached();
  if (!(z > 1e-10))
    throw KernelInadmissible("kernel " + k.id() + " has non-positive infimum on [1, e]");
  return z;
}

namespace detail {

inline std::map<std::string, double> parse_kv(const std::string& text,
                                              const std::string& id) {
  std::map<std::string, double> kv;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
      throw InvalidParameter("malformed kernel id '" + id + "': expected key=value pairs");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end == nullptr || *end != '\0')
      throw InvalidParameter("malformed kernel id '" + id + "': bad value for '" + key + "'");
    if (kv.count(key))
      throw InvalidParameter("malformed kernel id '" + id + "': duplicate key '" + key + "'");
    kv[key] = v;
    pos = comma + 1;
  }
  return kv;
}

inline double take_key(std::map<std::string, double>& kv, const std::string& key,
                       const std::string& id) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw InvalidParameter("kernel id '" + id + "' is missing key '" + key + "'");
  const double v = it->second;
  kv.erase(it);
  return v;
}

inline int as_integer(double v, const std::string& key, const std::string& id) {
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw InvalidParameter("kernel id '" + id + "': key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

}  // namespace detail

/// Resolves a catalog id of the form name:key=value,... with lowercase keys
/// and decimal values, e.g. "bspline:n=3", "fejer:beta=1,t=0",
/// "jackson:beta=1,n=3,t=0".
inline KernelProfile parse_kernel_id(const std::string& id) {
  const size_t colon = id.find(':');
  if (colon == std::string::npos || colon + 1 >= id.size())
    throw InvalidParameter("malformed kernel id '" + id + "': expected name:key=value,...");
  const std::string family = id.substr(0, colon);
  auto kv = detail::parse_kv(id.substr(colon + 1), id);

  if (family == "bspline") {
    const int n = detail::as_integer(detail::take_key(kv, "n", id), "n", id);
    if (!kv.empty())
      throw InvalidParameter("kernel id '" + id + "' has unknown key '" + kv.begin()->first + "'");
    return make_bspline(n);
  }
  if (family == "fejer") {
    const double beta = detail::take_key(kv, "beta", id);
    const double t = detail::take_key(kv, "t", id);
    if (!kv.empty())
      throw InvalidParameter("kernel id '" + id + "' has unknown key '" + kv.begin()->first + "'");
    return make_fejer(beta, t);
  }
  if (family == "jackson") {
    const double beta = detail::take_key(kv, "beta", id);
    const int n = detail::as_integer(detail::take_key(kv, "n", id), "n", id);
    const double t = detail::take_key(kv, "t", id);
    if (!kv.empty())
      throw InvalidParameter("kernel id '" + id + "' has unknown key '" + kv.begin()->first + "'");
    return make_jackson(beta, n, t);
  }
  throw InvalidParameter("unknown kernel family '" + family +
                         "' (known: bspline, fejer, jackson)");
}

/// Kernel-id grammar, shown by the CLI help and the kernels subcommand.
inline const char* kernel_id_grammar() {
  return "kernel ids: name:key=value,... (keys lowercase, values decimal)\n"
         "  bspline:n=<int>=2..        symmetric B-spline, compact support n/2\n"
         "  fejer:beta=<real>=1..,t=<real>       quadratic tail decay at t=0\n"
         "  jackson:beta=<real>=1..,n=<int>=1..,t=<real>  decay 2n at t=0\n";
}

}  // namespace expsamp
