#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "expsamp/kernels.hpp"
#include "expsamp/sampling.hpp"
#include "expsamp/test_functions.hpp"

using namespace expsamp;
using Catch::Approx;

namespace {

TestFunction fn(const std::string& name, std::function<double(double)> f, bool nonneg = false) {
  return TestFunction{name, std::move(f), {}, nonneg};
}

// Piecewise-linear function of v = log z on [-2.4, 2.4], clamped outside.
TestFunction random_piecewise(std::mt19937& rng, double lo = 0.0, double hi = 5.0) {
  const int knots = 9;
  auto vals = std::make_shared<std::vector<double>>(knots);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : *vals) v = dist(rng);
  return fn("piecewise", [vals](double z) {
    const double v = std::clamp(std::log(z), -2.4, 2.4);
    const double s = (v + 2.4) / 4.8 * (vals->size() - 1);
    const size_t i = std::min(static_cast<size_t>(s), vals->size() - 2);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * (*vals)[i] + t * (*vals)[i + 1];
  });
}

}  // namespace

TEST_CASE("index_set bounds") {
  const auto r = index_set(20.0, 0.1, 10.0);
  REQUIRE(r.lo == -46);
  REQUIRE(r.hi == 45);
  REQUIRE(r.count() == 92);

  const auto single = index_set(1.0, 1.0, M_E);
  REQUIRE(single.lo == 0);
  REQUIRE(single.hi == 0);

  REQUIRE_THROWS_AS(index_set(5.0, 1.0, 1.0001), DegenerateInterval);
  REQUIRE_THROWS_AS(index_set(-1.0, 0.1, 10.0), InvalidParameter);
  REQUIRE_THROWS_AS(index_set(5.0, 2.0, 1.0), InvalidParameter);
}

TEST_CASE("cell_average on closed-form integrands") {
  const auto one = find_test_function("one");
  REQUIRE(cell_average(one, 3, 7.0) == Approx(1.0).margin(1e-14));
  REQUIRE(cell_average(one, -11, 0.5) == Approx(1.0).margin(1e-14));

  const auto logf = fn("log", [](double z) { return std::log(z); });
  REQUIRE(cell_average(logf, 3, 2.0) == Approx(7.0 / 4.0).margin(1e-13));

  const auto ident = fn("id", [](double z) { return z; });
  REQUIRE(cell_average(ident, 0, 1.0) == Approx(M_E - 1.0).epsilon(1e-13));
}

TEST_CASE("cell_average integrates polynomials in v exactly") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> coef(16);
  for (auto& c : coef) c = dist(rng);
  const auto poly = fn("poly", [coef](double z) {
    const double v = std::log(z);
    double acc = 0.0;
    for (int k = static_cast<int>(coef.size()) - 1; k >= 0; --k) acc = acc * v + coef[k];
    return acc;
  });
  // analytic antiderivative of the polynomial
  const double m = 3.0;
  const long j = 2;
  auto anti = [&coef](double v) {
    double acc = 0.0;
    double p = v;  // v^{k+1}
    for (size_t k = 0; k < coef.size(); ++k) {
      acc += coef[k] * p / static_cast<double>(k + 1);
      p *= v;
    }
    return acc;
  };
  const double expect = m * (anti((j + 1) / m) - anti(j / m));
  REQUIRE(cell_average(poly, j, m, 8) == Approx(expect).epsilon(1e-13));
}

TEST_CASE("cell_average reports non-finite integrands") {
  const auto bad = fn("bad", [](double z) { return z < 1.0 ? std::nan("") : 1.0; });
  REQUIRE_THROWS_AS(cell_average(bad, -1, 1.0), NumericFailure);
  REQUIRE_THROWS_AS(cell_average(bad, -1, 1.0, 4), NumericFailure);
  REQUIRE_THROWS_AS(cell_average(bad, 0, 1.0, 1), InvalidParameter);
}

TEST_CASE("max-product operator reproduces constants") {
  const auto c = fn("c", [](double) { return 3.2; }, true);
  const auto kernels = {make_bspline(3), make_fejer(1.0, 0.0), make_jackson(1.0, 3, 0.0)};
  const auto s = SamplingScheme::compact(20.0, 0.1, 10.0);
  for (const auto& k : kernels) {
    for (int i = 0; i <= 8; ++i) {
      const double z = std::exp(-1.6 + 0.4 * i);
      REQUIRE(max_product_apply(k, c, s, z) == Approx(3.2).epsilon(1e-12));
    }
  }
}

TEST_CASE("max-product worked example on two cells") {
  // domain [1, 7.4] at m = 1 has index set {0, 1}; phi(+-1/2) = 1/2 and the
  // cell averages of log z are 1/2 and 3/2, so the ratio is (1/2*3/2)/(1/2).
  const auto logf = fn("log", [](double z) { return std::log(z); });
  const auto b3 = make_bspline(3);
  const auto s = SamplingScheme::compact(1.0, 1.0, 7.4);
  REQUIRE(s.indices().lo == 0);
  REQUIRE(s.indices().hi == 1);
  REQUIRE(max_product_apply(b3, logf, s, std::exp(0.5)) == Approx(1.5).margin(1e-12));
}

TEST_CASE("max-product matches the published fejer value at z = 1") {
  const auto f = make_fejer(1.0, 0.0);
  const auto& h2 = find_test_function("h2");
  const auto s = SamplingScheme::compact(50.0, 0.1, 10.0);
  const double value = max_product_apply(f, h2, s, 1.0);
  REQUIRE(value == Approx(0.6981).margin(2e-4));
}

TEST_CASE("max-product rejects out-of-domain points and bad schemes") {
  const auto b3 = make_bspline(3);
  const auto& h2 = find_test_function("h2");
  const auto s = SamplingScheme::compact(20.0, 0.5, 8.0);
  REQUIRE_THROWS_AS(max_product_apply(b3, h2, s, 0.2), InvalidParameter);
  REQUIRE_THROWS_AS(max_product_apply(b3, h2, s, 9.0), InvalidParameter);
  REQUIRE_THROWS_AS(SamplingScheme::compact(5.0, 1.0, 1.0001), DegenerateInterval);
  REQUIRE_THROWS_AS(SamplingScheme::compact(-2.0, 1.0, 4.0), InvalidParameter);
}

TEST_CASE("max-product reports a vanishing denominator") {
  // profile living far from the reachable offsets
  const auto k = KernelProfile::custom(
      "far", [](double x) { return std::max(0.0, 0.1 - std::abs(x - 3.0)); }, 3.2, {});
  const auto& h2 = find_test_function("h2");
  const auto s = SamplingScheme::compact(1.0, 1.0, M_E);
  REQUIRE_THROWS_AS(max_product_apply(k, h2, s, 1.5), KernelInadmissible);
}

TEST_CASE("bspline partition of unity drives both linear series") {
  const auto b3 = make_bspline(3);
  // brute-force check of sum_j B3(x - j) = 1
  for (int i = 0; i <= 100; ++i) {
    const double x = -2.0 + 0.04 * i;
    double acc = 0.0;
    for (long j = -6; j <= 6; ++j) acc += b3(x - static_cast<double>(j));
    REQUIRE(acc == Approx(1.0).margin(1e-12));
  }

  const auto& one = find_test_function("one");
  const auto s = SamplingScheme::compact(20.0, 0.1, 10.0);
  for (int i = 0; i <= 10; ++i) {
    const double z = std::exp(-1.2 + 0.3 * i);
    REQUIRE(linear_kantorovich_apply(b3, one, s, z) == Approx(1.0).margin(1e-12));
    REQUIRE(generalized_apply(b3, one, s, z) == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("linear and generalized worked examples") {
  const auto logf = fn("log", [](double z) { return std::log(z); });
  const auto zero = fn("zero", [](double) { return 0.0; }, true);
  const auto b3 = make_bspline(3);
  const auto s = SamplingScheme::compact(1.0, 1.0, 7.4);
  const double z = std::exp(0.5);
  REQUIRE(linear_kantorovich_apply(b3, logf, s, z) == Approx(1.0).margin(1e-12));
  REQUIRE(generalized_apply(b3, logf, s, z) == Approx(0.5).margin(1e-12));
  REQUIRE(linear_kantorovich_apply(b3, zero, s, z) == 0.0);
  REQUIRE(generalized_apply(b3, zero, s, z) == 0.0);
  REQUIRE(max_product_apply(b3, zero, s, z) == 0.0);
}

TEST_CASE("lin kernel closed-form points") {
  for (const double l : {0.0, 1.0, 2.5}) REQUIRE(lin_kernel(l, 1.0) == 1.0);
  REQUIRE(std::abs(lin_kernel(0.0, M_E)) < 1e-15);
  REQUIRE(lin_kernel(1.0, std::exp(0.5)) ==
          Approx(std::exp(-0.5) * 2.0 / M_PI).epsilon(1e-13));
  REQUIRE_THROWS_AS(lin_kernel(1.0, -2.0), InvalidParameter);
}

TEST_CASE("classical sampling partition and node reproduction") {
  auto const_samples = [](long) { return 1.0; };
  for (const double z : {0.7, 1.0, 2.3}) {
    REQUIRE(classical_exp_sampling(0.0, 3.0, const_samples, z, 50) ==
            Approx(1.0).margin(1e-2));
    REQUIRE(classical_exp_sampling(0.0, 3.0, const_samples, z, 100) ==
            Approx(1.0).margin(1e-2));
  }

  const auto& h2 = find_test_function("h2");
  const double P = 3.0;
  auto samples = [&](long j) { return h2.eval(std::exp(static_cast<double>(j) / P)); };
  const double z0 = std::exp(4.0 / P);
  REQUIRE(classical_exp_sampling(0.0, P, samples, z0, 100) ==
          Approx(h2.eval(z0)).margin(1e-12));

  auto zero_samples = [](long) { return 0.0; };
  REQUIRE(classical_exp_sampling(1.0, 2.0, zero_samples, 1.7, 100) == 0.0);
  REQUIRE_THROWS_AS(classical_exp_sampling(0.0, 3.0, const_samples, 1.0, 0),
                    InvalidParameter);
}

TEST_CASE("max-product value is invariant under kernel scaling") {
  const auto& h2 = find_test_function("h2");
  const auto s = SamplingScheme::compact(20.0, 0.1, 10.0);
  const auto base = make_fejer(1.0, 0.0);
  for (const double c : {1e-3, 7.25, 1e4}) {
    const auto scaled = KernelProfile::custom(
        "scaled", [base, c](double x) { return c * base(x); }, {}, 2.0);
    for (int i = 0; i <= 16; ++i) {
      const double z = std::exp(-1.5 + 0.2 * i);
      const double a = max_product_apply(base, h2, s, z);
      const double b = max_product_apply(scaled, h2, s, z);
      REQUIRE(b == Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("max-product lattice properties on random nonnegative functions") {
  std::mt19937 rng(42);
  const std::vector<KernelProfile> kernels = {make_bspline(3), make_fejer(1.0, 0.0),
                                              make_jackson(1.0, 3, 0.0)};
  std::uniform_real_distribution<double> zdist(std::log(0.3), std::log(6.0));
  std::uniform_int_distribution<int> mdist(5, 30);
  std::uniform_real_distribution<double> ldist(0.1, 4.0);

  for (int trial = 0; trial < 200; ++trial) {
    const auto& k = kernels[trial % kernels.size()];
    const double m = mdist(rng);
    const double z = std::exp(zdist(rng));
    const auto s = SamplingScheme::compact(m, 0.1, 10.0);

    const auto h = random_piecewise(rng);
    const auto bump = random_piecewise(rng, 0.0, 2.0);
    const auto g = fn("g", [h, bump](double z_) { return h.eval(z_) + bump.eval(z_); }, true);

    const double Mh = max_product_apply(k, h, s, z);
    const double Mg = max_product_apply(k, g, s, z);

    // monotone: h <= g pointwise
    REQUIRE(Mh <= Mg + 1e-10);

    // subadditive
    const auto sum = fn("sum", [h, g](double z_) { return h.eval(z_) + g.eval(z_); }, true);
    REQUIRE(max_product_apply(k, sum, s, z) <= Mh + Mg + 1e-10);

    // absolute-difference bound
    const auto diff = fn("diff", [h, g](double z_) { return std::abs(h.eval(z_) - g.eval(z_)); }, true);
    REQUIRE(std::abs(Mh - Mg) <= max_product_apply(k, diff, s, z) + 1e-10);

    // positively homogeneous
    const double lambda = ldist(rng);
    const auto scaled = fn("lh", [h, lambda](double z_) { return lambda * h.eval(z_); }, true);
    REQUIRE(max_product_apply(k, scaled, s, z) == Approx(lambda * Mh).epsilon(1e-12));
  }
}

TEST_CASE("compact results ignore the truncation radius") {
  const auto f = make_fejer(1.0, 0.0);
  const auto& h2 = find_test_function("h2");
  const auto s1 = SamplingScheme::compact(20.0, 0.1, 10.0, 8, 1.0);
  const auto s2 = SamplingScheme::compact(20.0, 0.1, 10.0, 8, 1000.0);
  for (const double z : {0.5, 1.0, 3.3, 8.0}) {
    REQUIRE(max_product_apply(f, h2, s1, z) == max_product_apply(f, h2, s2, z));
  }
}

TEST_CASE("whole-line window matches a wide compact domain") {
  const auto b3 = make_bspline(3);
  const auto& h2 = find_test_function("h2");
  const auto wl = SamplingScheme::whole_line(20.0, 8.0);
  const auto cp = SamplingScheme::compact(20.0, 1e-4, 1e4);
  for (const double z : {0.7, 2.0, 5.0}) {
    REQUIRE(max_product_apply(b3, h2, wl, z) ==
            Approx(max_product_apply(b3, h2, cp, z)).epsilon(1e-12));
  }

  const auto j = make_jackson(1.0, 3, 0.0);
  const auto wl_j = SamplingScheme::whole_line(20.0, 700.0);
  REQUIRE(max_product_apply(j, h2, wl_j, 2.0) ==
          Approx(max_product_apply(j, h2, cp, 2.0)).epsilon(1e-9));
}

TEST_CASE("whole-line mode rejects truncation radii with visible tails") {
  const auto j = make_jackson(1.0, 3, 0.0);
  const auto& h2 = find_test_function("h2");
  const auto wl = SamplingScheme::whole_line(20.0, 3.0);
  REQUIRE_THROWS_AS(max_product_apply(j, h2, wl, 2.0), InvalidParameter);
}

TEST_CASE("grid sweeps are deterministic") {
  const auto f = make_fejer(1.0, 0.0);
  const auto& h3 = find_test_function("h3");
  const auto s = SamplingScheme::compact(35.0, 0.1, 10.0);
  std::vector<double> first, second;
  for (int pass = 0; pass < 2; ++pass) {
    auto& out = pass == 0 ? first : second;
    for (int i = 0; i <= 64; ++i) {
      out.push_back(max_product_apply(f, h3, s, std::exp(-1.5 + 3.0 * i / 64.0)));
    }
  }
  REQUIRE(first == second);
}
