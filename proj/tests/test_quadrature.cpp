#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hg/config.hpp"
#include "hg/error.hpp"
#include "hg/quadrature.hpp"

namespace q = hg::quad;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent oracle for e^{-kappa} I_0(kappa) = (1/pi) int_0^pi
// e^{kappa(cos th - 1)} dth.  The integrand is even about both endpoints, so
// every odd endpoint derivative vanishes and the trapezoid rule converges
// faster than any power of the step.
double i0e_trapezoid(double kappa, int n) {
  double s = 0.5 * (1.0 + std::exp(-2.0 * kappa));
  for (int i = 1; i < n; ++i) {
    const double th = kPi * static_cast<double>(i) / n;
    s += std::exp(kappa * (std::cos(th) - 1.0));
  }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("gk_adaptive integrates a gaussian to sqrt(pi)") {
  auto r = q::gk_adaptive([](double x) { return std::exp(-x * x); }, -10.0,
                          10.0, 1e-13, 1e-15, 4096);
  CHECK(r.value == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(std::abs(r.value - std::sqrt(kPi)) <= 1e-12);
}

TEST_CASE("gk_adaptive is exact on low-degree polynomials") {
  auto r = q::gk_adaptive([](double x) { return x * x * x * x * x * x; }, 0.0,
                          1.0, 1e-12, 1e-15, 4096);
  CHECK(r.value == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("gk_panels handles a kink placed on an edge") {
  auto r = q::gk_panels([](double x) { return std::abs(x); },
                        {-1.0, 0.0, 1.0}, 1e-12, 1e-15, 4096);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gk_adaptive reports a usable estimate when the budget runs out") {
  auto r = q::gk_adaptive([](double x) { return std::sin(50.0 * x); }, 0.0,
                          10.0, 1e-14, 1e-16, 30);
  CHECK(std::isfinite(r.value));
  CHECK(r.error > 0.0);
}

TEST_CASE("hermite nodes and weights reproduce gaussian moments") {
  for (int n : {16, 32, 64}) {
    const auto& x = q::hermite_nodes(n);
    const auto& w = q::hermite_weights(n);
    REQUIRE(x.size() == static_cast<std::size_t>(n));
    REQUIRE(w.size() == static_cast<std::size_t>(n));
    double m0 = 0.0, m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
      m0 += w[i];
      m1 += w[i] * x[i];
      m2 += w[i] * x[i] * x[i];
      m4 += w[i] * x[i] * x[i] * x[i] * x[i];
    }
    CHECK(m0 == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
    CHECK(std::abs(m1) <= 1e-13);
    CHECK(m2 == doctest::Approx(0.5 * std::sqrt(kPi)).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(0.75 * std::sqrt(kPi)).epsilon(1e-12));
  }
}

TEST_CASE("hermite_adaptive matches the cosine transform of the gaussian") {
  // int e^{-z^2} cos z dz = sqrt(pi) e^{-1/4}.
  auto r = q::hermite_adaptive([](double z) { return std::cos(z); }, 1e-12,
                               1e-15, 128);
  CHECK(r.value ==
        doctest::Approx(std::sqrt(kPi) * std::exp(-0.25)).epsilon(1e-12));
}

TEST_CASE("i0e agrees with an independent trapezoid oracle") {
  for (double kappa : {0.1, 1.0, 5.0, 14.9, 15.1, 50.0, 500.0}) {
    const double oracle = i0e_trapezoid(kappa, 8192);
    CHECK(q::i0e(kappa) == doctest::Approx(oracle).epsilon(1e-11));
  }
  CHECK(q::i0e(0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("angular_tilde matches its closed forms in all three dimensions") {
  for (double kappa : {0.0, 0.5, 3.0, 30.0}) {
    CHECK(q::angular_tilde(1, kappa) ==
          doctest::Approx(1.0 + std::exp(-2.0 * kappa)).epsilon(1e-12));
    CHECK(q::angular_tilde(2, kappa) ==
          doctest::Approx(2.0 * kPi * q::i0e(kappa)).epsilon(1e-10));
    const double expected3 =
        kappa == 0.0 ? 4.0 * kPi
                     : 2.0 * kPi * (1.0 - std::exp(-2.0 * kappa)) / kappa;
    CHECK(q::angular_tilde(3, kappa) ==
          doctest::Approx(expected3).epsilon(1e-10));
  }
}

TEST_CASE("angular_tilde is bounded by the sphere area") {
  for (int N : {1, 2, 3})
    for (double kappa : {0.0, 0.1, 2.0, 100.0, 1e4})
      CHECK(q::angular_tilde(N, kappa) <= q::sphere_area(N) * (1.0 + 1e-12));
}

TEST_CASE("sphere areas and ball volumes") {
  CHECK(q::sphere_area(1) == doctest::Approx(2.0));
  CHECK(q::sphere_area(2) == doctest::Approx(2.0 * kPi));
  CHECK(q::sphere_area(3) == doctest::Approx(4.0 * kPi));
  CHECK(q::ball_volume(1) == doctest::Approx(2.0));
  CHECK(q::ball_volume(2) == doctest::Approx(kPi));
  CHECK(q::ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
}

TEST_CASE("gaussian_window certifies the requested tail mass") {
  for (double tol : {1e-6, 1e-12}) {
    const double Z = q::gaussian_window(tol);
    CHECK(std::erfc(Z) <= tol);
    CHECK(Z < 10.0);
  }
  CHECK(q::gaussian_window(1e-12) > q::gaussian_window(1e-6));
}

TEST_CASE("quadrature node accounting") {
  hg::quad_stats::reset();
  CHECK(hg::quad_stats::nodes_used() == 0);
  (void)q::gk_adaptive([](double x) { return std::exp(-x * x); }, 0.0, 1.0,
                       1e-10, 1e-14, 4096);
  CHECK(hg::quad_stats::nodes_used() > 0);
  const auto before = hg::quad_stats::nodes_used();
  hg::quad_stats::add(7);
  CHECK(hg::quad_stats::nodes_used() == before + 7);
  hg::quad_stats::reset();
  CHECK(hg::quad_stats::nodes_used() == 0);
}

TEST_CASE("config validation rejects nonsense tolerances") {
  hg::QuadratureConfig cfg;
  cfg.rel_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), hg::error);
  cfg = {};
  cfg.max_nodes_per_axis = 0;
  CHECK_THROWS_AS(cfg.validate(), hg::error);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}
