#pragma once

#include <vector>

#include "hg/config.hpp"
#include "hg/measure.hpp"

namespace hg {

struct OscillationSpec {
  std::vector<double> b;       // target values, b_k >= 0
  std::vector<double> r;       // annulus aspect ratios, powers of 2 (> 1)
  std::vector<double> lambda;  // annulus scales, powers of 2, increasing
  std::vector<double> t;       // sampling times t_k = lambda_k^2 / 4
  std::vector<double> error_bounds;  // (2 c_N + 1) 2^{-k}, c_N = pi^{-N/2}
};

enum class LongtimeBehaviour {
  BoundedOnParabolas,
  DecaysToZero,
  ConvergesTo,
  DivergesToInfinity,
  Inconclusive
};

struct LongtimeVerdict {
  LongtimeBehaviour behaviour = LongtimeBehaviour::Inconclusive;
  double limit = 0.0;  // for ConvergesTo
  // Evidence: dyadic annulus and ball averages R^{-N} |mu|(...), R = 2^k,
  // plus origin-trace samples used to refine the liminf criterion.
  std::vector<double> annulus_averages;
  std::vector<double> ball_averages;
  std::vector<double> trace_samples;
  bool positive_liminf = false;
};

// u(0, t_i); for nonnegative data this is the Gaussian-weighted norm at index
// 1/(4t) and is computed on the cheap radial path.
std::vector<double> trace_at_origin(const Measure& mu,
                                    const std::vector<double>& times,
                                    const QuadratureConfig& cfg = {});

LongtimeVerdict classify_longtime(const Measure& mu, int k_max,
                                  const QuadratureConfig& cfg = {});

// Recursive annulus construction realizing u(0, t_k) ~ b_k.  Parameters are
// the smallest powers of two satisfying the construction inequalities with a
// factor-2 slack, so every bound holds comfortably in floating point.
std::pair<Measure, OscillationSpec> build_oscillating_data(
    const std::vector<double>& b, int dimension);

// Triangular interleaving  a1 | a1 a2 | a1 a2 a3 | ...  (prefixes capped at
// the full list), truncated to `length` entries.
std::vector<double> interleave_targets(const std::vector<double>& alpha,
                                       std::size_t length);

// v0 restricted to the closed ball B(0,R) plus osc restricted to its
// complement.  Families that cannot represent the restriction raise
// unsupported_restriction.
Measure splice_shadow(const Measure& v0, const Measure& osc, double R);

// Max over probes of |S(1)[dilate(mu, lambda)](x) - S(lambda^2)mu(lambda x)|.
double rescaling_residual(const Measure& mu, double lambda,
                          const std::vector<Point>& probes,
                          const QuadratureConfig& cfg = {});

}  // namespace hg
