#pragma once

// Shared builders for the test suites: compact constructors for the measure
// families plus the handful of canonical data sets that several suites probe.

#include <cmath>
#include <utility>
#include <vector>

#include "hg/measure.hpp"

namespace th {

inline hg::Measure expquad(int N, double A, hg::Modifier mod = hg::ModOne{},
                           hg::Point b = {}, hg::Point center = {}) {
  hg::ExpQuadDensity d;
  d.A = A;
  d.b = std::move(b);
  d.modifier = std::move(mod);
  d.center = std::move(center);
  return hg::Measure{N, std::move(d)};
}

inline hg::Measure lebesgue(int N = 1) { return expquad(N, 0.0); }

// One-dimensional comb from (location, weight) pairs.
inline hg::Measure dirac(std::vector<std::pair<double, double>> atoms) {
  hg::DiracComb c;
  for (auto& [x, w] : atoms) c.atoms.push_back({{x}, w});
  return hg::Measure{1, std::move(c)};
}

inline hg::Measure dirac_origin(int N = 1, double w = 1.0) {
  hg::DiracComb c;
  c.atoms.push_back({hg::Point(static_cast<std::size_t>(N), 0.0), w});
  return hg::Measure{N, std::move(c)};
}

inline hg::Measure comb_on_Z(int half_width) {
  hg::DiracComb c;
  for (int k = -half_width; k <= half_width; ++k)
    c.atoms.push_back({{static_cast<double>(k)}, 1.0});
  return hg::Measure{1, std::move(c)};
}

// chi_{[-R,R]^N} as a grid density (value `level` on every cell).
inline hg::Measure box(double R = 1.0, int cells = 1, int N = 1,
                       double level = 1.0) {
  hg::GridDensity g;
  g.support_radius = R;
  g.cells_per_axis = cells;
  std::size_t total = 1;
  for (int i = 0; i < N; ++i) total *= static_cast<std::size_t>(cells);
  g.samples.assign(total, level);
  return hg::Measure{N, std::move(g)};
}

// The five canonical quarter-Gaussian data sets e^{|x|^2/4} v(|x|) with
// v = 1, (1+|x|^2)^{-1}, e^{-|x|}, e^{-|x|}(1+|x|^2)^{-1}, e^{-|x|^{3/2}}.
// Their maximal existence time is 1 and their limit behaviour at that time
// ranges from blowup everywhere to a finite limit everywhere.
inline hg::Measure growth_plain(int N = 1) { return expquad(N, 0.25); }
inline hg::Measure growth_power(int N = 1) {
  return expquad(N, 0.25, hg::ModPowerDecay{2.0});
}
inline hg::Measure growth_expdecay(int N = 1) {
  return expquad(N, 0.25, hg::ModExpDecay{1.0});
}
inline hg::Measure growth_exppower(int N = 1) {
  return expquad(N, 0.25, hg::ModExpPowerDecay{1.0, 2.0});
}
inline hg::Measure growth_stretched(int N = 1) {
  return expquad(N, 0.25, hg::ModStretchedExpDecay{1.0, 1.5});
}

// Dyadic staircase: weight 2^k on the shell around radius 2^k, so ball
// averages grow linearly in the radius (a stand-in for density |x|).
inline hg::Measure staircase(int k_max = 12) {
  hg::AnnulusSum a;
  const double r = std::sqrt(2.0);
  for (int k = 0; k <= k_max; ++k) {
    const double p = std::pow(2.0, k);
    a.terms.push_back({p, p, r});
  }
  return hg::Measure{1, std::move(a)};
}

inline hg::QuadratureConfig loose() {
  hg::QuadratureConfig cfg;
  cfg.rel_tol = 1e-7;
  cfg.abs_tol = 1e-12;
  return cfg;
}

}  // namespace th
