#pragma once

#include <vector>

#include "hg/config.hpp"
#include "hg/measure.hpp"

namespace hg {

enum class EvalMethod { closed_form, radial_quadrature, full_quadrature };

struct SolutionValue {
  double value = 0.0;
  double est_error = 0.0;
  EvalMethod method = EvalMethod::closed_form;
};

// u(x,t) = (4 pi t)^{-N/2} integral e^{-|x-y|^2 / 4t} d mu(y).
//
// Closed forms: DiracComb (finite kernel sum), plain exp-quadratic data
//   S(t)[e^{A|y|^2 + b.y}](x) = (1-4At)^{-N/2} exp((A|x|^2 + b.x + t|b|^2)/(1-4At)),
// grids (erf products), one-dimensional annuli (erf differences).  Everything
// else reduces to radial or factorised quadrature for N in {1,2,3}.
SolutionValue evaluate(const Measure& mu, const Point& x, double t,
                       const QuadratureConfig& cfg = {});

// Mixed derivative  d^m/dt^m  d^alpha/dx^alpha  u(x,t),  |alpha| + 2m <= 4.
SolutionValue evaluate_derivative(const Measure& mu, const Point& x, double t,
                                  const std::vector<int>& alpha, int m,
                                  const QuadratureConfig& cfg = {});

struct SandwichBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Two-sided bounds on u(x,t) from the origin trace at rescaled times:
//   b^{N/2} u(0,bt) e^{-|x|^2/(4(1-b)t)}  <=  u(x,t)  <=  a^{N/2} u(0,at) e^{|x|^2/(4(a-1)t)}
// for nonnegative data, a > 1, 0 < b < 1.
SandwichBounds sandwich_bounds(const Measure& mu, const Point& x, double t,
                               double a, double b,
                               const QuadratureConfig& cfg = {});

// (delta/pi)^{N/2} integral e^{-delta|x|^2} |u(x,t)| dx.
double l1eps_norm_of_solution(const Measure& mu, double t, double delta,
                              const QuadratureConfig& cfg = {});

// Max over probes of |S(t)mu(x) - S(t-s)[u(s) resampled to a grid](x)|.
double semigroup_residual(const Measure& mu, double s, double t,
                          const std::vector<Point>& probes,
                          const QuadratureConfig& cfg = {});

// |d_t u - Laplacian u| at one point, both sides via evaluate_derivative.
double heat_residual(const Measure& mu, const Point& x, double t,
                     const QuadratureConfig& cfg = {});

// Checks  ||S(t)mu||_q  <=  (4 pi t)^{-N/2 (1-1/q)} ||mu||_BTV  on a probe
// grid (q = +inf means sup norm).  Requires finite total variation.
bool smoothing_decay_check(const Measure& mu, double t, double q,
                           const QuadratureConfig& cfg = {});

}  // namespace hg
