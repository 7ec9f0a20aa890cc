#pragma once

#include <functional>
#include <vector>

#include "hg/config.hpp"

namespace hg::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
};

// Adaptive Gauss-Kronrod 7-15 on [a, b].  Splits the worst panel first and
// stops when the summed error estimate meets max(rel_tol*|I|, abs_tol) or the
// node budget is exhausted (in which case the best estimate is returned; the
// caller decides whether the reported error is acceptable).
Result gk_adaptive(const std::function<double(double)>& f, double a, double b,
                   double rel_tol, double abs_tol, int max_nodes);

// Same, but the initial panels are the intervals between consecutive edges.
// Edges must be sorted; integrand kinks should appear as edges.
Result gk_panels(const std::function<double(double)>& f,
                 const std::vector<double>& edges, double rel_tol,
                 double abs_tol, int max_nodes);

// Gauss-Hermite nodes/weights for  integral e^{-z^2} g(z) dz  ==  sum w_i g(x_i).
// Orders are cached; n must be even and >= 2.
const std::vector<double>& hermite_nodes(int n);
const std::vector<double>& hermite_weights(int n);

// Gauss-Hermite with order doubling (16, 32, ... up to max_order) until two
// consecutive orders agree to tolerance.
Result hermite_adaptive(const std::function<double(double)>& g, double rel_tol,
                        double abs_tol, int max_order);

// Scaled modified Bessel function  e^{-kappa} I_0(kappa),  kappa >= 0.
double i0e(double kappa);

// Scaled spherical average of a tilt:
//   angular_tilde(N, kappa) = e^{-kappa} * integral_{S^{N-1}} e^{kappa <theta, e>} dtheta.
// Bounded by the sphere area for all kappa >= 0; N in {1, 2, 3}.
double angular_tilde(int N, double kappa);

double sphere_area(int N);  // |S^{N-1}|: 2, 2*pi, 4*pi
double ball_volume(int N);  // |B(0,1)|: 2, pi, 4*pi/3

// Half-width Z (in units of 1/sqrt(q)) such that the tail of e^{-q s^2}
// beyond |s| > Z/sqrt(q) is below tol relative to the full integral.
double gaussian_window(double tol);

}  // namespace hg::quad
