#pragma once

// Internal numerical engine shared by the measure / kernel / blowup modules.
// Not installed.

#include <vector>

#include "hg/measure.hpp"
#include "hg/quadrature.hpp"

namespace hg::detail {

enum class Method { closed_form, radial_quadrature, full_quadrature };

struct ConvResult {
  double value = 0.0;
  double error = 0.0;
  Method method = Method::closed_form;
};

// Core primitive:  e^{log_tilt} * integral of e^{-q|x-y|^2} d mu(y)  (d|mu|
// when absolute).  q must be positive.  If q does not dominate the quadratic
// growth of mu the result is +inf (the integral genuinely diverges);
// time-window policy is the caller's business.  The tilt is folded into the
// internal exponentials, so weighted values stay representable even when the
// untilted integral would overflow the double range.
ConvResult gaussian_convolution(const Measure& mu, const Point& x, double q,
                                bool absolute, const QuadratureConfig& cfg,
                                double log_tilt = 0.0);

// Critical-boundary radial integral
//   integral_0^inf e^{A r^2 + B r} S~_N(B r) m(r) r^{N-1} dr,   A <= 0, B >= 0,
// where S~_N is the scaled spherical tilt average.  This is the surviving
// integral at an attained growth index (and the regular-set integral after the
// quadratic part is factored).  Convergence is decided analytically from the
// modifier's decay against B; divergent cases return +inf.  err_out (optional)
// receives the quadrature error estimate.
double radial_mass_integral(int N, double A, double B, const Modifier& m,
                            const QuadratureConfig& cfg,
                            double* err_out = nullptr);

// Modifier helpers.
double modifier_value(const Modifier& m, double r);
double modifier_log(const Modifier& m, double r);
// Linear decay rate gamma of the modifier (0 when none); stretched decay with
// gamma > 0 reports +inf (beats every linear rate), gamma < 0 reports -inf.
double modifier_linear_rate(const Modifier& m);
double modifier_power(const Modifier& m);  // power-tail exponent alpha (0 if none)

// log |mu|({ a <= |y| < b }) computed stably for exponentially large masses.
// Returns -inf for empty shells.
double shell_log_mass(const Measure& mu, double a, double b,
                      const QuadratureConfig& cfg);

// Signed pointwise density of mu at y, for families that have one (ExpQuad,
// AnnulusSum, HalfSpacePiece, GridDensity, Sum of those).  Atoms are not
// densities; DiracComb raises not_factored.
double density_value(const Measure& mu, const Point& y);
bool has_density(const Measure& mu);

}  // namespace hg::detail
