#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "hg/config.hpp"
#include "hg/measure.hpp"

namespace hg {

enum class Verdict { GlobalInTime, Regular, Blowup, Undetermined };

struct PointClassification {
  Verdict verdict = Verdict::Undetermined;
  double limit = 0.0;  // meaningful for Regular only
  std::vector<double> shell_ratios;
  int shells_used = 0;
};

struct ConvexSetSpec {
  struct HalfSpace {
    Point n;         // unit normal
    double c = 0.0;  // offset; the constraint is <x - x0, n> <= c (or <)
    bool strict = false;
  };
  Point x0;
  std::vector<HalfSpace> half_spaces;  // empty means the whole space
};

// Lifespan 1/(4 eps0); +inf when eps0 = 0.  Signed data rejected.
double blowup_time(const Measure& mu);

// Data factored as  mu = e^{log_scale} e^{A|y - offset|^2} v(y - offset) dy,
// with v either a radial modifier profile or a nonnegative combination of
// half-space pieces (all sharing the same A; those keep offset = 0 and carry
// their tilt themselves).  A tilted quadratic e^{A|y|^2 + b.y} is normalised
// by completing the square, which moves the centre and contributes a constant.
struct FactoredData {
  double A = 0.0;
  int dimension = 1;
  Point offset;
  double log_scale = 0.0;
  std::variant<Modifier, std::vector<std::pair<double, HalfSpacePiece>>> v;
};

// Extract the factored form from a measure; throws not_factored otherwise.
FactoredData factor_quadratic(const Measure& mu);

struct RegularSetIntegral {
  bool divergent = false;
  double value = 0.0;
  double est_error = 0.0;
  std::vector<double> shell_ratios;
  int shells_used = 0;
  bool undetermined = false;  // boundary band: neither verdict certified
};

// e^{log_scale} * I_v(x - offset) with I_v(x) = integral e^{2A<x,y>} v(y) dy,
// together with the divergence classifier deciding whether x is regular.
RegularSetIntegral regular_set_integral(const FactoredData& v, const Point& x,
                                        const QuadratureConfig& cfg = {});

// Dichotomy at the maximal time: does u(x,t) have a finite limit as t -> T?
PointClassification classify_point(const Measure& mu, const Point& x,
                                   const QuadratureConfig& cfg = {});

// Initial data whose regular set at T = 1/(4A) is exactly the prescribed
// convex intersection of half-spaces (piece weights j^{-2}).
Measure build_convex_regular_data(const ConvexSetSpec& spec, double A,
                                  int dimension);

std::vector<std::pair<Point, PointClassification>> limit_profile_at_T(
    const Measure& mu, const std::vector<Point>& probes,
    const QuadratureConfig& cfg = {});

// ||u(t_i)||_{L^1_delta} along times below T; entries may be +inf.
std::vector<double> norm_blowup_track(const Measure& mu, double delta,
                                      const std::vector<double>& times,
                                      const QuadratureConfig& cfg = {});

}  // namespace hg
