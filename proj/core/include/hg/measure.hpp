#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "hg/config.hpp"
#include "hg/error.hpp"

namespace hg {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Radial modifiers v(|x|) multiplying an ExpQuadDensity.  All are bounded by 1
// and radially nonincreasing.
// ---------------------------------------------------------------------------

struct ModOne {};
struct ModPowerDecay {
  double alpha;  // v = (1+|x|^2)^{-alpha/2}, alpha > 0
};
struct ModExpDecay {
  double gamma;  // v = e^{-gamma |x|}, gamma > 0
};
struct ModStretchedExpDecay {
  double gamma;  // v = e^{-gamma |x|^alpha}, gamma > 0, alpha in (1,2)
  double alpha;
};
struct ModExpPowerDecay {
  double gamma;  // v = e^{-gamma |x|} (1+|x|^2)^{-alpha/2}
  double alpha;
};

using Modifier = std::variant<ModOne, ModPowerDecay, ModExpDecay,
                              ModStretchedExpDecay, ModExpPowerDecay>;

// ---------------------------------------------------------------------------
// Measure bodies.
// ---------------------------------------------------------------------------

struct DiracComb {
  struct Atom {
    Point location;
    double weight;  // signed
  };
  std::vector<Atom> atoms;
};

// Density  e^{A|x-center|^2 + b.(x-center)} * v(|x-center|).
// center defaults to the origin; it exists so that translates of the family
// stay inside the family.
struct ExpQuadDensity {
  double A = 0.0;
  Point b;  // empty means zero tilt
  Modifier modifier = ModOne{};
  Point center;  // empty means origin
};

// Density  sum_j b_j on the annulus { lambda_j / r_j < |x| < lambda_j r_j }.
struct AnnulusSum {
  struct Term {
    double b;       // >= 0
    double lambda;  // > 0, strictly increasing across terms
    double r;       // > 1
  };
  std::vector<Term> terms;
};

// One half-space building block for prescribed regular sets.  With
// s = <x, n> and x' = x - s n, the density is
//   e^{A|x|^2} e^{-2A<x0, x>} [s > 0] chi(|x'| <= 1)
//     * (strict ? 1 : 1/(1+s^2)) * e^{-2Ac s}.
// Its blowup set at the maximal time 1/(4A) is the complement of
// { x : <x - x0, n> <= c }   (strict "<" when strict is set).
struct HalfSpacePiece {
  Point n;             // unit vector
  double c = 0.0;      // >= 0; strict requires c > 0
  bool strict = false;
  double A = 0.0;      // > 0
  Point x0;            // empty means origin
};

// Piecewise-constant density on the box [-R, R]^N split into cells_per_axis
// equal cells per axis.  samples holds cells_per_axis^N values, row-major with
// the first axis slowest.
struct GridDensity {
  double support_radius = 0.0;
  int cells_per_axis = 0;
  std::vector<double> samples;
};

struct Measure;

struct Sum {
  // Components sit behind shared_ptr so Measure stays cheaply copyable.
  std::vector<std::pair<double, std::shared_ptr<const Measure>>> components;
};

using Body = std::variant<DiracComb, ExpQuadDensity, AnnulusSum, HalfSpacePiece,
                          GridDensity, Sum>;

struct Measure {
  int dimension = 1;
  Body body;
};

// Builders. make_sum flattens nested sums and folds coefficients into leaf
// weights where the leaf representation allows it.
Measure make_sum(int dimension,
                 std::vector<std::pair<double, Measure>> components);
Measure scaled(double coefficient, Measure mu);

// Structural validation; throws hg::error on any violated invariant.
void validate(const Measure& mu);

// ---------------------------------------------------------------------------
// Growth index.
// ---------------------------------------------------------------------------

enum class Attainment { yes, no, unknown };
enum class GrowthIndexSource { analytic, estimated };

struct GrowthIndex {
  double eps0 = 0.0;  // optimal index; 0 means "in every class"
  Attainment attained = Attainment::yes;
  GrowthIndexSource source = GrowthIndexSource::analytic;
};

enum class SignStatus { nonnegative, mixed };

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// Gaussian-weighted total mass  (eps/pi)^{N/2} * integral e^{-eps|y|^2} d|mu|(y).
// Finite iff eps exceeds (or attains) the optimal index.  May return +inf.
double meps_norm(const Measure& mu, double eps,
                 const QuadratureConfig& cfg = {});

GrowthIndex growth_index(const Measure& mu);

// Shell-mass estimator: |mu| is weighed on dyadic shells {2^k <= |y| < 2^{k+1}}
// for k < k_max and the growth rate is read off a least-squares slope in the
// squared outer radius.  Attainment is not decided on this path.
GrowthIndex estimate_growth_index(const Measure& mu, int k_max,
                                  const QuadratureConfig& cfg = {});

// Pushforward under x -> x + y.  Families that cannot represent their
// translate raise unsupported_restriction (translation by zero always works).
Measure translate(const Measure& mu, const Point& y);

// Parabolic dilation  mu_lambda(E) = lambda^{-N} mu(lambda E),  lambda > 0.
Measure dilate(const Measure& mu, double lambda);

// sup over closed unit balls of |mu|(B(x,1)); +inf when unbounded.
double uniform_norm(const Measure& mu, const QuadratureConfig& cfg = {});

// |mu|(closed ball B(centre, radius)).  Exact for atoms/grids/annuli, a short
// radial quadrature otherwise.
double ball_mass(const Measure& mu, const Point& centre, double radius,
                 const QuadratureConfig& cfg = {});

// Total variation |mu|(R^N); +inf when the measure is not finite.
double btv_norm(const Measure& mu, const QuadratureConfig& cfg = {});

SignStatus sign_status(const Measure& mu);

// Structural absolute value.  Defined for every family (densities are
// per-cell / per-atom signed only).
Measure abs_measure(const Measure& mu);

// Lifespan 1/(4 eps0) of the associated solution; +inf when eps0 = 0.
double maximal_time(const Measure& mu);

}  // namespace hg
