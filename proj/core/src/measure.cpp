#include "hg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include "hg/quadrature.hpp"
#include "radial.hpp"

namespace hg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double get(const Point& p, std::size_t i) { return i < p.size() ? p[i] : 0.0; }

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i)
    s += get(a, i) * get(b, i);
  return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

Point materialize(const Point& p, int N) {
  Point out(static_cast<std::size_t>(N), 0.0);
  for (std::size_t i = 0; i < p.size() && i < out.size(); ++i) out[i] = p[i];
  return out;
}

void check_point(const Point& p, int N, const char* what) {
  if (!p.empty() && p.size() != static_cast<std::size_t>(N))
    fail(errc::dimension_mismatch, std::string(what) + ": point dimension mismatch");
  for (double v : p)
    if (!std::isfinite(v))
      fail(errc::validation_error, std::string(what) + ": non-finite coordinate");
}

bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Modifier helpers.
// ---------------------------------------------------------------------------

namespace detail {

double modifier_value(const Modifier& m, double r) {
  return std::exp(modifier_log(m, r));
}

double modifier_log(const Modifier& m, double r) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ModOne>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, ModPowerDecay>) {
          return -0.5 * v.alpha * std::log1p(r * r);
        } else if constexpr (std::is_same_v<T, ModExpDecay>) {
          return -v.gamma * r;
        } else if constexpr (std::is_same_v<T, ModStretchedExpDecay>) {
          return -v.gamma * std::pow(r, v.alpha);
        } else {
          return -v.gamma * r - 0.5 * v.alpha * std::log1p(r * r);
        }
      },
      m);
}

double modifier_linear_rate(const Modifier& m) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ModExpDecay>) {
          return v.gamma;
        } else if constexpr (std::is_same_v<T, ModExpPowerDecay>) {
          return v.gamma;
        } else if constexpr (std::is_same_v<T, ModStretchedExpDecay>) {
          return v.gamma > 0 ? kInf : -kInf;
        } else {
          return 0.0;
        }
      },
      m);
}

double modifier_power(const Modifier& m) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ModPowerDecay>) {
          return v.alpha;
        } else if constexpr (std::is_same_v<T, ModExpPowerDecay>) {
          return v.alpha;
        } else {
          return 0.0;
        }
      },
      m);
}

// integral_0^inf e^{A r^2 + B r} * S~_N(B r) * v(r) * r^{N-1} dr  with A <= 0,
// B >= 0.  Finite iff the decay of v beats the net linear rate; +inf otherwise.
double radial_mass_integral(int N, double A, double B, const Modifier& m,
                            const QuadratureConfig& cfg, double* err_out) {
  if (err_out) *err_out = 0.0;
  const double gamma = modifier_linear_rate(m);
  const double alpha = modifier_power(m);
  if (A >= 0.0) {
    if (A > 0.0) return kInf;
    // A == 0: linear-rate comparison decides convergence.
    if (gamma < B) return kInf;
    if (gamma == B) {
      const double need = (B > 0.0) ? 0.5 * (N + 1) : static_cast<double>(N);
      if (!(alpha > need)) return kInf;
    }
  }

  auto logf = [&](double r) -> double {
    if (r <= 0.0) return (N == 1) ? modifier_log(m, 0.0) : -kInf;
    return A * r * r + B * r + std::log(quad::angular_tilde(N, B * r)) +
           modifier_log(m, r) + (N - 1) * std::log(r);
  };
  auto f = [&](double r) -> double {
    if (r < 0.0) return 0.0;
    const double lf = logf(r);
    return lf > -700.0 ? std::exp(lf) : 0.0;
  };

  // Peak value (for relative windowing): probe a geometric grid.
  double peak_log = logf(0.0);
  for (double r = 1.0 / 1024.0; r <= 1048576.0; r *= 2.0)
    peak_log = std::max(peak_log, logf(r));

  const double target = peak_log + std::log(std::max(cfg.abs_tol, 1e-300)) - 9.0;
  double R = 1.0;
  while (logf(R) > target && R < 1e8) R *= 2.0;
  R *= cfg.tail_safety;

  auto q = quad::gk_panels(f, {0.0, std::min(1.0, R), std::min(16.0, R), R},
                           cfg.rel_tol, cfg.abs_tol, cfg.max_nodes_per_axis);

  // Analytic tail beyond R.
  double tail = 0.0, tail_err = 0.0;
  const double fR = f(R);
  if (fR > 0.0) {
    if (A < 0.0) {
      tail = fR / (2.0 * (-A) * R);  // e^{A r^2} tail, first order
      tail_err = tail;
    } else if (gamma > B && std::isfinite(gamma)) {
      tail = fR / (gamma - B);
      tail_err = tail * 0.01;
    } else if (!std::isfinite(gamma)) {
      const auto& st = std::get<ModStretchedExpDecay>(m);
      const double rate = st.gamma * st.alpha * std::pow(R, st.alpha - 1.0) - B;
      tail = fR / std::max(rate, 1e-300);
      tail_err = tail * 0.1;
    } else {
      // Pure power tail ~ r^{-s}: s = alpha - (N-1)/2 for B > 0, alpha - (N-1)
      // for B = 0; both exceed 1 in the convergent cases handled here.
      const double s = (B > 0.0) ? alpha - 0.5 * (N - 1) : alpha - (N - 1.0);
      tail = fR * R / (s - 1.0);
      tail_err = tail * (s + 2.0) / R;
    }
  }
  if (err_out) *err_out = q.error + tail_err;
  return q.value + tail;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction and validation.
// ---------------------------------------------------------------------------

Measure make_sum(int dimension,
                 std::vector<std::pair<double, Measure>> components) {
  std::vector<std::pair<double, std::shared_ptr<const Measure>>> flat;

  auto add = [&](auto&& self, double coeff, Measure m) -> void {
    if (coeff == 0.0) return;
    if (m.dimension != dimension)
      fail(errc::dimension_mismatch, "sum component dimension mismatch");
    if (auto* s = std::get_if<Sum>(&m.body)) {
      for (auto& [c, sub] : s->components) self(self, coeff * c, Measure(*sub));
      return;
    }
    // Fold signed coefficients into leaves that carry signed weights.
    if (auto* d = std::get_if<DiracComb>(&m.body)) {
      for (auto& a : d->atoms) a.weight *= coeff;
      coeff = 1.0;
    } else if (auto* g = std::get_if<GridDensity>(&m.body)) {
      for (auto& s2 : g->samples) s2 *= coeff;
      coeff = 1.0;
    } else if (auto* an = std::get_if<AnnulusSum>(&m.body)) {
      if (coeff > 0.0) {
        for (auto& t : an->terms) t.b *= coeff;
        coeff = 1.0;
      }
    }
    flat.emplace_back(coeff, std::make_shared<const Measure>(std::move(m)));
  };
  for (auto& [c, m] : components) add(add, c, std::move(m));

  if (flat.empty()) return Measure{dimension, DiracComb{}};
  if (flat.size() == 1 && flat[0].first == 1.0) return Measure(*flat[0].second);
  Measure out{dimension, Sum{std::move(flat)}};
  return out;
}

Measure scaled(double coefficient, Measure mu) {
  const int N = mu.dimension;
  std::vector<std::pair<double, Measure>> comps;
  comps.emplace_back(coefficient, std::move(mu));
  return make_sum(N, std::move(comps));
}

void validate(const Measure& mu) {
  const int N = mu.dimension;
  if (N < 1) fail(errc::validation_error, "dimension must be >= 1");

  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          for (const auto& a : body.atoms) {
            check_point(a.location, N, "DiracComb atom");
            if (!std::isfinite(a.weight))
              fail(errc::validation_error, "DiracComb: non-finite weight");
          }
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          if (!std::isfinite(body.A))
            fail(errc::validation_error, "ExpQuadDensity: non-finite A");
          check_point(body.b, N, "ExpQuadDensity tilt");
          check_point(body.center, N, "ExpQuadDensity center");
          std::visit(
              [&](const auto& v) {
                using M = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<M, ModPowerDecay>) {
                  if (!(v.alpha > 0.0))
                    fail(errc::validation_error, "PowerDecay needs alpha > 0");
                } else if constexpr (std::is_same_v<M, ModExpDecay>) {
                  if (!(v.gamma > 0.0))
                    fail(errc::validation_error, "ExpDecay needs gamma > 0");
                } else if constexpr (std::is_same_v<M, ModStretchedExpDecay>) {
                  if (v.gamma == 0.0 || !std::isfinite(v.gamma))
                    fail(errc::validation_error,
                         "StretchedExpDecay needs nonzero gamma");
                  if (!(v.alpha > 1.0 && v.alpha < 2.0))
                    fail(errc::validation_error,
                         "StretchedExpDecay needs alpha in (1,2)");
                } else if constexpr (std::is_same_v<M, ModExpPowerDecay>) {
                  if (!(v.gamma > 0.0) || !(v.alpha > 0.0))
                    fail(errc::validation_error,
                         "ExpPowerDecay needs gamma > 0 and alpha > 0");
                }
              },
              body.modifier);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          double prev_outer = 0.0, prev_lambda = 0.0;
          for (const auto& t : body.terms) {
            if (!(t.b >= 0.0) || !std::isfinite(t.b))
              fail(errc::validation_error, "AnnulusSum needs b_j >= 0");
            if (!(t.lambda > 0.0))
              fail(errc::validation_error, "AnnulusSum needs lambda_j > 0");
            if (!(t.r > 1.0))
              fail(errc::validation_error, "AnnulusSum needs r_j > 1");
            if (!(t.lambda > prev_lambda))
              fail(errc::validation_error,
                   "AnnulusSum needs strictly increasing lambda_j");
            if (t.lambda / t.r < prev_outer * (1.0 - 1e-12))
              fail(errc::validation_error, "AnnulusSum annuli must be disjoint");
            prev_outer = t.lambda * t.r;
            prev_lambda = t.lambda;
          }
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          check_point(body.n, N, "HalfSpacePiece normal");
          if (!near(norm(body.n), 1.0, 1e-9))
            fail(errc::validation_error, "HalfSpacePiece normal must be a unit vector");
          if (!(body.c >= 0.0))
            fail(errc::validation_error, "HalfSpacePiece needs c >= 0");
          if (body.strict && !(body.c > 0.0))
            fail(errc::validation_error, "strict HalfSpacePiece needs c > 0");
          if (!(body.A > 0.0))
            fail(errc::validation_error, "HalfSpacePiece needs A > 0");
          check_point(body.x0, N, "HalfSpacePiece x0");
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          if (!(body.support_radius > 0.0))
            fail(errc::validation_error, "GridDensity needs a positive radius");
          if (body.cells_per_axis < 1)
            fail(errc::validation_error, "GridDensity needs at least one cell");
          if (body.samples.size() !=
              ipow(static_cast<std::size_t>(body.cells_per_axis), N))
            fail(errc::validation_error, "GridDensity sample count mismatch");
          for (double s : body.samples)
            if (!std::isfinite(s))
              fail(errc::validation_error, "GridDensity: non-finite sample");
        } else {  // Sum
          for (const auto& [c, sub] : body.components) {
            if (!std::isfinite(c))
              fail(errc::validation_error, "Sum: non-finite coefficient");
            if (sub->dimension != N)
              fail(errc::dimension_mismatch, "Sum component dimension mismatch");
            validate(*sub);
          }
        }
      },
      mu.body);
}

// ---------------------------------------------------------------------------
// Sign structure.
// ---------------------------------------------------------------------------

SignStatus sign_status(const Measure& mu) {
  return std::visit(
      [&](const auto& body) -> SignStatus {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          for (const auto& a : body.atoms)
            if (a.weight < 0.0) return SignStatus::mixed;
          return SignStatus::nonnegative;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          for (double s : body.samples)
            if (s < 0.0) return SignStatus::mixed;
          return SignStatus::nonnegative;
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& [c, sub] : body.components) {
            if (c < 0.0) return SignStatus::mixed;
            if (sign_status(*sub) == SignStatus::mixed) return SignStatus::mixed;
          }
          return SignStatus::nonnegative;
        } else {
          return SignStatus::nonnegative;
        }
      },
      mu.body);
}

Measure abs_measure(const Measure& mu) {
  Measure out = mu;
  std::visit(
      [&](auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          // Merge coincident atoms first so cancellation is honoured exactly.
          std::map<Point, double> merged;
          for (const auto& a : body.atoms) merged[a.location] += a.weight;
          body.atoms.clear();
          for (auto& [loc, w] : merged)
            if (w != 0.0) body.atoms.push_back({loc, std::abs(w)});
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          for (double& s : body.samples) s = std::abs(s);
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (auto& [c, sub] : body.components) {
            c = std::abs(c);
            sub = std::make_shared<const Measure>(abs_measure(*sub));
          }
        }
      },
      out.body);
  return out;
}

// ---------------------------------------------------------------------------
// Growth index.
// ---------------------------------------------------------------------------

namespace {

// Attainment of the optimal index for an exp-quadratic density: at eps = A the
// surviving integrand is e^{b_eff . y} v(|y|) with b_eff = b - 2 A center.
Attainment expquad_attained(int N, double A, double b_eff, const Modifier& m) {
  if (A < 0.0) return Attainment::yes;
  const double gamma = detail::modifier_linear_rate(m);
  const double alpha = detail::modifier_power(m);
  if (gamma > b_eff) return Attainment::yes;   // covers stretched decay (+inf)
  if (gamma < b_eff) return Attainment::no;    // covers stretched growth (-inf)
  const double need = (b_eff > 0.0) ? 0.5 * (N + 1) : static_cast<double>(N);
  return alpha > need ? Attainment::yes : Attainment::no;
}

}  // namespace

GrowthIndex growth_index(const Measure& mu) {
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> GrowthIndex {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          return {0.0, Attainment::yes, GrowthIndexSource::analytic};
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          const double eps0 = std::max(body.A, 0.0);
          Point beff = materialize(body.b, N);
          const Point c = materialize(body.center, N);
          for (int i = 0; i < N; ++i) beff[i] -= 2.0 * body.A * c[i];
          Attainment att = expquad_attained(N, body.A, norm(beff), body.modifier);
          if (eps0 == 0.0 && att == Attainment::no) {
            // Still the correct index; membership at 0 simply fails, but the
            // reporting convention pins attained := yes when eps0 = 0.
            att = Attainment::yes;
          }
          return {eps0, att, GrowthIndexSource::analytic};
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          return {0.0, Attainment::yes, GrowthIndexSource::analytic};
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          const Point x0 = materialize(body.x0, N);
          const double eta_eff =
              2.0 * body.A * (body.c + dot(x0, materialize(body.n, N)));
          const bool att =
              eta_eff > 0.0 || (eta_eff == 0.0 && !body.strict);
          return {body.A, att ? Attainment::yes : Attainment::no,
                  GrowthIndexSource::analytic};
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          return {0.0, Attainment::yes, GrowthIndexSource::analytic};
        } else {  // Sum
          double eps0 = 0.0;
          for (const auto& [c, sub] : body.components)
            eps0 = std::max(eps0, growth_index(*sub).eps0);
          Attainment att = Attainment::yes;
          if (eps0 > 0.0) {
            for (const auto& [c, sub] : body.components) {
              GrowthIndex g = growth_index(*sub);
              if (g.eps0 >= eps0 * (1.0 - 1e-12) && g.attained == Attainment::no)
                att = Attainment::no;  // conservative: no cancellation credit
            }
          }
          return {eps0, att, GrowthIndexSource::analytic};
        }
      },
      mu.body);
}

double maximal_time(const Measure& mu) {
  const double eps0 = growth_index(mu).eps0;
  return eps0 > 0.0 ? 1.0 / (4.0 * eps0) : kInf;
}

// ---------------------------------------------------------------------------
// meps_norm.
// ---------------------------------------------------------------------------

namespace {

// |mu|(R^N) weighted by e^{-eps0 |y|^2} in the attained boundary case.
double critical_mass(const Measure& mu, double eps, const QuadratureConfig& cfg);

double critical_mass_expquad(int N, const ExpQuadDensity& d, double eps,
                             const QuadratureConfig& cfg) {
  // integral e^{-eps|y|^2} e^{A|y-c|^2 + b.(y-c)} v(|y-c|) dy,  eps >= max(A,0).
  // Substituting z = y - c:
  //   e^{-eps|c|^2} integral e^{(A-eps)|z|^2 + (b - 2 eps c).z} v(|z|) dz,
  // so for eps = A the quadratic part cancels and only the tilt survives;
  // inside sums, components with A < eps keep genuine quadratic decay.
  const Point c = materialize(d.center, N);
  Point beff = materialize(d.b, N);
  for (int i = 0; i < N; ++i) beff[i] -= 2.0 * eps * c[i];
  const double B = norm(beff);
  const double Aeff = d.A - eps;
  const double pref = std::exp(-eps * dot(c, c));
  double err = 0.0;
  const double val =
      detail::radial_mass_integral(N, Aeff, B, d.modifier, cfg, &err);
  return pref * val;
}

double critical_mass(const Measure& mu, double eps,
                     const QuadratureConfig& cfg) {
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> double {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          double s = 0.0;
          for (const auto& a : body.atoms)
            s += std::abs(a.weight) *
                 std::exp(-eps * dot(a.location, a.location));
          return s;
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          return critical_mass_expquad(N, body, eps, cfg);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          // Bounded support; integrate the staircase exactly in the radial
          // variable against e^{-eps r^2}.
          double s = 0.0, err = 0.0;
          for (const auto& t : body.terms) {
            const double lo = t.lambda / t.r, hi = t.lambda * t.r;
            auto f = [&](double r) {
              return std::exp(-eps * r * r) * std::pow(r, N - 1);
            };
            auto q = quad::gk_adaptive(f, lo, hi, cfg.rel_tol, cfg.abs_tol,
                                       cfg.max_nodes_per_axis);
            s += t.b * quad::sphere_area(N) * q.value;
            err += t.b * quad::sphere_area(N) * q.error;
          }
          return s;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          // e^{-A|y|^2} * density factorises along n: a 1-D profile integral
          // times an integral over the unit ball of the perpendicular slice.
          const Point n = materialize(body.n, N);
          const Point x0 = materialize(body.x0, N);
          const double x0n = dot(x0, n);
          double x0perp = std::sqrt(std::max(0.0, dot(x0, x0) - x0n * x0n));
          const double eta_eff = 2.0 * body.A * (body.c + x0n);
          // Residual quadratic decay when this piece is weighted by a sum
          // index above its own rate.
          const double aq = body.A - eps;  // <= 0
          auto axis = [&](double s) {
            const double phi = body.strict ? 1.0 : 1.0 / (1.0 + s * s);
            return std::exp(aq * s * s - eta_eff * s) * phi;
          };
          double R = 1.0;
          if (aq < 0.0) {
            const double speak = std::max(0.0, -eta_eff / (-2.0 * aq));
            R = (speak + std::sqrt(50.0 / -aq)) * cfg.tail_safety;
          } else if (eta_eff > 0.0) {
            R = (50.0 / eta_eff) * cfg.tail_safety;
          } else if (body.strict) {
            return kInf;  // constant tail; unreachable past the attainment gate
          } else {
            R = 4e4;  // phi tail ~ pi/2 - atan(R)
          }
          auto qa = quad::gk_panels(axis, {0.0, std::min(1.0, R), R},
                                    cfg.rel_tol, cfg.abs_tol,
                                    cfg.max_nodes_per_axis);
          double axis_val = qa.value;
          if (!body.strict && eta_eff == 0.0 && aq == 0.0)
            axis_val += std::numbers::pi / 2.0 - std::atan(R);
          double perp = 1.0;
          if (N == 2) {
            auto f = [&](double u) {
              return std::exp(aq * u * u - 2.0 * body.A * x0perp * u);
            };
            perp = quad::gk_adaptive(f, -1.0, 1.0, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis).value;
          } else if (N == 3) {
            auto f = [&](double rho) {
              const double kap = 2.0 * body.A * x0perp * rho;
              return 2.0 * std::numbers::pi * rho * quad::i0e(kap) *
                     std::exp(aq * rho * rho + kap);
            };
            perp = quad::gk_adaptive(f, 0.0, 1.0, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis).value;
          }
          return axis_val * perp;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          // Midpoint rule per cell; only reachable through sums whose growth
          // comes from another component, so this accuracy is ample.
          const int n = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / n;
          double s = 0.0;
          const std::size_t total = body.samples.size();
          std::vector<int> idx(N, 0);
          for (std::size_t flat = 0; flat < total; ++flat) {
            double w = 1.0;
            for (int d2 = 0; d2 < N; ++d2) {
              const double a = -body.support_radius + idx[d2] * h;
              const double mid = a + 0.5 * h;
              w *= std::exp(-eps * mid * mid) * h;
            }
            s += std::abs(body.samples[flat]) * w;
            for (int d2 = N - 1; d2 >= 0; --d2) {
              if (++idx[d2] < n) break;
              idx[d2] = 0;
            }
          }
          return s;
        } else {  // Sum
          double s = 0.0;
          for (const auto& [c, sub] : body.components)
            s += std::abs(c) * critical_mass(*sub, eps, cfg);
          return s;
        }
      },
      mu.body);
}

}  // namespace

double meps_norm(const Measure& mu, double eps, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(eps > 0.0)) fail(errc::validation_error, "meps_norm needs eps > 0");
  const int N = mu.dimension;
  const GrowthIndex g = growth_index(mu);
  const double pref = std::pow(eps / std::numbers::pi, 0.5 * N);

  if (eps < g.eps0 * (1.0 - 1e-13)) return kInf;
  if (eps <= g.eps0 * (1.0 + 1e-13)) {
    if (g.attained != Attainment::yes) return kInf;
    return pref * critical_mass(mu, g.eps0, cfg);
  }
  auto conv =
      detail::gaussian_convolution(mu, Point(), eps, /*absolute=*/true, cfg);
  return pref * conv.value;
}

// ---------------------------------------------------------------------------
// Shell masses and the growth-index estimator.
// ---------------------------------------------------------------------------

namespace detail {

namespace {

double logsumexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// The normalized integrand exp(lbar - emax) of a growing shell lives in a
// boundary layer that can be many orders thinner than [a, b]; plain adaptive
// bisection starting from the full interval underflows everywhere before it
// finds the layer.  Seed panels geometrically toward the maximizer instead so
// refinement starts at every scale at once.
quad::Result layer_integral(const std::function<double(double)>& f, double a,
                            double b, double peak, int max_nodes) {
  std::vector<double> edges{a, b};
  const double span = b - a;
  for (double w = span * 0.5; w > span * 1e-13; w *= 0.5) {
    if (peak - w > a) edges.push_back(peak - w);
    if (peak + w < b) edges.push_back(peak + w);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return quad::gk_panels(f, edges, 1e-10, 1e-30, max_nodes);
}

}  // namespace

double shell_log_mass(const Measure& mu, double a, double b,
                      const QuadratureConfig& cfg) {
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> double {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          double s = 0.0;
          for (const auto& at : body.atoms) {
            const double r = norm(at.location);
            if (r >= a && r < b) s += std::abs(at.weight);
          }
          return s > 0.0 ? std::log(s) : -kInf;
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          // Work with log densities; mass on a dyadic shell of e^{A r^2}-type
          // data overflows double well before the estimator is done.  The
          // center shift inside the modifier argument is neglected here (its
          // relative effect on a shell vanishes as the shells grow).
          const Point c = materialize(body.center, N);
          Point beff = materialize(body.b, N);
          for (int i = 0; i < N; ++i) beff[i] -= 2.0 * body.A * c[i];
          const double B = norm(beff);
          const double c0 = body.A * dot(c, c) - dot(materialize(body.b, N), c);
          auto lbar = [&](double r) {
            return body.A * r * r + B * r + modifier_log(body.modifier, r);
          };
          double peak = lbar(a) >= lbar(b) ? a : b;
          if (body.A < 0.0) {
            const double vertex = B / (-2.0 * body.A);
            if (vertex > a && vertex < b && lbar(vertex) > lbar(peak))
              peak = vertex;
          }
          const double emax = lbar(peak);
          auto f = [&](double r) {
            return std::exp(lbar(r) - emax) * quad::angular_tilde(N, B * r) *
                   std::pow(r, N - 1);
          };
          auto q = layer_integral(f, a, b, peak, cfg.max_nodes_per_axis);
          if (!(q.value > 0.0)) return -kInf;
          return c0 + emax + std::log(q.value);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          double s = 0.0;
          const double vn = quad::ball_volume(N);
          for (const auto& t : body.terms) {
            const double lo = std::max(a, t.lambda / t.r);
            const double hi = std::min(b, t.lambda * t.r);
            if (hi > lo)
              s += t.b * vn * (std::pow(hi, N) - std::pow(lo, N));
          }
          return s > 0.0 ? std::log(s) : -kInf;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          // Factorised tube estimate: the perpendicular factor is constant,
          // the shell constraint is applied to the axis coordinate.
          const Point n = materialize(body.n, N);
          const Point x0 = materialize(body.x0, N);
          const double eta_eff = 2.0 * body.A * (body.c + dot(x0, n));
          auto lbar = [&](double s) -> double {
            const double lphi = body.strict ? 0.0 : -std::log1p(s * s);
            return body.A * s * s - eta_eff * s + lphi;
          };
          const double lo = std::max(a, 0.0);
          if (b <= lo) return -kInf;
          const double peak = lbar(lo) >= lbar(b) ? lo : b;
          const double emax = lbar(peak);
          auto f = [&](double s) { return std::exp(lbar(s) - emax); };
          auto q = layer_integral(f, lo, b, peak, cfg.max_nodes_per_axis);
          if (!(q.value > 0.0)) return -kInf;
          const double perp =
              (N == 1) ? 1.0 : quad::ball_volume(N - 1) * std::exp(std::abs(body.A));
          return emax + std::log(q.value) + std::log(perp);
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          const int nc = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / nc;
          double s = 0.0;
          std::vector<int> idx(N, 0);
          for (std::size_t flat = 0; flat < body.samples.size(); ++flat) {
            double r2 = 0.0, vol = 1.0;
            for (int d2 = 0; d2 < N; ++d2) {
              const double mid =
                  -body.support_radius + (idx[d2] + 0.5) * h;
              r2 += mid * mid;
              vol *= h;
            }
            const double r = std::sqrt(r2);
            if (r >= a && r < b) s += std::abs(body.samples[flat]) * vol;
            for (int d2 = N - 1; d2 >= 0; --d2) {
              if (++idx[d2] < nc) break;
              idx[d2] = 0;
            }
          }
          return s > 0.0 ? std::log(s) : -kInf;
        } else {  // Sum
          double acc = -kInf;
          for (const auto& [c, sub] : body.components) {
            if (c == 0.0) continue;
            acc = logsumexp(acc, std::log(std::abs(c)) +
                                     shell_log_mass(*sub, a, b, cfg));
          }
          return acc;
        }
      },
      mu.body);
}

}  // namespace detail

GrowthIndex estimate_growth_index(const Measure& mu, int k_max,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  if (k_max < 1) fail(errc::validation_error, "estimate_growth_index needs k_max >= 1");

  // Dyadic shell masses 2^k <= |y| < 2^{k+1}, k = 0 .. k_max-1.
  std::vector<std::pair<double, double>> pts;  // (outer radius squared, log mass)
  for (int k = 0; k < k_max; ++k) {
    const double a = std::ldexp(1.0, k), b = std::ldexp(1.0, k + 1);
    const double lm = detail::shell_log_mass(mu, a, b, cfg);
    if (std::isfinite(lm)) pts.emplace_back(b * b, lm);
    else pts.clear();  // only trailing non-empty shells carry growth signal
  }

  GrowthIndex out{0.0, Attainment::unknown, GrowthIndexSource::estimated};
  if (pts.size() < 2) {
    out.eps0 = 0.0;
    out.attained = Attainment::yes;  // eps0 = 0 reporting convention
    return out;
  }
  // Least-squares slope of log mass against the squared outer radius, over the
  // last three usable shells: mass concentrates at the outer edge, so this
  // abscissa makes the slope converge to the growth rate itself.
  const std::size_t use = std::min<std::size_t>(3, pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = pts.size() - use; i < pts.size(); ++i) {
    sx += pts[i].first;
    sy += pts[i].second;
    sxx += pts[i].first * pts[i].first;
    sxy += pts[i].first * pts[i].second;
  }
  const double nuse = static_cast<double>(use);
  const double slope = (nuse * sxy - sx * sy) / (nuse * sxx - sx * sx);
  out.eps0 = std::max(slope, 0.0);
  if (out.eps0 == 0.0) out.attained = Attainment::yes;
  return out;
}

// ---------------------------------------------------------------------------
// Translation and dilation.
// ---------------------------------------------------------------------------

Measure translate(const Measure& mu, const Point& y) {
  const int N = mu.dimension;
  check_point(y, N, "translate");
  const Point yy = materialize(y, N);
  const bool zero = std::all_of(yy.begin(), yy.end(),
                                [](double v) { return v == 0.0; });

  Measure out = mu;
  std::visit(
      [&](auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          for (auto& a : body.atoms) {
            Point loc = materialize(a.location, N);
            for (int i = 0; i < N; ++i) loc[i] += yy[i];
            a.location = std::move(loc);
          }
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          Point c = materialize(body.center, N);
          for (int i = 0; i < N; ++i) c[i] += yy[i];
          body.center = std::move(c);
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (auto& [c, sub] : body.components)
            sub = std::make_shared<const Measure>(translate(*sub, y));
        } else {
          if (!zero)
            fail(errc::unsupported_restriction,
                 "family is not closed under translation");
        }
      },
      out.body);
  return out;
}

Measure dilate(const Measure& mu, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(errc::validation_error, "dilate needs lambda > 0");
  const int N = mu.dimension;

  Measure out = mu;
  std::visit(
      [&](auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          const double w = std::pow(lambda, -N);
          for (auto& a : body.atoms) {
            Point loc = materialize(a.location, N);
            for (int i = 0; i < N; ++i) loc[i] /= lambda;
            a.location = std::move(loc);
            a.weight *= w;
          }
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          body.A *= lambda * lambda;
          Point b = materialize(body.b, N);
          for (int i = 0; i < N; ++i) b[i] *= lambda;
          body.b = std::move(b);
          Point c = materialize(body.center, N);
          for (int i = 0; i < N; ++i) c[i] /= lambda;
          body.center = std::move(c);
          std::visit(
              [&](auto& v) {
                using M = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<M, ModExpDecay>) {
                  v.gamma *= lambda;
                } else if constexpr (std::is_same_v<M, ModStretchedExpDecay>) {
                  v.gamma *= std::pow(lambda, v.alpha);
                } else if constexpr (!std::is_same_v<M, ModOne>) {
                  fail(errc::unsupported_restriction,
                       "modifier family is not closed under dilation");
                }
              },
              body.modifier);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          for (auto& t : body.terms) t.lambda /= lambda;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          body.support_radius /= lambda;
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (auto& [c, sub] : body.components)
            sub = std::make_shared<const Measure>(dilate(*sub, lambda));
        } else {
          fail(errc::unsupported_restriction,
               "family is not closed under dilation");
        }
      },
      out.body);
  return out;
}

// ---------------------------------------------------------------------------
// Ball masses / uniform norm / total variation.
// ---------------------------------------------------------------------------

namespace {

// Area of the intersection of two discs (radii r1, r2, centre distance d).
double lens_area(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  const double rm = std::min(r1, r2);
  if (d <= std::abs(r1 - r2)) return std::numbers::pi * rm * rm;
  const double c1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0);
  const double c2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0);
  const double tri = 0.5 * std::sqrt(std::max(
      0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)));
  return r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - tri;
}

// Volume of the intersection of two balls in R^3.
double lens_volume(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  const double rm = std::min(r1, r2);
  if (d <= std::abs(r1 - r2)) return 4.0 / 3.0 * std::numbers::pi * rm * rm * rm;
  return std::numbers::pi * (r1 + r2 - d) * (r1 + r2 - d) *
         (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2) * (r1 - r2)) /
         (12.0 * d);
}

// |ball(0, rho_ann) cap ball(centre_dist, R)| for the ambient dimension.
double ball_cap_ball(int N, double rho, double d, double R) {
  if (N == 1) {
    const double lo = std::max(-rho, d - R), hi = std::min(rho, d + R);
    return std::max(0.0, hi - lo);
  }
  if (N == 2) return lens_area(rho, R, d);
  return lens_volume(rho, R, d);
}

// Angular measure of the sphere of radius r (about the origin) lying inside
// the closed ball B(centre_dist, R); multiplied by r^{N-1} it integrates
// radial densities over that ball.
double sphere_in_ball_factor(int N, double r, double d, double R) {
  if (r <= 0.0) return 0.0;
  if (d == 0.0) return r <= R ? quad::sphere_area(N) : 0.0;
  const double u = (r * r + d * d - R * R) / (2.0 * r * d);
  if (u <= -1.0) return quad::sphere_area(N);
  if (u >= 1.0) return 0.0;
  if (N == 1) return 1.0;  // exactly one of the two points +-r lies inside
  if (N == 2) return 2.0 * std::acos(u);
  return 2.0 * std::numbers::pi * (1.0 - u);
}

}  // namespace

double ball_mass(const Measure& mu, const Point& centre, double radius,
                 const QuadratureConfig& cfg) {
  const int N = mu.dimension;
  check_point(centre, N, "ball_mass centre");
  if (!(radius >= 0.0)) fail(errc::validation_error, "ball_mass needs radius >= 0");
  const Point c = materialize(centre, N);

  return std::visit(
      [&](const auto& body) -> double {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          double s = 0.0;
          for (const auto& a : body.atoms) {
            Point d = materialize(a.location, N);
            for (int i = 0; i < N; ++i) d[i] -= c[i];
            if (norm(d) <= radius * (1.0 + 1e-12)) s += std::abs(a.weight);
          }
          return s;
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          const double d = norm(c);
          double s = 0.0;
          for (const auto& t : body.terms)
            s += t.b * (ball_cap_ball(N, t.lambda * t.r, d, radius) -
                        ball_cap_ball(N, t.lambda / t.r, d, radius));
          return s;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          const int nc = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / nc;
          if (N == 1) {
            double s = 0.0;
            for (int i = 0; i < nc; ++i) {
              const double a = -body.support_radius + i * h;
              const double lo = std::max(a, c[0] - radius);
              const double hi = std::min(a + h, c[0] + radius);
              if (hi > lo) s += std::abs(body.samples[i]) * (hi - lo);
            }
            return s;
          }
          // Cell-centre classification with one refinement level; adequate
          // for the qualitative uses this has in higher dimension.
          double s = 0.0;
          std::vector<int> idx(N, 0);
          const int sub = 4;
          for (std::size_t flat = 0; flat < body.samples.size(); ++flat) {
            if (body.samples[flat] != 0.0) {
              double inside = 0.0; int count = 0;
              std::vector<int> sidx(N, 0);
              const std::size_t stot = ipow(sub, N);
              for (std::size_t sf = 0; sf < stot; ++sf) {
                double r2 = 0.0;
                for (int d2 = 0; d2 < N; ++d2) {
                  const double mid = -body.support_radius + idx[d2] * h +
                                     (sidx[d2] + 0.5) * (h / sub);
                  r2 += (mid - c[d2]) * (mid - c[d2]);
                }
                ++count;
                if (r2 <= radius * radius) inside += 1.0;
                for (int d2 = N - 1; d2 >= 0; --d2) {
                  if (++sidx[d2] < sub) break;
                  sidx[d2] = 0;
                }
              }
              double vol = 1.0;
              for (int d2 = 0; d2 < N; ++d2) vol *= h;
              s += std::abs(body.samples[flat]) * vol * inside / count;
            }
            for (int d2 = N - 1; d2 >= 0; --d2) {
              if (++idx[d2] < nc) break;
              idx[d2] = 0;
            }
          }
          return s;
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          const Point ctr = materialize(body.center, N);
          Point rel = c;
          for (int i = 0; i < N; ++i) rel[i] -= ctr[i];
          const Point b = materialize(body.b, N);
          const double Bn = norm(b);
          if (Bn == 0.0) {
            // Radial about its centre: slice by spheres.
            const double d = norm(rel);
            auto f = [&](double r) {
              return std::exp(body.A * r * r +
                              detail::modifier_log(body.modifier, r)) *
                     std::pow(r, N - 1) * sphere_in_ball_factor(N, r, d, radius);
            };
            const double lo = std::max(0.0, d - radius), hi = d + radius;
            std::vector<double> edges{lo};
            const double kink = std::abs(radius - d);  // full-sphere boundary
            if (kink > lo && kink < hi) edges.push_back(kink);
            edges.push_back(hi);
            auto q = quad::gk_panels(f, edges, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis);
            return q.value;
          }
          // Tilted: low-order product quadrature over the ball.
          auto dens = [&](const Point& y) {
            Point z = y;
            for (int i = 0; i < N; ++i) z[i] -= ctr[i];
            const double r = norm(z);
            return std::exp(body.A * r * r + dot(b, z) +
                            detail::modifier_log(body.modifier, r));
          };
          if (N == 1) {
            auto f = [&](double y) { return dens({y}); };
            return quad::gk_adaptive(f, c[0] - radius, c[0] + radius,
                                     cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis).value;
          }
          if (N == 2) {
            auto f = [&](double rho) {
              double s = 0.0;
              for (int k = 0; k < cfg.angular_nodes; ++k) {
                const double ph = 2.0 * std::numbers::pi * (k + 0.5) /
                                  cfg.angular_nodes;
                s += dens({c[0] + rho * std::cos(ph), c[1] + rho * std::sin(ph)});
              }
              return rho * s * 2.0 * std::numbers::pi / cfg.angular_nodes;
            };
            return quad::gk_adaptive(f, 0.0, radius, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis).value;
          }
          auto f = [&](double rho) {
            auto g = [&](double ct) {
              const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
              double s = 0.0;
              for (int k = 0; k < cfg.angular_nodes; ++k) {
                const double ph = 2.0 * std::numbers::pi * (k + 0.5) /
                                  cfg.angular_nodes;
                s += dens({c[0] + rho * st * std::cos(ph),
                           c[1] + rho * st * std::sin(ph), c[2] + rho * ct});
              }
              return s * 2.0 * std::numbers::pi / cfg.angular_nodes;
            };
            return rho * rho * quad::gk_adaptive(g, -1.0, 1.0, cfg.rel_tol,
                                                 cfg.abs_tol, 512).value;
          };
          return quad::gk_adaptive(f, 0.0, radius, cfg.rel_tol, cfg.abs_tol,
                                   cfg.max_nodes_per_axis).value;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          // Bounded density on any fixed ball; integrate directly.
          if (N == 1) {
            auto f = [&](double y) {
              return detail::density_value(mu, {y});
            };
            std::vector<double> edges{c[0] - radius};
            if (0.0 > edges[0] && 0.0 < c[0] + radius) edges.push_back(0.0);
            edges.push_back(c[0] + radius);
            return quad::gk_panels(f, edges, cfg.rel_tol, cfg.abs_tol,
                                   cfg.max_nodes_per_axis).value;
          }
          // Product quadrature as in the tilted case above.
          auto dens = [&](const Point& y) { return detail::density_value(mu, y); };
          if (N == 2) {
            auto f = [&](double rho) {
              double s = 0.0;
              for (int k = 0; k < cfg.angular_nodes; ++k) {
                const double ph = 2.0 * std::numbers::pi * (k + 0.5) /
                                  cfg.angular_nodes;
                s += dens({c[0] + rho * std::cos(ph), c[1] + rho * std::sin(ph)});
              }
              return rho * s * 2.0 * std::numbers::pi / cfg.angular_nodes;
            };
            return quad::gk_adaptive(f, 0.0, radius, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis).value;
          }
          auto f = [&](double rho) {
            auto g = [&](double ct) {
              const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
              double s = 0.0;
              for (int k = 0; k < cfg.angular_nodes; ++k) {
                const double ph = 2.0 * std::numbers::pi * (k + 0.5) /
                                  cfg.angular_nodes;
                s += dens({c[0] + rho * st * std::cos(ph),
                           c[1] + rho * st * std::sin(ph), c[2] + rho * ct});
              }
              return s * 2.0 * std::numbers::pi / cfg.angular_nodes;
            };
            return rho * rho * quad::gk_adaptive(g, -1.0, 1.0, cfg.rel_tol,
                                                 cfg.abs_tol, 512).value;
          };
          return quad::gk_adaptive(f, 0.0, radius, cfg.rel_tol, cfg.abs_tol,
                                   cfg.max_nodes_per_axis).value;
        } else {  // Sum: component-wise bound (exact without cancellation)
          double s = 0.0;
          for (const auto& [co, sub] : body.components)
            s += std::abs(co) * ball_mass(*sub, centre, radius, cfg);
          return s;
        }
      },
      mu.body);
}

namespace {

// Candidate ball centres for the sup over unit balls, per family.
void collect_candidates(const Measure& mu, std::vector<Point>& out) {
  const int N = mu.dimension;
  auto axis_point = [&](double rho) {
    Point p(N, 0.0);
    p[0] = rho;
    return p;
  };
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          for (const auto& a : body.atoms) {
            const Point loc = materialize(a.location, N);
            out.push_back(loc);
            for (int i = 0; i < N; ++i) {
              Point p = loc;
              p[i] += 1.0;
              out.push_back(p);
              p[i] -= 2.0;
              out.push_back(p);
            }
          }
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          out.push_back(axis_point(0.0));
          for (const auto& t : body.terms) {
            for (double rho : {t.lambda / t.r, t.lambda, t.lambda * t.r,
                               t.lambda / t.r + 1.0, t.lambda * t.r - 1.0})
              if (rho >= 0.0) out.push_back(axis_point(rho));
          }
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          out.push_back(axis_point(0.0));
          const int nc = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / nc;
          if (N == 1) {
            for (int i = 0; i <= nc; ++i) {
              const double e = -body.support_radius + i * h;
              out.push_back({e + 1.0});
              out.push_back({e - 1.0});
            }
          } else {
            for (int i = 0; i < nc; ++i)
              out.push_back(axis_point(-body.support_radius + (i + 0.5) * h));
          }
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          const Point ctr = materialize(body.center, N);
          out.push_back(ctr);
          const Point b = materialize(body.b, N);
          const double Bn = norm(b);
          // Scan along the tilt (or first axis) out to where the density has
          // decayed to irrelevance.
          Point dir(N, 0.0);
          if (Bn > 0.0)
            for (int i = 0; i < N; ++i) dir[i] = b[i] / Bn;
          else
            dir[0] = 1.0;
          double reach = 2.0;
          const double gamma = detail::modifier_linear_rate(body.modifier);
          if (body.A < 0.0)
            reach = std::sqrt(80.0 / -body.A) + 2.0;
          else if (std::isfinite(gamma) && gamma > Bn)
            reach = 80.0 / (gamma - Bn) + 2.0;
          else if (detail::modifier_power(body.modifier) > 0.0)
            reach = 50.0;
          for (double rho = 0.25; rho <= reach; rho += 0.25) {
            Point p = ctr;
            for (int i = 0; i < N; ++i) p[i] += rho * dir[i];
            out.push_back(p);
          }
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& [c2, sub] : body.components)
            collect_candidates(*sub, out);
        }
      },
      mu.body);
}

bool unbounded_density(const Measure& mu) {
  return std::visit(
      [&](const auto& body) -> bool {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          if (body.A > 0.0) return true;
          if (body.A < 0.0) return false;
          const double Bn = norm(materialize(body.b, mu.dimension));
          if (Bn == 0.0) return false;
          const double gamma = detail::modifier_linear_rate(body.modifier);
          return gamma < Bn;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          return true;  // A > 0 by validation
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& [c, sub] : body.components)
            if (c != 0.0 && unbounded_density(*sub)) return true;
          return false;
        } else {
          return false;
        }
      },
      mu.body);
}

}  // namespace

double uniform_norm(const Measure& mu, const QuadratureConfig& cfg) {
  cfg.validate();
  if (unbounded_density(mu)) return kInf;

  std::vector<Point> cand;
  collect_candidates(mu, cand);
  if (cand.empty()) cand.push_back(Point(mu.dimension, 0.0));

  double best = 0.0;
  Point best_c = cand.front();
  for (const auto& p : cand) {
    const double v = ball_mass(mu, p, 1.0, cfg);
    if (v > best) {
      best = v;
      best_c = p;
    }
  }
  // Local refinement, coordinate-wise golden search around the best candidate.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int d = 0; d < mu.dimension; ++d) {
    double lo = best_c[d] - 1.0, hi = best_c[d] + 1.0;
    Point p = best_c;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    p[d] = x1;
    double f1 = ball_mass(mu, p, 1.0, cfg);
    p[d] = x2;
    double f2 = ball_mass(mu, p, 1.0, cfg);
    for (int it = 0; it < 40; ++it) {
      if (f1 >= f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo);
        p[d] = x1;
        f1 = ball_mass(mu, p, 1.0, cfg);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo);
        p[d] = x2;
        f2 = ball_mass(mu, p, 1.0, cfg);
      }
    }
    const double fm = std::max(f1, f2);
    if (fm > best) {
      best = fm;
      best_c[d] = f1 >= f2 ? x1 : x2;
    }
  }
  return best;
}

double btv_norm(const Measure& mu, const QuadratureConfig& cfg) {
  cfg.validate();
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> double {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          const Measure a = abs_measure(mu);
          double s = 0.0;
          for (const auto& at : std::get<DiracComb>(a.body).atoms) s += at.weight;
          return s;
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          const GrowthIndex g = growth_index(mu);
          if (g.eps0 > 0.0) return kInf;
          // Total mass is translation invariant; integrate about the centre.
          return detail::radial_mass_integral(
              N, std::min(body.A, 0.0), norm(materialize(body.b, N)),
              body.modifier, cfg, nullptr);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          double s = 0.0;
          const double vn = quad::ball_volume(N);
          for (const auto& t : body.terms)
            s += t.b * vn *
                 (std::pow(t.lambda * t.r, N) - std::pow(t.lambda / t.r, N));
          return s;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          return kInf;  // A > 0: the envelope alone has infinite mass
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          const double h = 2.0 * body.support_radius / body.cells_per_axis;
          double vol = 1.0;
          for (int i = 0; i < N; ++i) vol *= h;
          double s = 0.0;
          for (double v : body.samples) s += std::abs(v) * vol;
          return s;
        } else {  // Sum
          double s = 0.0;
          for (const auto& [c, sub] : body.components)
            s += std::abs(c) * btv_norm(*sub, cfg);
          return s;
        }
      },
      mu.body);
}

}  // namespace hg
