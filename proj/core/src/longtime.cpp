#include "hg/longtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hg/error.hpp"
#include "hg/kernel.hpp"
#include "radial.hpp"

namespace hg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Normalised Gaussian mass outside the annulus A(r) = {1/r <= |z| <= r}:
//   c_N integral_{R^N \ A(r)} e^{-|z|^2} dz,  c_N = pi^{-N/2}.
double gauss_outside_annulus(int N, double r) {
  const double s = 1.0 / r;
  switch (N) {
    case 1:
      return std::erf(s) + std::erfc(r);
    case 2:
      return -std::expm1(-s * s) + std::exp(-r * r);
    case 3: {
      const double two_rt = 2.0 / std::sqrt(std::numbers::pi);
      const double inner = std::erf(s) - two_rt * s * std::exp(-s * s);
      const double outer = std::erfc(r) + two_rt * r * std::exp(-r * r);
      return inner + outer;
    }
    default:
      fail(errc::dimension_unsupported, "supported dimensions are 1, 2, 3");
  }
}

double ipow(double x, int n) {
  double v = 1.0;
  for (int i = 0; i < n; ++i) v *= x;
  return v;
}

}  // namespace

std::vector<double> trace_at_origin(const Measure& mu,
                                    const std::vector<double>& times,
                                    const QuadratureConfig& cfg) {
  cfg.validate();
  const bool nonneg = sign_status(mu) == SignStatus::nonnegative;
  const double eps0 = growth_index(mu).eps0;
  const double T = eps0 > 0.0 ? 1.0 / (4.0 * eps0) : kInf;
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t > 0.0)) fail(errc::validation_error, "times must be positive");
    if (t > T * (1.0 + 1e-12))
      fail(errc::beyond_maximal_time, "trace time exceeds the existence window");
    if (t >= T * (1.0 - 1e-12))
      fail(errc::at_maximal_time, "trace time sits at the maximal time");
    if (nonneg)
      out.push_back(meps_norm(mu, 1.0 / (4.0 * t), cfg));
    else
      out.push_back(evaluate(mu, Point(mu.dimension, 0.0), t, cfg).value);
  }
  return out;
}

LongtimeVerdict classify_longtime(const Measure& mu, int k_max,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  if (sign_status(mu) != SignStatus::nonnegative)
    fail(errc::signed_data_unsupported, "long-time criteria need nonnegative data");
  if (growth_index(mu).eps0 > 0.0)
    fail(errc::validation_error, "long-time behaviour needs globally existing data");
  if (k_max < 4) fail(errc::validation_error, "need k_max >= 4 dyadic scales");

  const int N = mu.dimension;
  LongtimeVerdict v;
  const Point origin(static_cast<std::size_t>(N), 0.0);
  std::vector<double> ball_cum(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    const double R = std::ldexp(1.0, k);
    ball_cum[k] = ball_mass(mu, origin, R, cfg);
    v.ball_averages.push_back(ball_cum[k] / ipow(R, N));
    const double inner = k == 0 ? ball_mass(mu, origin, 0.5, cfg) : ball_cum[k - 1];
    v.annulus_averages.push_back((ball_cum[k] - inner) / ipow(R, N));
  }
  for (double t : {1.0, 10.0, 100.0})
    v.trace_samples.push_back(meps_norm(mu, 1.0 / (4.0 * t), cfg));

  const auto& ann = v.annulus_averages;
  const auto& bal = v.ball_averages;
  const std::size_t n = ann.size();
  double ann_max = 0.0, bal_max = 0.0;
  for (double a : ann) ann_max = std::max(ann_max, a);
  for (double b : bal) bal_max = std::max(bal_max, b);

  // Decay: the outer annulus averages vanish (relative to the overall scale).
  // All-empty annuli count: then every scrap of mass sits in a fixed ball.
  bool decays = true;
  for (std::size_t i = n - 3; i < n; ++i)
    decays = decays && ann[i] <= 1e-6 * std::max(ann_max, 1e-300);
  if (decays) {
    v.behaviour = LongtimeBehaviour::DecaysToZero;
    return v;
  }

  // Divergence: ball averages keep growing geometrically.
  bool diverges = true;
  for (std::size_t i = n - 4; i + 1 < n; ++i)
    diverges = diverges && bal[i + 1] >= 1.5 * bal[i] && bal[i] > 0.0;
  if (diverges) {
    v.behaviour = LongtimeBehaviour::DivergesToInfinity;
    return v;
  }

  // Boundedness: the last window of ball averages is stationary.
  double wmin = kInf, wmax = 0.0;
  for (std::size_t i = n - 4; i < n; ++i) {
    wmin = std::min(wmin, bal[i]);
    wmax = std::max(wmax, bal[i]);
  }
  if (wmax <= 1.5 * wmin && wmax > 0.0 && wmax < kInf) {
    v.positive_liminf = wmin > 0.01 * bal_max;
    // Refinement: fold into a convergence verdict only when the trace itself
    // has stabilised to the same value the averages suggest.
    const double t0 = v.trace_samples[v.trace_samples.size() - 2];
    const double t1 = v.trace_samples.back();
    if (std::abs(t1 - t0) <= 1e-6 * std::max(1.0, std::abs(t1)) &&
        std::abs(t1 - 0.5 * (wmin + wmax)) <=
            1e-6 * std::max(1.0, std::abs(t1))) {
      v.behaviour = LongtimeBehaviour::ConvergesTo;
      v.limit = t1;
    } else {
      v.behaviour = LongtimeBehaviour::BoundedOnParabolas;
    }
    return v;
  }
  v.behaviour = LongtimeBehaviour::Inconclusive;
  return v;
}

std::pair<Measure, OscillationSpec> build_oscillating_data(
    const std::vector<double>& b, int dimension) {
  if (b.empty()) fail(errc::validation_error, "need at least one target value");
  for (double bk : b)
    if (!(bk >= 0.0) || !std::isfinite(bk))
      fail(errc::validation_error, "targets must be finite and nonnegative");
  const int N = dimension;
  if (N < 1 || N > 3)
    fail(errc::dimension_unsupported, "supported dimensions are 1, 2, 3");
  const double cN = std::pow(std::numbers::pi, -0.5 * N);

  OscillationSpec spec;
  spec.b = b;
  AnnulusSum data;
  double beta = 0.0;      // running max of targets
  double prev_r = 1.0;    // sentinels r_0 = lambda_0 = 1
  double prev_lam = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    const double bk = b[i];
    beta = std::max(beta, bk);
    const double half_target = 0.5 * std::ldexp(1.0, -k);

    // r_k: smallest power of 2 > 1 with (2x slack)
    //   r^N >= 2 * 2^{k+1} beta_k   and   b_k G_N(r) <= 2^{-k}/2.
    double r = 2.0;
    while (!(ipow(r, N) >= 2.0 * std::ldexp(1.0, k + 1) * beta &&
             bk * gauss_outside_annulus(N, r) <= half_target))
      r *= 2.0;

    // lambda_k: smallest power of 2 with
    //   lambda >= 2 lambda_{k-1} r_{k-1} r_k        (disjointness)
    //   lambda^N >= 2 * 2^k b_k r_k^{3N}            (integrable near infinity)
    //   b_k e^{-lambda^2/(lambda_{k-1}^2 r_k^2)} lambda^N r_k^N <= 2^{-k}/2.
    double lam = 2.0;
    while (lam < 2.0 * prev_lam * prev_r * r) lam *= 2.0;
    while (!(ipow(lam, N) >= 2.0 * std::ldexp(1.0, k) * bk * ipow(r, 3 * N) &&
             bk * std::exp(-(lam * lam) / (prev_lam * prev_lam * r * r)) *
                     ipow(lam, N) * ipow(r, N) <=
                 half_target))
      lam *= 2.0;

    spec.r.push_back(r);
    spec.lambda.push_back(lam);
    spec.t.push_back(lam * lam / 4.0);
    spec.error_bounds.push_back((2.0 * cN + 1.0) * std::ldexp(1.0, -k));
    data.terms.push_back(AnnulusSum::Term{bk, lam, r});
    prev_r = r;
    prev_lam = lam;
  }
  Measure mu{N, std::move(data)};
  validate(mu);
  return {std::move(mu), std::move(spec)};
}

std::vector<double> interleave_targets(const std::vector<double>& alpha,
                                       std::size_t length) {
  std::vector<double> out;
  if (alpha.empty()) return out;
  for (std::size_t block = 1; out.size() < length; ++block) {
    const std::size_t take = std::min(block, alpha.size());
    for (std::size_t i = 0; i < take && out.size() < length; ++i)
      out.push_back(alpha[i]);
  }
  return out;
}

namespace {

// Restriction of mu to the closed ball of radius R (inside = true) or to its
// complement.  Exact for atoms; annuli are trimmed (geometric re-centering of
// the trimmed interval); grids are cut at cell granularity.
Measure restrict_ball(const Measure& mu, double R, bool inside) {
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> Measure {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          DiracComb out;
          for (const auto& a : body.atoms) {
            double r2 = 0.0;
            for (double c : a.location) r2 += c * c;
            const bool in = std::sqrt(r2) <= R;
            if (in == inside) out.atoms.push_back(a);
          }
          return Measure{N, std::move(out)};
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          AnnulusSum out;
          for (const auto& t : body.terms) {
            double a = t.lambda / t.r, b2 = t.lambda * t.r;
            if (inside)
              b2 = std::min(b2, R);
            else
              a = std::max(a, R);
            if (b2 <= a * (1.0 + 1e-12)) continue;
            out.terms.push_back(
                AnnulusSum::Term{t.b, std::sqrt(a * b2), std::sqrt(b2 / a)});
          }
          return Measure{N, std::move(out)};
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          GridDensity out = body;
          const int nc = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / nc;
          std::vector<int> idx(N, 0);
          for (std::size_t flat = 0; flat < out.samples.size(); ++flat) {
            double r2 = 0.0;
            for (int d = 0; d < N; ++d) {
              const double c = -body.support_radius + (idx[d] + 0.5) * h;
              r2 += c * c;
            }
            const bool in = std::sqrt(r2) <= R;
            if (in != inside) out.samples[flat] = 0.0;
            for (int d = N - 1; d >= 0; --d) {
              if (++idx[d] < nc) break;
              idx[d] = 0;
            }
          }
          return Measure{N, std::move(out)};
        } else if constexpr (std::is_same_v<T, Sum>) {
          std::vector<std::pair<double, Measure>> comps;
          for (const auto& [c, sub] : body.components)
            comps.emplace_back(c, restrict_ball(*sub, R, inside));
          return make_sum(N, comps);
        } else {
          fail(errc::unsupported_restriction,
               "this family cannot represent a ball restriction");
        }
      },
      mu.body);
}

}  // namespace

Measure splice_shadow(const Measure& v0, const Measure& osc, double R) {
  if (v0.dimension != osc.dimension)
    fail(errc::dimension_mismatch, "splice parts disagree on dimension");
  if (!(R > 0.0)) fail(errc::validation_error, "splice radius must be positive");
  Measure inner = restrict_ball(v0, R, true);
  Measure outer = restrict_ball(osc, R, false);
  return make_sum(v0.dimension, {{1.0, std::move(inner)}, {1.0, std::move(outer)}});
}

double rescaling_residual(const Measure& mu, double lambda,
                          const std::vector<Point>& probes,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(lambda > 0.0)) fail(errc::validation_error, "lambda must be positive");
  const Measure scaled = dilate(mu, lambda);
  // Base time for the comparison: both sides must sit strictly inside their
  // existence windows (t0 for the dilated data, lambda^2 t0 for the original).
  const double T = maximal_time(mu);
  const double t0 =
      std::isfinite(T) ? std::min(1.0, 0.5 * T / (lambda * lambda)) : 1.0;
  double worst = 0.0;
  for (const auto& p : probes) {
    const double lhs = evaluate(scaled, p, t0, cfg).value;
    Point q(p);
    q.resize(mu.dimension, 0.0);
    for (auto& c : q) c *= lambda;
    const double rhs = evaluate(mu, q, lambda * lambda * t0, cfg).value;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace hg
