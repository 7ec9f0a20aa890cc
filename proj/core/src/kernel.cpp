#include "hg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "hg/error.hpp"
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

double safe_exp(double e) {
  if (e > 709.0) return kInf;
  if (e < -745.0) return 0.0;
  return std::exp(e);
}

}  // namespace

namespace detail {

double density_value(const Measure& mu, const Point& y) {
  const int N = mu.dimension;
  const Point yy = materialize(y, N);
  return std::visit(
      [&](const auto& body) -> double {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          fail(errc::not_factored, "atoms have no pointwise density");
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          Point z = yy;
          const Point c = materialize(body.center, N);
          for (int i = 0; i < N; ++i) z[i] -= c[i];
          const double r = norm(z);
          return safe_exp(body.A * r * r + dot(materialize(body.b, N), z) +
                          modifier_log(body.modifier, r));
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          const double r = norm(yy);
          double s = 0.0;
          for (const auto& t : body.terms)
            if (r > t.lambda / t.r && r < t.lambda * t.r) s += t.b;
          return s;
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          const Point n = materialize(body.n, N);
          const double s = dot(yy, n);
          if (s <= 0.0) return 0.0;
          double perp2 = dot(yy, yy) - s * s;
          if (perp2 > 1.0 + 1e-12) return 0.0;
          const Point x0 = materialize(body.x0, N);
          const double phi = body.strict ? 1.0 : 1.0 / (1.0 + s * s);
          return safe_exp(body.A * dot(yy, yy) - 2.0 * body.A * dot(x0, yy) -
                          2.0 * body.A * body.c * s) *
                 phi;
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          const int nc = body.cells_per_axis;
          const double h = 2.0 * body.support_radius / nc;
          std::size_t flat = 0;
          for (int d = 0; d < N; ++d) {
            const double u = (yy[d] + body.support_radius) / h;
            if (u < 0.0 || u >= nc) return 0.0;
            flat = flat * nc + static_cast<std::size_t>(u);
          }
          return body.samples[flat];
        } else {  // Sum
          double s = 0.0;
          for (const auto& [c, sub] : body.components)
            s += c * density_value(*sub, y);
          return s;
        }
      },
      mu.body);
}

bool has_density(const Measure& mu) {
  return std::visit(
      [&](const auto& body) -> bool {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          return false;
        } else if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& [c, sub] : body.components)
            if (!has_density(*sub)) return false;
          return true;
        } else {
          return true;
        }
      },
      mu.body);
}

namespace {

// Radial reduction of  integral e^{-q|z-y|^2} rho(y) dy  for densities of the
// form rho(y) = e^{A|y|^2 + b.y} m(|y|) s(|y|):  writing q' = q - A,
// c = 2qz + b,
//   = e^{-q|z|^2 + |c|^2/(4q')} *
//     integral_0^inf e^{-q'(r - r0)^2} S~_N(|c| r) m(r) s(r) r^{N-1} dr,
// with r0 = |c| / (2q').  m is the smooth modifier profile; s an optional
// piecewise-constant factor (annuli) with break points in sedges.  Near the
// maximal time q' is tiny and a decaying m drags the maximizer far below r0,
// so the peak is located numerically, the integrand is normalized by its
// value there, and panels are seeded geometrically around it so the adaptive
// pass starts at every scale at once.
ConvResult radial_reduce(int N, double qp, double log_pref, double cnorm,
                         const std::function<double(double)>& step,
                         const std::vector<double>& sedges, const Modifier& mod,
                         const QuadratureConfig& cfg) {
  if (!(qp > 0.0)) return {kInf, kInf, Method::radial_quadrature};
  const double r0 = cnorm / (2.0 * qp);
  auto lfull = [&](double r) -> double {
    if (!(r > 0.0)) r = 1e-300;
    return -qp * (r - r0) * (r - r0) + modifier_log(mod, r) +
           (N - 1) * std::log(r) + std::log(quad::angular_tilde(N, cnorm * r));
  };

  // Peak candidates: r0, the damped fixed point of the first-order condition
  // 2q'(r0 - r) = rate(r), the origin, and a coarse geometric scan, followed
  // by a golden-section polish of the winner.
  const double sigma = std::sqrt(0.5 / qp);
  double rpk = std::max(r0, 1e-12);
  double best = lfull(rpk);
  auto offer = [&](double r) {
    if (!(r > 0.0) || !std::isfinite(r)) return;
    const double v = lfull(r);
    if (v > best) {
      best = v;
      rpk = r;
    }
  };
  if (!std::holds_alternative<ModOne>(mod)) {
    auto rate = [&](double r) {
      const double h = 1e-6 * (1.0 + r);
      return -(modifier_log(mod, r + h) - modifier_log(mod, r)) / h;
    };
    double rit = r0;
    for (int it = 0; it < 40; ++it) {
      const double next = r0 - rate(std::max(rit, 1e-12)) / (2.0 * qp);
      if (!std::isfinite(next)) break;
      rit = std::max(0.5 * rit + 0.5 * next, 0.0);
      offer(rit);
    }
    offer(1e-12);
    const double top = r0 + 8.0 * sigma + 1.0;
    for (double r = top; r > 1e-10 * top; r *= 0.85) offer(r);
  } else {
    offer(sigma * std::sqrt(static_cast<double>(N)));  // r^{N-1} vs Gaussian
  }
  {
    double a = rpk * 0.7, b = rpk * 1.45 + 1e-12;
    const double gr = 0.6180339887498949;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = lfull(c1), f2 = lfull(c2);
    for (int it = 0; it < 70; ++it) {
      if (f1 < f2) {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = lfull(c2);
      } else {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = lfull(c1);
      }
    }
    offer(0.5 * (a + b));
  }
  const double Lpk = best;
  if (!std::isfinite(Lpk)) return {0.0, 0.0, Method::radial_quadrature};

  // Window: march outward from the peak until the exponent has fallen well
  // below the tolerance scale; widths double, so slow modifier tails cost a
  // few extra probes only.
  const double drop =
      std::max(1.0, -std::log(std::min(cfg.rel_tol, cfg.abs_tol))) + 7.0;
  double hi = rpk + sigma;
  for (int it = 0; it < 120 && lfull(hi) > Lpk - drop; ++it)
    hi = rpk + 2.0 * (hi - rpk);
  double lo = std::max(0.0, rpk - sigma);
  for (int it = 0; it < 120 && lo > 0.0 && lfull(lo) > Lpk - drop; ++it)
    lo = std::max(0.0, rpk - 2.0 * (rpk - lo));
  hi = rpk + (hi - rpk) * cfg.tail_safety;
  lo = std::max(0.0, rpk - (rpk - lo) * cfg.tail_safety);
  if (!sedges.empty()) {
    // A bounded support factor may sit entirely outside the exponent window;
    // stretch the window over it (panels of zeros close immediately).
    const auto [mn, mx] = std::minmax_element(sedges.begin(), sedges.end());
    lo = std::max(0.0, std::min(lo, *mn));
    hi = std::max(hi, *mx);
  }

  auto g = [&](double r) {
    if (r < 0.0) return 0.0;
    return safe_exp(lfull(r) - Lpk) * (step ? step(r) : 1.0);
  };
  std::vector<double> edges{lo, hi};
  for (double e : sedges)
    if (e > lo && e < hi) edges.push_back(e);
  if (r0 > lo && r0 < hi && std::abs(r0 - rpk) > sigma) {
    // Secondary bump where the Gaussian factor alone would peak.
    edges.push_back(r0);
    for (double d : {sigma, 3.0 * sigma}) {
      if (r0 - d > lo) edges.push_back(r0 - d);
      if (r0 + d < hi) edges.push_back(r0 + d);
    }
  }
  for (double f = 0.5; f > 1e-13; f *= 0.5) {
    const double dl = (rpk - lo) * f, dr = (hi - rpk) * f;
    if (dl > 0.0 && rpk - dl > lo) edges.push_back(rpk - dl);
    if (dr > 0.0 && rpk + dr < hi) edges.push_back(rpk + dr);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  // The raw integral is rescaled by e^{log_pref + Lpk} afterwards, so the
  // absolute stopping target has to move the opposite way; otherwise a huge
  // prefactor (far probe, growing data) parks the refinement at a floor that
  // is coarse relative to the final value.
  const double abs_local = std::min(
      1e300, std::max(cfg.abs_tol * safe_exp(-log_pref - Lpk), 1e-300));
  auto q = quad::gk_panels(g, edges, cfg.rel_tol, abs_local,
                           cfg.max_nodes_per_axis);

  // Discarded-tail estimate from the window edges.
  const double tail =
      (g(lo) * (lo > 0.0 ? 1.0 : 0.0) + g(hi)) / std::sqrt(qp);
  const double pref = safe_exp(log_pref + Lpk);
  return {pref * q.value, pref * (q.error + tail), Method::radial_quadrature};
}

ConvResult conv_expquad(int N, const ExpQuadDensity& d, const Point& x,
                        double q, const QuadratureConfig& cfg, double lt) {
  // Shift to the density's own centre.
  Point z = materialize(x, N);
  const Point ctr = materialize(d.center, N);
  for (int i = 0; i < N; ++i) z[i] -= ctr[i];
  const double qp = q - d.A;
  if (!(qp > 0.0)) return {kInf, kInf, Method::closed_form};

  Point c = materialize(d.b, N);
  for (int i = 0; i < N; ++i) c[i] += 2.0 * q * z[i];
  const double cn = norm(c);
  const double log_pref = -q * dot(z, z) + cn * cn / (4.0 * qp) + lt;

  if (std::holds_alternative<ModOne>(d.modifier) && !cfg.force_quadrature) {
    const double val =
        std::pow(std::numbers::pi / qp, 0.5 * N) * safe_exp(log_pref);
    return {val, std::abs(val) * 4e-16, Method::closed_form};
  }
  return radial_reduce(N, qp, log_pref, cn, nullptr, {}, d.modifier, cfg);
}

ConvResult conv_annulus(int N, const AnnulusSum& an, const Point& x, double q,
                        const QuadratureConfig& cfg, double lt) {
  const Point xx = materialize(x, N);
  if (N == 1 && !cfg.force_quadrature) {
    // erf differences over the two symmetric intervals of each annulus.  For
    // segments far from x both erf arguments round to +-1 and the difference
    // cancels to zero even when the true mass is representable, so such
    // segments switch to the complementary form.
    const double sq = std::sqrt(q);
    double s = 0.0;
    auto seg = [&](double a, double b) {
      const double u = sq * (a - xx[0]), v = sq * (b - xx[0]);
      double d;
      if (u >= 0.0)
        d = std::erfc(u) - std::erfc(v);
      else if (v <= 0.0)
        d = std::erfc(-v) - std::erfc(-u);
      else
        d = std::erf(v) - std::erf(u);
      return 0.5 * std::sqrt(std::numbers::pi / q) * d;
    };
    for (const auto& t : an.terms) {
      const double lo = t.lambda / t.r, hi = t.lambda * t.r;
      s += t.b * (seg(lo, hi) + seg(-hi, -lo));
    }
    s *= safe_exp(lt);
    return {s, std::abs(s) * 1e-14 + 1e-300, Method::closed_form};
  }
  auto m = [&](double r) {
    double s = 0.0;
    for (const auto& t : an.terms)
      if (r > t.lambda / t.r && r < t.lambda * t.r) s += t.b;
    return s;
  };
  std::vector<double> edges;
  for (const auto& t : an.terms) {
    edges.push_back(t.lambda / t.r);
    edges.push_back(t.lambda * t.r);
  }
  const double cn = 2.0 * q * norm(xx);
  const double log_pref = -q * dot(xx, xx) + cn * cn / (4.0 * q) + lt;
  return radial_reduce(N, q, log_pref, cn, m, edges, ModOne{}, cfg);
}

ConvResult conv_grid(int N, const GridDensity& g, const Point& x, double q,
                     bool absolute, const QuadratureConfig& cfg, double lt) {
  (void)cfg;
  const Point xx = materialize(x, N);
  const int nc = g.cells_per_axis;
  const double h = 2.0 * g.support_radius / nc;
  const double sq = std::sqrt(q);
  const double axis_scale = 0.5 * std::sqrt(std::numbers::pi / q);

  // Per-axis, per-cell erf factors, shared across the cell product.
  std::vector<std::vector<double>> fac(N, std::vector<double>(nc));
  for (int d = 0; d < N; ++d)
    for (int i = 0; i < nc; ++i) {
      const double a = -g.support_radius + i * h;
      fac[d][i] = axis_scale * (std::erf(sq * (a + h - xx[d])) -
                                std::erf(sq * (a - xx[d])));
    }

  double s = 0.0, mag = 0.0;
  std::vector<int> idx(N, 0);
  for (std::size_t flat = 0; flat < g.samples.size(); ++flat) {
    double w = 1.0;
    for (int d = 0; d < N; ++d) w *= fac[d][idx[d]];
    const double sample = absolute ? std::abs(g.samples[flat]) : g.samples[flat];
    s += sample * w;
    mag += std::abs(sample * w);
    for (int d = N - 1; d >= 0; --d) {
      if (++idx[d] < nc) break;
      idx[d] = 0;
    }
  }
  const double tilt = safe_exp(lt);
  return {s * tilt, mag * tilt * 1e-14 + 1e-300, Method::closed_form};
}

ConvResult conv_halfspace(int N, const HalfSpacePiece& hp, const Point& x,
                          double q, const QuadratureConfig& cfg, double lt) {
  const double qp = q - hp.A;
  if (!(qp > 0.0)) return {kInf, kInf, Method::full_quadrature};
  const Point xx = materialize(x, N);
  const Point n = materialize(hp.n, N);
  const Point x0 = materialize(hp.x0, N);

  const double sx = dot(xx, n);
  const double x0n = dot(x0, n);
  const double eta_eff = 2.0 * hp.A * (hp.c + x0n);

  // Axis factor: integral_0^inf e^{-q(sx-s)^2 + A s^2 - eta_eff s} phi?(s) ds.
  const double lin = 2.0 * q * sx - eta_eff;
  const double shat = lin / (2.0 * qp);
  const double c0 = -q * sx * sx + qp * shat * shat;
  const double w = quad::gaussian_window(std::min(cfg.rel_tol, cfg.abs_tol)) *
                   cfg.tail_safety / std::sqrt(qp);
  const double lo = std::max(0.0, shat - w), hi = std::max(shat + w, lo + 1.0);
  auto axis = [&](double s) {
    const double phi = hp.strict ? 1.0 : 1.0 / (1.0 + s * s);
    return safe_exp(-qp * (s - shat) * (s - shat)) * phi;
  };
  // Same rescaling as in radial_reduce: the absolute target applies to the
  // final value, not to the raw integral before the e^{c0} factor.
  const double abs_axis = std::min(
      1e300, std::max(cfg.abs_tol * safe_exp(-c0 - lt), 1e-300));
  auto qa = quad::gk_panels(axis, {lo, std::min(hi, std::max(lo, 1.0)), hi},
                            cfg.rel_tol, abs_axis, cfg.max_nodes_per_axis);
  const double axis_val = safe_exp(c0 + lt) * qa.value;
  const double axis_err =
      safe_exp(c0 + lt) * (qa.error + axis(hi) / std::sqrt(qp));

  double perp_val = 1.0, perp_err = 0.0;
  if (N >= 2) {
    // Perpendicular slice over the unit ball, in coordinates where the first
    // axis points along the projection of x.
    Point xp = xx;
    for (int i = 0; i < N; ++i) xp[i] -= sx * n[i];
    Point x0p = x0;
    for (int i = 0; i < N; ++i) x0p[i] -= x0n * n[i];
    const double pxn = norm(xp);
    if (N == 2) {
      // Signed coordinates along the single perpendicular direction.
      Point e2(N, 0.0);
      if (pxn > 0.0)
        for (int i = 0; i < N; ++i) e2[i] = xp[i] / pxn;
      else {
        // any unit vector orthogonal to n
        e2[0] = -n[1];
        e2[1] = n[0];
      }
      const double p = pxn > 0.0 ? pxn : 0.0;
      const double x0c = dot(x0p, e2);
      auto f = [&](double u) {
        return safe_exp(-q * (p - u) * (p - u) + hp.A * u * u -
                        2.0 * hp.A * x0c * u);
      };
      auto qperp = quad::gk_adaptive(f, -1.0, 1.0, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis);
      perp_val = qperp.value;
      perp_err = qperp.error;
    } else {
      // Disc integral reduces to a Bessel average:
      //   e^{-q|p|^2} integral_0^1 2 pi rho e^{-q' rho^2 + |v| rho} I0e(|v| rho) drho,
      // with v = 2q p - 2A x0_perp in the perpendicular plane.
      Point v = xp;
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 2.0 * q * xp[i] - 2.0 * hp.A * x0p[i];
      const double vn = norm(v);
      auto f = [&](double rho) {
        return 2.0 * std::numbers::pi * rho *
               safe_exp(-qp * rho * rho + vn * rho) * quad::i0e(vn * rho);
      };
      auto qperp = quad::gk_adaptive(f, 0.0, 1.0, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis);
      perp_val = safe_exp(-q * pxn * pxn) * qperp.value;
      perp_err = safe_exp(-q * pxn * pxn) * qperp.error;
    }
  }
  const double val = axis_val * perp_val;
  const double err = axis_err * std::abs(perp_val) +
                     std::abs(axis_val) * perp_err;
  return {val, err, Method::full_quadrature};
}

ConvResult conv_sum(const Measure& mu, const Sum& sum, const Point& x, double q,
                    bool absolute, const QuadratureConfig& cfg, double lt);

ConvResult conv_dispatch(const Measure& mu, const Point& x, double q,
                         bool absolute, const QuadratureConfig& cfg,
                         double lt) {
  const int N = mu.dimension;
  return std::visit(
      [&](const auto& body) -> ConvResult {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          double s = 0.0, mag = 0.0;
          for (const auto& a : body.atoms) {
            Point d = materialize(a.location, N);
            const Point xx = materialize(x, N);
            for (int i = 0; i < N; ++i) d[i] -= xx[i];
            const double k = safe_exp(-q * dot(d, d) + lt);
            const double wgt = absolute ? std::abs(a.weight) : a.weight;
            s += wgt * k;
            mag += std::abs(wgt) * k;
          }
          return {s, mag * 1e-15 + 1e-300, Method::closed_form};
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          return conv_expquad(N, body, x, q, cfg, lt);  // density is positive
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          return conv_annulus(N, body, x, q, cfg, lt);
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          return conv_grid(N, body, x, q, absolute, cfg, lt);
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          return conv_halfspace(N, body, x, q, cfg, lt);
        } else {
          return conv_sum(mu, body, x, q, absolute, cfg, lt);
        }
      },
      mu.body);
}

ConvResult conv_sum(const Measure& mu, const Sum& sum, const Point& x, double q,
                    bool absolute, const QuadratureConfig& cfg, double lt) {
  const int N = mu.dimension;
  // Component errors add with the coefficient magnitudes while partial
  // cancellation can shrink the combined value, so each component has to be
  // integrated tighter than the target on the sum.
  double cmass = 0.0;
  for (const auto& [c, sub] : sum.components) cmass += std::abs(c);
  QuadratureConfig local = cfg;
  const double share = std::max(1.0, 2.0 * cmass);
  local.rel_tol = cfg.rel_tol / share;
  local.abs_tol = std::max(cfg.abs_tol / share, 1e-300);
  const bool mixed = absolute && sign_status(mu) == SignStatus::mixed;
  if (!mixed) {
    double v = 0.0, e = 0.0;
    Method meth = Method::closed_form;
    for (const auto& [c, sub] : sum.components) {
      ConvResult r = conv_dispatch(*sub, x, q, absolute, local, lt);
      v += (absolute ? std::abs(c) : c) * r.value;
      e += std::abs(c) * r.error;
      if (r.method != Method::closed_form) meth = r.method;
    }
    return {v, e, meth};
  }

  // Mixed-sign |mu|: atoms and densities never cancel each other, so split.
  // Atom cancellation is handled exactly by location merging; overlapping
  // signed densities need a joint pointwise integral, implemented for N = 1.
  std::vector<std::pair<double, std::shared_ptr<const Measure>>> atom_comps,
      dens_comps;
  for (const auto& comp : sum.components) {
    if (std::holds_alternative<DiracComb>(comp.second->body))
      atom_comps.push_back(comp);
    else
      dens_comps.push_back(comp);
  }

  double v = 0.0, e = 0.0;
  if (!atom_comps.empty()) {
    Measure atoms = abs_measure(
        make_sum(N, [&] {
          std::vector<std::pair<double, Measure>> cs;
          for (const auto& [c, sub] : atom_comps) cs.emplace_back(c, *sub);
          return cs;
        }()));
    ConvResult r = conv_dispatch(atoms, x, q, true, local, lt);
    v += r.value;
    e += r.error;
  }
  if (!dens_comps.empty()) {
    bool all_nonneg = true;
    for (const auto& [c, sub] : dens_comps)
      if (c < 0.0 || sign_status(*sub) == SignStatus::mixed) all_nonneg = false;
    if (all_nonneg) {
      for (const auto& [c, sub] : dens_comps) {
        ConvResult r = conv_dispatch(*sub, x, q, true, local, lt);
        v += c * r.value;
        e += std::abs(c) * r.error;
      }
    } else if (N == 1) {
      // Joint pointwise |sum of densities| against the Gaussian kernel.
      const double xx = materialize(x, 1)[0];
      double amax = 0.0;
      std::vector<double> edges;
      double reach = 0.0;
      for (const auto& [c, sub] : dens_comps) {
        amax = std::max(amax, growth_index(*sub).eps0);
        std::visit(
            [&](const auto& b2) {
              using T2 = std::decay_t<decltype(b2)>;
              if constexpr (std::is_same_v<T2, AnnulusSum>) {
                for (const auto& t : b2.terms) {
                  edges.push_back(t.lambda / t.r);
                  edges.push_back(t.lambda * t.r);
                  edges.push_back(-t.lambda / t.r);
                  edges.push_back(-t.lambda * t.r);
                  reach = std::max(reach, t.lambda * t.r);
                }
              } else if constexpr (std::is_same_v<T2, GridDensity>) {
                const double h = 2.0 * b2.support_radius / b2.cells_per_axis;
                for (int i = 0; i <= b2.cells_per_axis; ++i)
                  edges.push_back(-b2.support_radius + i * h);
                reach = std::max(reach, b2.support_radius);
              }
            },
            sub->body);
      }
      const double qp = q - amax;
      if (!(qp > 0.0)) return {kInf, kInf, Method::full_quadrature};
      const double w =
          quad::gaussian_window(std::min(cfg.rel_tol, cfg.abs_tol)) *
              cfg.tail_safety / std::sqrt(qp) +
          std::abs(xx);
      const double lo = std::min(xx - w, -reach), hi = std::max(xx + w, reach);
      auto f = [&](double y) {
        double s = 0.0;
        for (const auto& [c, sub] : dens_comps)
          s += c * density_value(*sub, {y});
        return std::abs(s) * safe_exp(-q * (xx - y) * (xx - y) + lt);
      };
      std::vector<double> all{lo};
      std::sort(edges.begin(), edges.end());
      for (double e2 : edges)
        if (e2 > lo && e2 < hi) all.push_back(e2);
      all.push_back(hi);
      auto r = quad::gk_panels(f, all, cfg.rel_tol, cfg.abs_tol,
                               cfg.max_nodes_per_axis);
      v += r.value;
      e += r.error;
    } else {
      fail(errc::signed_data_unsupported,
           "overlapping signed densities: |mu| needs N = 1");
    }
  }
  return {v, e, Method::full_quadrature};
}

}  // namespace

ConvResult gaussian_convolution(const Measure& mu, const Point& x, double q,
                                bool absolute, const QuadratureConfig& cfg,
                                double log_tilt) {
  if (!(q > 0.0)) fail(errc::validation_error, "kernel exponent must be positive");
  return conv_dispatch(mu, x, q, absolute, cfg, log_tilt);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// evaluate and friends.
// ---------------------------------------------------------------------------

namespace {

EvalMethod to_public(detail::Method m) {
  switch (m) {
    case detail::Method::closed_form: return EvalMethod::closed_form;
    case detail::Method::radial_quadrature: return EvalMethod::radial_quadrature;
    default: return EvalMethod::full_quadrature;
  }
}

void check_window(const Measure& mu, double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    fail(errc::validation_error, "time must be positive and finite");
  const double eps0 = growth_index(mu).eps0;
  if (eps0 <= 0.0) return;
  const double T = 1.0 / (4.0 * eps0);
  if (t > T * (1.0 + 1e-12))
    fail(errc::beyond_maximal_time, "time exceeds the maximal existence time");
  if (t >= T * (1.0 - 1e-12))
    fail(errc::at_maximal_time,
         "evaluation at the maximal time is reserved for limit classification");
}

}  // namespace

SolutionValue evaluate(const Measure& mu, const Point& x, double t,
                       const QuadratureConfig& cfg) {
  cfg.validate();
  check_window(mu, t);
  const int N = mu.dimension;
  if (N > 3 && !std::holds_alternative<DiracComb>(mu.body) &&
      !std::holds_alternative<ExpQuadDensity>(mu.body))
    fail(errc::dimension_unsupported, "general evaluation needs N <= 3");

  const double q = 1.0 / (4.0 * t);
  const double pref = std::pow(q / std::numbers::pi, 0.5 * N);
  // Keep the absolute target meaningful after the prefactor is applied.
  QuadratureConfig local = cfg;
  if (pref > 1.0) local.abs_tol = std::max(cfg.abs_tol / pref, 1e-300);
  detail::ConvResult r = detail::gaussian_convolution(mu, x, q, false, local);
  SolutionValue out{pref * r.value, pref * r.error, to_public(r.method)};
  if (!std::isfinite(out.value))
    fail(errc::quadrature_failure, "solution value overflows double range");
  if (out.est_error >
      std::max(cfg.rel_tol * std::abs(out.value), cfg.abs_tol) * (1.0 + 1e-9))
    fail(errc::quadrature_failure, "error estimate exceeds tolerance target");
  return out;
}

// ---------------------------------------------------------------------------
// Derivatives.
// ---------------------------------------------------------------------------

namespace {

// Physicists' Hermite polynomials, H_0..H_4.
double hermite_poly(int n, double z) {
  switch (n) {
    case 0: return 1.0;
    case 1: return 2.0 * z;
    case 2: return 4.0 * z * z - 2.0;
    case 3: return 8.0 * z * z * z - 12.0 * z;
    case 4: return ((16.0 * z * z - 48.0) * z * z) + 12.0;
    default: fail(errc::order_unsupported, "Hermite factor beyond order 4");
  }
}

// d/dt of the spatial Hermite kernel factor
//   h(u,t) = prod_d (-1/(2 sqrt t))^{a_d} H_{a_d}(u_d / (2 sqrt t)).
// Using H_n' = 2n H_{n-1} and d z/dt = -z/(2t):
//   d/dt [ (-1/(2vt))^n H_n(z) ] = (-1/(2vt))^n [ -n/(2t) H_n - (n z / t) H_{n-1} ]
//   ... assembled below per axis by logarithmic differentiation of products.
struct AxisFactor {
  double value;
  double dt;  // time derivative of this axis factor
};

AxisFactor axis_factor(int n, double u, double t) {
  const double st = 2.0 * std::sqrt(t);
  const double z = u / st;
  const double scale = std::pow(-1.0 / st, n);
  const double h = hermite_poly(n, z);
  const double hm1 = n > 0 ? hermite_poly(n - 1, z) : 0.0;
  const double v = scale * h;
  // d scale/dt = scale * (-n/(2t));  dz/dt = -z/(2t); dH_n/dt = 2n H_{n-1} dz/dt.
  const double dv = scale * (-0.5 * n / t * h - n * z / t * hm1);
  return {v, dv};
}

// Kernel factor Q with  d^m/dt^m d^alpha/dx^alpha K = K * Q(u, t), u = x - y.
double kernel_factor(const std::vector<int>& alpha, int m, const Point& u,
                     double t, int N) {
  const double R = dot(u, u);
  // L = d/dt log K = R/(4t^2) - N/(2t).
  const double L = R / (4.0 * t * t) - 0.5 * N / t;
  if (m == 0 || std::all_of(alpha.begin(), alpha.end(),
                            [](int a) { return a == 0; })) {
    if (m == 0) {
      double h = 1.0;
      for (int d = 0; d < N; ++d)
        h *= axis_factor(d < (int)alpha.size() ? alpha[d] : 0, u[d], t).value;
      return h;
    }
    if (m == 1) return L;
    // m = 2:  K_tt / K = L^2 + L',  L' = N/(2t^2) - R/(2t^3).
    const double Lp = 0.5 * N / (t * t) - 0.5 * R / (t * t * t);
    return L * L + Lp;
  }
  // Mixed m = 1, |alpha| >= 1:  d/dt (K h) / K = L h + h_t.
  if (m != 1) fail(errc::order_unsupported, "mixed derivative needs m <= 1");
  double h = 1.0, hdot = 0.0;
  std::vector<AxisFactor> fs(N);
  for (int d = 0; d < N; ++d)
    fs[d] = axis_factor(d < (int)alpha.size() ? alpha[d] : 0, u[d], t);
  for (int d = 0; d < N; ++d) h *= fs[d].value;
  for (int d = 0; d < N; ++d) {
    double prod = fs[d].dt;
    for (int e = 0; e < N; ++e)
      if (e != d) prod *= fs[e].value;
    hdot += prod;
  }
  return L * h + hdot;
}

// Closed-form derivative of the exp-quadratic solution
//   u = (1-4At)^{-N/2} exp( (A|x|^2 + b.x + t|b|^2) / (1-4At) ),
// which separates across axes; per-axis x-derivatives via Bell polynomials.
SolutionValue expquad_closed_derivative(int N, const ExpQuadDensity& d,
                                        const Point& x_in, double t,
                                        const std::vector<int>& alpha, int m) {
  Point x = materialize(x_in, N);
  const Point ctr = materialize(d.center, N);
  for (int i = 0; i < N; ++i) x[i] -= ctr[i];
  const Point b = materialize(d.b, N);
  const double D = 1.0 - 4.0 * d.A * t;
  const double b2 = dot(b, b);
  const double E = (d.A * dot(x, x) + dot(b, x) + t * b2) / D;
  const double u = std::pow(D, -0.5 * N) * safe_exp(E);

  if (m == 0) {
    double factor = 1.0;
    for (int dim = 0; dim < N; ++dim) {
      const int n = dim < (int)alpha.size() ? alpha[dim] : 0;
      if (n == 0) continue;
      const double g = (2.0 * d.A * x[dim] + b[dim]) / D;  // phi'
      const double s = 2.0 * d.A / D;                      // phi''
      switch (n) {
        case 1: factor *= g; break;
        case 2: factor *= g * g + s; break;
        case 3: factor *= g * g * g + 3.0 * g * s; break;
        case 4: factor *= g * g * g * g + 6.0 * g * g * s + 3.0 * s * s; break;
        default: fail(errc::order_unsupported, "|alpha| per axis <= 4");
      }
    }
    const double v = u * factor;
    return {v, std::abs(v) * 1e-13, EvalMethod::closed_form};
  }
  // Pure time derivatives: log u = -(N/2) log D + E.
  const double P = d.A * dot(x, x) + dot(x, b) + t * b2;
  const double Dp = -4.0 * d.A;
  const double Et = (b2 * D - P * Dp) / (D * D);
  const double a1 = -0.5 * N * Dp / D + Et;
  if (m == 1) {
    const double v = u * a1;
    return {v, std::abs(v) * 1e-13, EvalMethod::closed_form};
  }
  // m = 2:  u_tt = u (a1^2 + a2) with a2 = d a1/dt.  Since dP/dt = b2,
  //   d/dt Et = d/dt [(b2 D - P Dp)/D^2] = -2 Dp (b2 D - P Dp)/D^3,
  // and d/dt [-(N/2) Dp/D] = (N/2) Dp^2/D^2.
  const double Ett = -2.0 * Dp * (b2 * D - P * Dp) / (D * D * D);
  const double a2 = 0.5 * N * Dp * Dp / (D * D) + Ett;
  const double v = u * (a1 * a1 + a2);
  return {v, std::abs(v) * 1e-12, EvalMethod::closed_form};
}

}  // namespace

SolutionValue evaluate_derivative(const Measure& mu, const Point& x, double t,
                                  const std::vector<int>& alpha, int m,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  check_window(mu, t);
  const int N = mu.dimension;
  int ao = 0;
  for (int a : alpha) {
    if (a < 0) fail(errc::validation_error, "negative derivative order");
    ao += a;
  }
  if ((int)alpha.size() > N)
    fail(errc::dimension_mismatch, "multi-index longer than dimension");
  if (m < 0 || ao + 2 * m > 4)
    fail(errc::order_unsupported, "supported orders: |alpha| + 2m <= 4");

  if (ao == 0 && m == 0) return evaluate(mu, x, t, cfg);

  const double q = 1.0 / (4.0 * t);
  const double pref = std::pow(q / std::numbers::pi, 0.5 * N);
  const Point xx = materialize(x, N);

  // Closed analytic paths.
  if (const auto* d = std::get_if<ExpQuadDensity>(&mu.body)) {
    const bool pure = (m == 0) || (ao == 0 && m <= 2);
    if (std::holds_alternative<ModOne>(d->modifier) && pure &&
        !cfg.force_quadrature)
      return expquad_closed_derivative(N, *d, x, t, alpha, m);
  }
  if (const auto* comb = std::get_if<DiracComb>(&mu.body)) {
    double s = 0.0, mag = 0.0;
    for (const auto& a : comb->atoms) {
      Point u = xx;
      const Point loc = materialize(a.location, N);
      for (int i = 0; i < N; ++i) u[i] -= loc[i];
      const double k = safe_exp(-q * dot(u, u));
      const double f = kernel_factor(alpha, m, u, t, N);
      s += a.weight * k * f;
      mag += std::abs(a.weight * k * f);
    }
    // kernel_factor differentiates the full kernel (4 pi t)^{-N/2} e^{-|u|^2/4t}
    // relative to K itself; the L term already carries the -N/(2t) from the
    // prefactor, so the plain prefactor closes the formula.
    const double v = pref * s;
    return {v, pref * mag * 1e-12 + cfg.abs_tol, EvalMethod::closed_form};
  }

  if (const auto* sum = std::get_if<Sum>(&mu.body)) {
    double v = 0.0, e = 0.0;
    EvalMethod meth = EvalMethod::closed_form;
    for (const auto& [c, sub] : sum->components) {
      SolutionValue r = evaluate_derivative(*sub, x, t, alpha, m, cfg);
      v += c * r.value;
      e += std::abs(c) * r.est_error;
      if (r.method != EvalMethod::closed_form) meth = r.method;
    }
    return {v, e, meth};
  }

  // Quadrature path: N = 1 with the kernel differentiated under the integral.
  if (N != 1)
    fail(errc::dimension_unsupported,
         "derivative quadrature implemented for N = 1");
  if (!detail::has_density(mu))
    fail(errc::not_factored, "no quadrature density available");

  const double eps0 = growth_index(mu).eps0;
  const double qp = q - eps0;
  if (!(qp > 0.0)) fail(errc::beyond_maximal_time, "window closed");
  const double w = quad::gaussian_window(std::min(cfg.rel_tol, cfg.abs_tol) *
                                         1e-3) *
                       cfg.tail_safety / std::sqrt(qp) +
                   1.0;
  auto f = [&](double y) {
    const Point u{xx[0] - y};
    const double k = safe_exp(-q * u[0] * u[0]);
    return k * kernel_factor(alpha, m, u, t, 1) *
           detail::density_value(mu, {y});
  };
  auto r = quad::gk_panels(
      f, {xx[0] - w, xx[0] - 0.5 * w, xx[0], xx[0] + 0.5 * w, xx[0] + w},
      cfg.rel_tol, cfg.abs_tol, cfg.max_nodes_per_axis);
  return {pref * r.value, pref * r.error + cfg.abs_tol,
          EvalMethod::full_quadrature};
}

// ---------------------------------------------------------------------------
// Sandwich bounds, weighted norms, residuals.
// ---------------------------------------------------------------------------

SandwichBounds sandwich_bounds(const Measure& mu, const Point& x, double t,
                               double a, double b,
                               const QuadratureConfig& cfg) {
  cfg.validate();
  if (sign_status(mu) != SignStatus::nonnegative)
    fail(errc::signed_data_unsupported, "sandwich bounds need nonnegative data");
  if (!(a > 1.0) || !(b > 0.0) || !(b < 1.0))
    fail(errc::validation_error, "need a > 1 and b in (0,1)");
  const int N = mu.dimension;
  const double x2 = dot(materialize(x, N), materialize(x, N));
  const double u_b = evaluate(mu, Point(N, 0.0), b * t, cfg).value;
  const double u_a = evaluate(mu, Point(N, 0.0), a * t, cfg).value;
  SandwichBounds out;
  out.lower = std::pow(b, 0.5 * N) * u_b *
              safe_exp(-x2 / (4.0 * (1.0 - b) * t));
  out.upper = std::pow(a, 0.5 * N) * u_a *
              safe_exp(x2 / (4.0 * (a - 1.0) * t));
  return out;
}

double l1eps_norm_of_solution(const Measure& mu, double t, double delta,
                              const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(delta > 0.0)) fail(errc::validation_error, "delta must be positive");
  if (!(t > 0.0)) fail(errc::validation_error, "t must be positive");
  const int N = mu.dimension;
  const double sd = std::sqrt(delta);
  check_window(mu, t);

  // Finiteness is decided first from the transported optimal index
  // eps(t) = eps0/(1 - 4 eps0 t): below it the weighted integral diverges no
  // matter what quadrature sees (the integrand can dip below the radar and
  // resurface far out, e.g. stretched-decay profiles), at it attainment
  // decides, above it the window closes.  Cancellation could beat this bound
  // for signed data, so the short-circuit applies to nonnegative data only.
  const GrowthIndex gi = growth_index(mu);
  if (gi.eps0 > 0.0 && sign_status(mu) == SignStatus::nonnegative) {
    const double eps_t = gi.eps0 / (1.0 - 4.0 * gi.eps0 * t);
    if (delta < eps_t * (1.0 - 1e-12)) return kInf;
    if (delta <= eps_t * (1.0 + 1e-12)) {
      if (gi.attained == Attainment::no) return kInf;
      if (gi.attained == Attainment::unknown)
        fail(errc::quadrature_failure,
             "attainment at the critical index is undecided");
    }
  }

  // (delta/pi)^{N/2} integral e^{-delta|x|^2}|u| dx.  In one dimension the
  // weighted integrand is evaluated with the Gaussian weight folded into the
  // convolution exponentials (log tilt), so data growing almost as fast as
  // the weight decays stays representable.  The window doubles outward until
  // the newest shell stops contributing; shells whose edge values keep
  // quadrupling signal a divergent integral.
  if (N == 1) {
    const double q = 1.0 / (4.0 * t);
    const double pref =
        std::sqrt(q / std::numbers::pi) * sd / std::sqrt(std::numbers::pi);
    auto h = [&](double x) {
      auto r = detail::gaussian_convolution(mu, {x}, q, false, cfg,
                                            -delta * x * x);
      return std::abs(r.value);
    };
    const double tol = std::min(cfg.rel_tol, cfg.abs_tol);
    double w = quad::gaussian_window(tol) * cfg.tail_safety / sd;
    auto base = quad::gk_panels(h, {-w, 0.0, w}, cfg.rel_tol, cfg.abs_tol,
                                cfg.max_nodes_per_axis);
    double total = base.value;
    double edge_prev = h(w) + h(-w);
    int growth_streak = 0;
    for (int round = 0; round < 14; ++round) {
      auto left = quad::gk_adaptive(h, -2.0 * w, -w, cfg.rel_tol, cfg.abs_tol,
                                    cfg.max_nodes_per_axis);
      auto right = quad::gk_adaptive(h, w, 2.0 * w, cfg.rel_tol, cfg.abs_tol,
                                     cfg.max_nodes_per_axis);
      const double shell = left.value + right.value;
      total += shell;
      const double edge = h(2.0 * w) + h(-2.0 * w);
      growth_streak = edge > 4.0 * edge_prev ? growth_streak + 1 : 0;
      if (growth_streak >= 2) return kInf;
      edge_prev = edge;
      w *= 2.0;
      if (shell <= std::max(cfg.rel_tol * std::abs(total), cfg.abs_tol) &&
          edge * w <= std::max(cfg.rel_tol * std::abs(total), cfg.abs_tol))
        return pref * total;
    }
    fail(errc::quadrature_failure, "weighted norm window did not close");
  }
  if (N > 3) fail(errc::dimension_unsupported, "weighted norm needs N <= 3");
  // Tensor Gauss-Hermite with order doubling.
  double prev = 0.0;
  bool have = false;
  for (int order = 16; order <= 64; order *= 2) {
    const auto& xs = quad::hermite_nodes(order);
    const auto& ws = quad::hermite_weights(order);
    double s = 0.0;
    std::vector<int> idx(N, 0);
    while (true) {
      double w = 1.0;
      Point p(N, 0.0);
      for (int d = 0; d < N; ++d) {
        w *= ws[idx[d]];
        p[d] = xs[idx[d]] / sd;
      }
      s += w * std::abs(evaluate(mu, p, t, cfg).value);
      int d = N - 1;
      for (; d >= 0; --d) {
        if (++idx[d] < order) break;
        idx[d] = 0;
      }
      if (d < 0) break;
    }
    s *= std::pow(std::numbers::pi, -0.5 * N);
    if (!std::isfinite(s)) return kInf;
    if (have && std::abs(s - prev) <=
                    std::max(cfg.rel_tol * 10.0 * std::abs(s), cfg.abs_tol))
      return s;
    prev = s;
    have = true;
  }
  fail(errc::quadrature_failure, "weighted norm did not converge");
}

double semigroup_residual(const Measure& mu, double s, double t,
                          const std::vector<Point>& probes,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(s > 0.0) || !(t > s))
    fail(errc::validation_error, "need 0 < s < t");
  if (mu.dimension != 1)
    fail(errc::dimension_unsupported, "resampling implemented for N = 1");

  double probe_reach = 0.0;
  for (const auto& p : probes) probe_reach = std::max(probe_reach, std::abs(get(p, 0)));

  // Envelope of u(., s): a^{N/2} u(0, as) e^{y^2/(4(a-1)s)} with a chosen to
  // flatten the rate while staying inside the window.
  const double eps0 = growth_index(mu).eps0;
  const double T = eps0 > 0.0 ? 1.0 / (4.0 * eps0) : kInf;
  const double a = std::isfinite(T) ? 0.5 * (1.0 + T / s) : 16.0;
  const double rate = 1.0 / (4.0 * (a - 1.0) * s);
  const double Cenv = std::pow(a, 0.5) *
                      evaluate(mu, {0.0}, std::min(a * s, 0.99 * T), cfg).value;
  const double qk = 1.0 / (4.0 * (t - s));
  if (!(qk > rate))
    fail(errc::quadrature_failure, "resampling envelope does not close");

  // Tail of the discarded region, via |x-y|^2 >= (1-d)y^2 + (1-1/d)x^2.
  const double dsplit = 0.5 * (1.0 - rate / qk);
  const double beta = qk * (1.0 - dsplit) - rate;
  double L = 4.0 * std::sqrt(t - s) + probe_reach + 1.0;
  const double kpref = std::pow(4.0 * std::numbers::pi * (t - s), -0.5);
  for (int it = 0; it < 200; ++it) {
    const double bound = kpref * Cenv *
                         safe_exp(qk * (1.0 / dsplit - 1.0) * probe_reach *
                                  probe_reach) *
                         std::sqrt(std::numbers::pi / beta) *
                         std::erfc(std::sqrt(beta) * L);
    if (bound < 0.01 * cfg.abs_tol) break;
    L *= 1.25;
  }
  L *= cfg.tail_safety;

  // Resample u(., s) onto a grid resolving the kernel length scale.  The cell
  // average differs from the centre value by (h^2/24) u'' + O(h^4); the
  // three-point correction below removes that defect so the piecewise-
  // constant measure carries the correct cell masses to O(h^4).  The shape
  // inside each cell is still constant, which leaves an O(h^2) cross moment
  // against the kernel slope, so the step must be well below the kernel
  // length scale.
  const double h = 2.0 * std::sqrt(t - s) / 512.0;
  const int n = static_cast<int>(std::ceil(2.0 * L / h));
  const double R = 0.5 * n * h;
  std::vector<double> centre(n + 2);
  for (int i = -1; i <= n; ++i) {
    const double y = -R + (i + 0.5) * h;
    centre[i + 1] = evaluate(mu, {y}, s, cfg).value;
  }
  std::vector<double> samples(n);
  for (int i = 0; i < n; ++i)
    samples[i] = centre[i + 1] +
                 (centre[i] - 2.0 * centre[i + 1] + centre[i + 2]) / 24.0;
  Measure grid{1, GridDensity{R, n, std::move(samples)}};

  double worst = 0.0;
  for (const auto& p : probes) {
    const double direct = evaluate(mu, p, t, cfg).value;
    const double stepped = evaluate(grid, p, t - s, cfg).value;
    worst = std::max(worst, std::abs(direct - stepped));
  }
  return worst;
}

double heat_residual(const Measure& mu, const Point& x, double t,
                     const QuadratureConfig& cfg) {
  const SolutionValue ut = evaluate_derivative(mu, x, t, {}, 1, cfg);
  double lap = 0.0;
  for (int d = 0; d < mu.dimension; ++d) {
    std::vector<int> alpha(mu.dimension, 0);
    alpha[d] = 2;
    lap += evaluate_derivative(mu, x, t, alpha, 0, cfg).value;
  }
  return std::abs(ut.value - lap);
}

bool smoothing_decay_check(const Measure& mu, double t, double qexp,
                           const QuadratureConfig& cfg) {
  cfg.validate();
  const double btv = btv_norm(mu, cfg);
  if (!std::isfinite(btv))
    fail(errc::validation_error, "smoothing check needs finite total variation");
  const int N = mu.dimension;
  const double expo = 0.5 * N * (1.0 - (std::isinf(qexp) ? 0.0 : 1.0 / qexp));
  const double rhs = std::pow(4.0 * std::numbers::pi * t, -expo) * btv *
                     (1.0 + 10.0 * cfg.rel_tol);

  if (std::isinf(qexp)) {
    // Probe max with candidates from the measure's own geometry.
    std::vector<double> xs{0.0};
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, DiracComb>) {
            for (const auto& a : body.atoms) xs.push_back(get(a.location, 0));
          } else if constexpr (std::is_same_v<T, GridDensity>) {
            for (int i = 0; i <= 8; ++i)
              xs.push_back(-body.support_radius +
                           i * body.support_radius / 4.0);
          }
        },
        mu.body);
    for (double step = -3.0; step <= 3.0; step += 0.25) xs.push_back(step);
    double mx = 0.0;
    for (double xv : xs) {
      Point p(N, 0.0);
      p[0] = xv;
      mx = std::max(mx, std::abs(evaluate(mu, p, t, cfg).value));
    }
    return mx <= rhs;
  }
  if (N != 1)
    fail(errc::dimension_unsupported, "L^q probe norm implemented for N = 1");
  const double L = 10.0 + 10.0 * std::sqrt(t);
  auto f = [&](double xv) {
    return std::pow(std::abs(evaluate(mu, {xv}, t, cfg).value), qexp);
  };
  auto r = quad::gk_panels(f, {-L, 0.0, L}, cfg.rel_tol * 100.0, cfg.abs_tol,
                           cfg.max_nodes_per_axis);
  const double lq = std::pow(r.value, 1.0 / qexp);
  return lq <= rhs;
}

}  // namespace hg
