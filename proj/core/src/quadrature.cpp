#include "hg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <utility>

#include "hg/error.hpp"

namespace hg {

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || rel_tol > 0.1)
    fail(errc::validation_error, "rel_tol must lie in (0, 0.1]");
  if (!(abs_tol > 0.0))
    fail(errc::validation_error, "abs_tol must be positive");
  if (max_nodes_per_axis < 16)
    fail(errc::validation_error, "max_nodes_per_axis must be at least 16");
  if (!(tail_safety >= 1.0))
    fail(errc::validation_error, "tail_safety must be at least 1");
  if (angular_nodes < 4)
    fail(errc::validation_error, "angular_nodes must be at least 4");
}

namespace quad_stats {
namespace {
std::uint64_t g_nodes = 0;
}
std::uint64_t nodes_used() noexcept { return g_nodes; }
void reset() noexcept { g_nodes = 0; }
void add(std::uint64_t n) noexcept { g_nodes += n; }
}  // namespace quad_stats

}  // namespace hg

namespace hg::quad {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK abscissae).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double error;
};

// One Gauss-Kronrod 7-15 application; error estimate follows QUADPACK's
// rescaled difference heuristic.
Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double hlgth = 0.5 * (b - a);
  const double centre = 0.5 * (a + b);

  double fv[15];
  for (int j = 0; j < 7; ++j) {
    fv[j] = f(centre - hlgth * kXgk[j]);
    fv[14 - j] = f(centre + hlgth * kXgk[j]);
  }
  fv[7] = f(centre);
  quad_stats::add(15);

  double resg = kWg[3] * fv[7];
  double resk = kWgk[7] * fv[7];
  for (int j = 0; j < 7; ++j) {
    const double sum = fv[j] + fv[14 - j];
    resk += kWgk[j] * sum;
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }

  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fv[7] - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] *
              (std::abs(fv[j] - reskh) + std::abs(fv[14 - j] - reskh));
  resasc *= std::abs(hlgth);

  double err = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return {a, b, resk * hlgth, err};
}

struct PanelOrder {
  bool operator()(const Panel& p, const Panel& q) const {
    if (p.error != q.error) return p.error < q.error;
    return p.a < q.a;  // deterministic tie-break
  }
};

Result adapt(const std::function<double(double)>& f,
             std::vector<Panel> initial, double rel_tol, double abs_tol,
             int max_nodes) {
  std::priority_queue<Panel, std::vector<Panel>, PanelOrder> heap;
  double total = 0.0, toterr = 0.0;
  int nodes = 15 * static_cast<int>(initial.size());
  for (auto& p : initial) {
    total += p.value;
    toterr += p.error;
    heap.push(p);
  }

  while (toterr > std::max(rel_tol * std::abs(total), abs_tol) &&
         nodes + 30 <= max_nodes) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // cannot refine further
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    nodes += 30;
    total += left.value + right.value - worst.value;
    toterr += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  return {total, toterr};
}

}  // namespace

Result gk_adaptive(const std::function<double(double)>& f, double a, double b,
                   double rel_tol, double abs_tol, int max_nodes) {
  if (a == b) return {0.0, 0.0};
  return adapt(f, {gk15(f, a, b)}, rel_tol, abs_tol, max_nodes);
}

Result gk_panels(const std::function<double(double)>& f,
                 const std::vector<double>& edges, double rel_tol,
                 double abs_tol, int max_nodes) {
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (edges[i + 1] > edges[i]) panels.push_back(gk15(f, edges[i], edges[i + 1]));
  if (panels.empty()) return {0.0, 0.0};
  return adapt(f, std::move(panels), rel_tol, abs_tol, max_nodes);
}

namespace {

// Orthonormal Hermite polynomials for the weight e^{-x^2}:
//   p0 = pi^{-1/4},  p_{k+1} = x sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1}.
// Evaluation stays O(1)-bounded near the nodes, so weights via
//   w_i = 1 / (n * p_{n-1}(x_i)^2)
// are well conditioned even at high order.
struct HermiteEval {
  double pn;    // p_n(x)
  double pnm1;  // p_{n-1}(x)
};

HermiteEval hermite_eval(int n, double x) {
  const double anorm = std::pow(std::numbers::pi, -0.25);
  double pm1 = anorm;          // p_0
  double pm2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = x * std::sqrt(2.0 / (k + 1)) * pm1 -
                     std::sqrt(static_cast<double>(k) / (k + 1)) * pm2;
    pm2 = pm1;
    pm1 = p;
  }
  return {pm1, pm2};
}

void hermite_compute(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = n / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // Initial guesses: largest root first, then spaced estimates.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    for (int it = 0; it < 100; ++it) {
      const HermiteEval e = hermite_eval(n, z);
      const double pp = std::sqrt(2.0 * n) * e.pnm1;  // p_n'(z)
      const double dz = e.pn / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    const HermiteEval e = hermite_eval(n, z);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 1.0 / (n * e.pnm1 * e.pnm1);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) {
    const HermiteEval e = hermite_eval(n, 0.0);
    x[m] = 0.0;
    w[m] = 1.0 / (n * e.pnm1 * e.pnm1);
  }
}

struct HermiteTable {
  std::vector<double> nodes, weights;
};

const HermiteTable& hermite_table(int n) {
  if (n < 2) fail(errc::validation_error, "Hermite order must be >= 2");
  static std::map<int, HermiteTable> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    HermiteTable t;
    hermite_compute(n, t.nodes, t.weights);
    it = cache.emplace(n, std::move(t)).first;
  }
  return it->second;
}

}  // namespace

const std::vector<double>& hermite_nodes(int n) { return hermite_table(n).nodes; }
const std::vector<double>& hermite_weights(int n) {
  return hermite_table(n).weights;
}

Result hermite_adaptive(const std::function<double(double)>& g, double rel_tol,
                        double abs_tol, int max_order) {
  double prev = 0.0;
  bool have_prev = false;
  Result out{0.0, std::numeric_limits<double>::infinity()};
  for (int n = 16; n <= std::max(16, max_order); n *= 2) {
    const auto& xs = hermite_table(n).nodes;
    const auto& ws = hermite_table(n).weights;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += ws[i] * g(xs[i]);
    quad_stats::add(static_cast<std::uint64_t>(n));
    if (have_prev) {
      const double diff = std::abs(s - prev);
      out = {s, diff};
      if (diff <= std::max(rel_tol * std::abs(s), abs_tol)) return out;
    } else {
      out = {s, std::abs(s)};
    }
    prev = s;
    have_prev = true;
  }
  return out;
}

double i0e(double kappa) {
  if (kappa < 0.0) fail(errc::validation_error, "i0e requires kappa >= 0");
  if (kappa <= 15.0) {
    // e^{-kappa} * sum_m (kappa^2/4)^m / (m!)^2, summed to machine precision.
    const double q = 0.25 * kappa * kappa;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m < 200; ++m) {
      term *= q / (static_cast<double>(m) * m);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::exp(-kappa) * sum;
  }
  // Asymptotic series (2 pi kappa)^{-1/2} sum_k a_k, truncated at the
  // smallest term; at the crossover the truncation error is ~1e-13 relative.
  double a = 1.0, sum = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double next = a * (2.0 * k + 1.0) * (2.0 * k + 1.0) /
                        (8.0 * kappa * (k + 1.0));
    if (next >= a || next < 1e-17 * sum) {
      if (next < a) sum += next;
      break;
    }
    a = next;
    sum += a;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * kappa);
}

double angular_tilde(int N, double kappa) {
  switch (N) {
    case 1:
      return 1.0 + std::exp(-2.0 * kappa);
    case 2:
      return 2.0 * std::numbers::pi * i0e(kappa);
    case 3:
      if (kappa < 1e-4)
        return 4.0 * std::numbers::pi *
               (1.0 - kappa + (2.0 / 3.0) * kappa * kappa);
      return 2.0 * std::numbers::pi * (-std::expm1(-2.0 * kappa)) / kappa;
    default:
      fail(errc::dimension_unsupported, "angular factor needs N in {1,2,3}");
  }
}

double sphere_area(int N) {
  switch (N) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: fail(errc::dimension_unsupported, "sphere_area needs N in {1,2,3}");
  }
}

double ball_volume(int N) {
  switch (N) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: fail(errc::dimension_unsupported, "ball_volume needs N in {1,2,3}");
  }
}

double gaussian_window(double tol) {
  const double t = std::clamp(tol, 1e-300, 0.5);
  return std::sqrt(std::max(1.0, -std::log(t)));
}

}  // namespace hg::quad
