#include "hg/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hg/error.hpp"

namespace hg {

namespace {

// Envelope constants shifted to time t: from |gamma^{(k)}(0)| <= C k!/tau^k,
// summing the shifted Taylor series against binomial weights gives
//   |gamma^{(k)}(t)| <= (C tau/(tau-t)) * k! / (tau-t)^k,   0 <= t < tau.
struct Envelope {
  double C;
  double tau;
};

Envelope shifted_envelope(const TraceSeries& s, double t) {
  if (!(t < s.tau))
    fail(errc::tail_not_closed,
         "time reaches the analyticity radius; no tail certificate");
  return {s.C * s.tau / (s.tau - t), s.tau - t};
}

// log of the envelope term  C_t k! / tau_t^k * x^{2k} / (2k)!.
double log_tail_term(const Envelope& e, int k, double x) {
  const double lx = x == 0.0 ? -std::numeric_limits<double>::infinity()
                             : 2.0 * k * std::log(std::abs(x));
  return std::log(e.C) + std::lgamma(k + 1.0) - k * std::log(e.tau) + lx -
         std::lgamma(2.0 * k + 1.0);
}

void check_time(const TraceSeries& s, double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    fail(errc::validation_error, "time must be finite and nonnegative");
  if (!(t < s.horizon))
    fail(errc::validation_error, "time outside the trace horizon");
}

}  // namespace

TraceSeries build_trace_solution(std::vector<double> gamma_coeffs, double C,
                                 double tau, double horizon, int truncation) {
  if (gamma_coeffs.empty())
    fail(errc::validation_error, "need at least one trace coefficient");
  if (!(C > 0.0) || !(tau > 0.0))
    fail(errc::validation_error, "envelope constants must be positive");
  if (!(horizon > 0.0))
    fail(errc::validation_error, "horizon must be positive");
  if (truncation < 4)
    fail(errc::validation_error, "truncation must be at least 4");
  const double logC = std::log(C), logtau = std::log(tau);
  for (std::size_t k = 0; k < gamma_coeffs.size(); ++k) {
    const double a = std::abs(gamma_coeffs[k]);
    if (a == 0.0) continue;
    const double bound = logC + std::lgamma(k + 1.0) - double(k) * logtau;
    if (std::log(a) > bound + 1e-12)
      fail(errc::inconsistent_bound,
           "coefficient " + std::to_string(k) + " violates the C, tau envelope");
  }
  TraceSeries s;
  s.gamma_coeffs = std::move(gamma_coeffs);
  s.C = C;
  s.tau = tau;
  s.horizon = horizon;
  s.truncation = truncation;
  return s;
}

double trace_derivative(const TraceSeries& s, int k, double t) {
  if (k < 0) fail(errc::validation_error, "derivative order must be >= 0");
  const auto& a = s.gamma_coeffs;
  if (static_cast<std::size_t>(k) >= a.size()) return 0.0;
  // gamma^{(k)}(t) = sum_j a_{k+j} t^j / j!
  double sum = 0.0, term = 1.0;
  for (std::size_t j = 0; k + j < a.size(); ++j) {
    if (j > 0) term *= t / double(j);
    sum += a[k + j] * term;
  }
  return sum;
}

SolutionValue eval_trace_solution(const TraceSeries& s, double x, double t,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  check_time(s, t);
  const Envelope env = shifted_envelope(s, t);

  const int K = s.truncation;
  double value = 0.0;
  double x2k = 1.0;  // x^{2k} / (2k)!
  double noise = 0.0;
  for (int k = 0; k < K; ++k) {
    if (k > 0) x2k *= x * x / ((2.0 * k - 1.0) * (2.0 * k));
    const double term = trace_derivative(s, k, t) * x2k;
    value += term;
    noise += std::abs(term);
    if (x2k == 0.0 && k > 0) break;
  }

  // Envelope tail beyond the truncation: ratio of consecutive envelope terms
  // is (k+1)x^2 / (tau_t (2k+1)(2k+2)), decreasing in k; certify with a
  // geometric bound once it drops below 1/2.
  double tail = 0.0;
  if (x != 0.0) {
    const double ratio =
        (K + 1.0) * x * x / (env.tau * (2.0 * K + 1.0) * (2.0 * K + 2.0));
    if (ratio >= 0.5)
      fail(errc::tail_not_closed,
           "envelope tail does not contract at this point");
    const double lt = log_tail_term(env, K, x);
    tail = (lt < 700.0 ? std::exp(lt) : std::numeric_limits<double>::infinity()) /
           (1.0 - ratio);
    if (!(tail <= std::max(cfg.rel_tol * std::abs(value), cfg.abs_tol)))
      fail(errc::tail_not_closed,
           "envelope tail exceeds the requested tolerance");
  }
  return {value, tail + noise * 1e-15, EvalMethod::closed_form};
}

TraceInitialData initial_data_of_trace(const TraceSeries& s) {
  TraceInitialData out;
  double fact = 1.0;  // (2k)!
  for (std::size_t k = 0;
       k < s.gamma_coeffs.size() &&
       k < static_cast<std::size_t>(s.truncation);
       ++k) {
    if (k > 0) fact *= (2.0 * k - 1.0) * (2.0 * k);
    out.coefficients.push_back(s.gamma_coeffs[k] / fact);
  }
  out.min_probe_value = std::numeric_limits<double>::infinity();
  for (int i = -16; i <= 16; ++i) {
    const double x = 0.25 * i;
    double u0 = 0.0, p = 1.0;
    for (double c : out.coefficients) {
      u0 += c * p;
      p *= x * x;
    }
    out.min_probe_value = std::min(out.min_probe_value, u0);
  }
  out.positive_on_probes = out.min_probe_value > 0.0;
  return out;
}

double verify_trace(const TraceSeries& s, const std::vector<double>& t_samples,
                    const std::vector<double>& x_samples,
                    const QuadratureConfig& cfg) {
  cfg.validate();
  double worst = 0.0;
  for (double t : t_samples) {
    check_time(s, t);
    shifted_envelope(s, t);  // throws if the tail machinery cannot reach t
    for (double x : x_samples) {
      // d_t u and d_x^2 u of the truncated series, term by term.  They agree
      // except for the boundary term gamma^{(K)} x^{2K-2}/(2K-2)!.
      const int K = s.truncation;
      double ut = 0.0, uxx = 0.0;
      double x2k = 1.0;
      for (int k = 0; k < K; ++k) {
        if (k > 0) x2k *= x * x / ((2.0 * k - 1.0) * (2.0 * k));
        ut += trace_derivative(s, k + 1, t) * x2k;
        if (k + 1 < K) uxx += trace_derivative(s, k + 1, t) * x2k;
      }
      worst = std::max(worst, std::abs(ut - uxx));
    }
  }
  return worst;
}

}  // namespace hg
