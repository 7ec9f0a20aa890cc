#pragma once

#include <vector>

#include "hg/config.hpp"
#include "hg/kernel.hpp"

namespace hg {

// Even-power series solution with prescribed origin trace:
//   u(x, t) = sum_k  gamma^{(k)}(t) x^{2k} / (2k)!,
// where gamma(t) = sum_k alpha_k t^k / k! is real-analytic with the derivative
// envelope |gamma^{(k)}(t)| <= C k! / tau^k near 0.
struct TraceSeries {
  std::vector<double> gamma_coeffs;  // alpha_k
  double C = 1.0;
  double tau = 1.0;
  double horizon = 1.0;  // trace valid for t in [0, horizon)
  int truncation = 64;
  bool embed = false;  // evaluate as u(x_1, ..., x_N, t) = u(x_1, t)
};

TraceSeries build_trace_solution(std::vector<double> gamma_coeffs, double C,
                                 double tau, double horizon,
                                 int truncation = 64);

// gamma^{(k)}(t) by formal Taylor shift of the coefficient list.
double trace_derivative(const TraceSeries& s, int k, double t);

SolutionValue eval_trace_solution(const TraceSeries& s, double x, double t,
                                  const QuadratureConfig& cfg = {});

struct TraceInitialData {
  std::vector<double> coefficients;  // u0(x) = sum_k coefficients[k] x^{2k}
  bool positive_on_probes = true;
  double min_probe_value = 0.0;
};

TraceInitialData initial_data_of_trace(const TraceSeries& s);

// Max |d_t u - d_x^2 u| over the sample grid (term-by-term differentiation).
double verify_trace(const TraceSeries& s, const std::vector<double>& t_samples,
                    const std::vector<double>& x_samples,
                    const QuadratureConfig& cfg = {});

}  // namespace hg
