#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <optional>
#include <vector>

#include "hg/error.hpp"
#include "hg/trace.hpp"

#include "helpers.hpp"

using namespace hg;

namespace {

template <class F>
std::optional<errc> thrown_code(F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  return std::nullopt;
}

TraceSeries exp_trace() {
  // gamma(t) = e^t to machine precision on [0, 1.5).
  return build_trace_solution(std::vector<double>(80, 1.0), 2.0, 2.0, 1.5);
}

}  // namespace

TEST_CASE("the exponential trace reproduces e^t cosh x") {
  TraceSeries s = exp_trace();
  CHECK(eval_trace_solution(s, 1.0, 0.0).value ==
        doctest::Approx(1.5430806348152439).epsilon(1e-12));
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0})
    for (double t : {0.0, 0.25, 0.75, 1.0}) {
      const double expect = std::exp(t) * std::cosh(x);
      CHECK(eval_trace_solution(s, x, t).value ==
            doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("the value on the axis is the prescribed trace") {
  TraceSeries poly = build_trace_solution({1.0, -2.0, 2.0}, 4.0, 1.0, 1.0);
  for (double t : {0.0, 0.3, 0.9}) {
    const double gamma = 1.0 - 2.0 * t + t * t;
    CHECK(eval_trace_solution(poly, 0.0, t).value ==
          doctest::Approx(gamma).epsilon(1e-13));
  }
  TraceSeries s = exp_trace();
  for (double t : {0.0, 0.5, 1.2})
    CHECK(eval_trace_solution(s, 0.0, t).value ==
          doctest::Approx(std::exp(t)).epsilon(1e-11));
}

TEST_CASE("formal derivatives of the trace") {
  TraceSeries poly = build_trace_solution({1.0, -2.0, 2.0}, 4.0, 1.0, 1.0);
  CHECK(trace_derivative(poly, 1, 0.3) == doctest::Approx(-1.4).epsilon(1e-14));
  CHECK(trace_derivative(poly, 2, 0.9) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(trace_derivative(poly, 3, 0.5) == doctest::Approx(0.0));
  TraceSeries s = exp_trace();
  CHECK(trace_derivative(s, 2, 0.5) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("a linear trace gives the explicit caloric polynomial") {
  // gamma = t solves with u = t + x^2/2.
  TraceSeries s = build_trace_solution({0.0, 1.0}, 2.0, 1.0, 1.0, 48);
  CHECK(eval_trace_solution(s, 2.0, 0.5).value ==
        doctest::Approx(2.5).epsilon(1e-12));
  TraceSeries wide = build_trace_solution({0.0, 1.0}, 4.0, 1.0, 1.0, 32);
  CHECK(eval_trace_solution(wide, 2.0, 0.5).value ==
        doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("the tail certificate refuses truncations it cannot close") {
  TraceSeries s = build_trace_solution({0.0, 1.0}, 4.0, 1.0, 1.0, 16);
  CHECK(thrown_code([&] { (void)eval_trace_solution(s, 2.0, 0.5); }) ==
        errc::tail_not_closed);
}

TEST_CASE("coefficients violating the declared envelope are rejected") {
  std::vector<double> bad(6, 0.0);
  bad[5] = 1000.0;  // 5! = 120 < 1000 with C = tau = 1
  CHECK(thrown_code([&] {
          (void)build_trace_solution(bad, 1.0, 1.0, 1.0);
        }) == errc::inconsistent_bound);
  CHECK_NOTHROW((void)build_trace_solution(bad, 10.0, 1.0, 1.0));
}

TEST_CASE("the heat residual of the series vanishes") {
  TraceSeries poly = build_trace_solution({1.0, -2.0, 2.0}, 4.0, 1.0, 1.0);
  // Term-by-term differentiation telescopes exactly for polynomial traces.
  CHECK(verify_trace(poly, {0.0, 0.25, 0.5}, {-2.0, 0.0, 1.0, 3.0}) == 0.0);
  TraceSeries s = exp_trace();
  CHECK(verify_trace(s, {0.0, 0.5, 1.0}, {-3.0, -1.0, 0.0, 2.0, 3.0}) <= 1e-8);
}

TEST_CASE("initial data extraction") {
  TraceSeries poly = build_trace_solution({1.0, -2.0, 2.0}, 4.0, 1.0, 1.0);
  const TraceInitialData d = initial_data_of_trace(poly);
  REQUIRE(d.coefficients.size() >= 3);
  CHECK(d.coefficients[0] == doctest::Approx(1.0));
  CHECK(d.coefficients[1] == doctest::Approx(-1.0));
  CHECK(d.coefficients[2] == doctest::Approx(1.0 / 12.0));
  for (std::size_t k = 3; k < d.coefficients.size(); ++k)
    CHECK(d.coefficients[k] == doctest::Approx(0.0));
  // u0(x) = 1 - x^2 + x^4/12 dips to -2 at x = sqrt(6).
  CHECK_FALSE(d.positive_on_probes);
  CHECK(d.min_probe_value <= -1.6);

  const TraceInitialData cosh_data = initial_data_of_trace(exp_trace());
  CHECK(cosh_data.positive_on_probes);
  CHECK(cosh_data.min_probe_value > 0.0);
}

TEST_CASE("evaluation outside the declared horizon is refused") {
  TraceSeries s = build_trace_solution({0.0, 1.0}, 2.0, 1.0, 0.75, 48);
  CHECK_NOTHROW((void)eval_trace_solution(s, 0.5, 0.5));
  CHECK(thrown_code([&] { (void)eval_trace_solution(s, 0.5, 0.75); }) ==
        errc::validation_error);
  CHECK(thrown_code([&] { (void)eval_trace_solution(s, 0.5, -0.1); }) ==
        errc::validation_error);
}

TEST_CASE("the embedding flag leaves the one-dimensional profile unchanged") {
  TraceSeries s = exp_trace();
  TraceSeries embedded = s;
  embedded.embed = true;
  CHECK(eval_trace_solution(embedded, 1.0, 0.5).value ==
        doctest::Approx(eval_trace_solution(s, 1.0, 0.5).value));
}
