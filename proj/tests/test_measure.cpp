#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "hg/error.hpp"
#include "hg/measure.hpp"

#include "helpers.hpp"

using namespace hg;
constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

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

}  // namespace

// ---------------------------------------------------------------------------
// Structural validation.
// ---------------------------------------------------------------------------

TEST_CASE("validate accepts every canonical family") {
  CHECK_NOTHROW(validate(th::growth_plain()));
  CHECK_NOTHROW(validate(th::growth_power()));
  CHECK_NOTHROW(validate(th::growth_expdecay()));
  CHECK_NOTHROW(validate(th::growth_exppower()));
  CHECK_NOTHROW(validate(th::growth_stretched()));
  CHECK_NOTHROW(validate(th::comb_on_Z(4)));
  CHECK_NOTHROW(validate(th::box()));
  CHECK_NOTHROW(validate(th::staircase(6)));
}

TEST_CASE("validate rejects out-of-range family parameters") {
  AnnulusSum a;
  a.terms.push_back({1.0, 2.0, 1.0});  // aspect ratio must exceed 1
  CHECK(thrown_code([&] { validate(Measure{1, a}); }) ==
        errc::validation_error);

  a.terms = {{-1.0, 2.0, 2.0}};  // negative shell weight
  CHECK(thrown_code([&] { validate(Measure{1, a}); }) ==
        errc::validation_error);

  a.terms = {{1.0, 4.0, 2.0}, {1.0, 2.0, 2.0}};  // scales must increase
  CHECK(thrown_code([&] { validate(Measure{1, a}); }) ==
        errc::validation_error);

  a.terms = {{1.0, 2.0, 4.0}, {1.0, 3.0, 4.0}};  // overlapping shells
  CHECK(thrown_code([&] { validate(Measure{1, a}); }) ==
        errc::validation_error);

  CHECK(thrown_code([&] {
          validate(th::expquad(1, 0.25, ModPowerDecay{0.0}));
        }) == errc::validation_error);
  CHECK(thrown_code([&] {
          validate(th::expquad(1, 0.25, ModStretchedExpDecay{1.0, 2.5}));
        }) == errc::validation_error);
  CHECK(thrown_code([&] {
          validate(th::expquad(1, 0.25, ModStretchedExpDecay{1.0, 1.0}));
        }) == errc::validation_error);

  HalfSpacePiece h;
  h.n = {0.5};  // not a unit vector
  h.A = 0.25;
  CHECK(thrown_code([&] { validate(Measure{1, h}); }) ==
        errc::validation_error);
  h.n = {1.0};
  h.c = -1.0;
  CHECK(thrown_code([&] { validate(Measure{1, h}); }) ==
        errc::validation_error);
  h.c = 0.0;
  h.strict = true;  // strict constraint needs positive offset
  CHECK(thrown_code([&] { validate(Measure{1, h}); }) ==
        errc::validation_error);
  h.strict = false;
  h.A = 0.0;
  CHECK(thrown_code([&] { validate(Measure{1, h}); }) ==
        errc::validation_error);

  GridDensity g;
  g.support_radius = 1.0;
  g.cells_per_axis = 2;
  g.samples = {1.0, 2.0, 3.0};  // needs 2 samples in one dimension
  CHECK(thrown_code([&] { validate(Measure{1, g}); }) ==
        errc::validation_error);
  g.samples = {1.0, 2.0};
  g.support_radius = 0.0;
  CHECK(thrown_code([&] { validate(Measure{1, g}); }) ==
        errc::validation_error);

  CHECK(thrown_code([&] { validate(Measure{0, DiracComb{}}); }) ==
        errc::validation_error);

  DiracComb c;
  c.atoms.push_back({{1.0, 2.0}, 1.0});  // 2-d atom in a 1-d measure
  CHECK(thrown_code([&] { validate(Measure{1, c}); }) ==
        errc::dimension_mismatch);
}

TEST_CASE("make_sum flattens nested sums and folds coefficients") {
  Measure inner = make_sum(1, {{3.0, th::dirac_origin()}});
  Measure outer = make_sum(1, {{2.0, inner}});
  // Total mass must be 6 regardless of how the nesting was folded.
  CHECK(btv_norm(outer) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(btv_norm(scaled(-2.0, th::dirac_origin())) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sign_status(scaled(-2.0, th::dirac_origin())) == SignStatus::mixed);
  CHECK(thrown_code([&] {
          (void)make_sum(1, {{1.0, th::dirac_origin(2)}});
        }) == errc::dimension_mismatch);
}

// ---------------------------------------------------------------------------
// Gaussian-weighted mass: closed oracles.
// ---------------------------------------------------------------------------

TEST_CASE("meps_norm closed values") {
  // (eps/pi)^{1/2} int e^{-(eps - 1/4) x^2} dx = sqrt(eps/(eps - 1/4)).
  CHECK(meps_norm(th::growth_plain(), 0.5) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  // At the critical index the quadratic parts cancel and the integral of
  // e^{-|x|} remains: (1/4 / pi)^{1/2} * 2 = 1/sqrt(pi).
  CHECK(meps_norm(th::growth_expdecay(), 0.25) ==
        doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-12));
  // Below or at the optimal index of undamped growth the mass is infinite.
  CHECK(meps_norm(th::growth_plain(), 0.25) == kInf);
  CHECK(meps_norm(th::growth_plain(), 0.2) == kInf);
  // Point mass at the origin: the weight evaluates to 1.
  CHECK(meps_norm(th::dirac_origin(), kPi) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // Box indicator: erf(sqrt(eps)).
  for (double eps : {0.3, 1.0, 4.0})
    CHECK(meps_norm(th::box(), eps) ==
          doctest::Approx(std::erf(std::sqrt(eps))).epsilon(1e-11));
  // Single annulus 1 < |x| < 4: erf(4 sqrt(eps)) - erf(sqrt(eps)).
  AnnulusSum a;
  a.terms.push_back({1.0, 2.0, 2.0});
  for (double eps : {0.2, 1.0}) {
    const double s = std::sqrt(eps);
    CHECK(meps_norm(Measure{1, a}, eps) ==
          doctest::Approx(std::erf(4.0 * s) - std::erf(s)).epsilon(1e-11));
  }
  // Signed comb: weights by absolute value.
  const double eps = 0.7;
  CHECK(meps_norm(th::dirac({{0.0, 1.0}, {1.0, -2.0}}), eps) ==
        doctest::Approx(std::sqrt(eps / kPi) * (1.0 + 2.0 * std::exp(-eps)))
            .epsilon(1e-13));
}

TEST_CASE("meps_norm closed and generic quadrature paths agree") {
  QuadratureConfig forced;
  forced.force_quadrature = true;
  for (const Measure& mu :
       {th::growth_expdecay(), th::growth_power(), th::box(), th::staircase(4),
        th::expquad(1, -0.5)}) {
    for (double eps : {0.3, 0.6, 1.5}) {
      const double closed = meps_norm(mu, eps);
      const double generic = meps_norm(mu, eps, forced);
      CHECK(generic == doctest::Approx(closed).epsilon(1e-7));
    }
  }
}

TEST_CASE("meps_norm monotone comparison across indices") {
  // For eps2 >= eps1 the weight shrinks, so
  //   meps(eps2) <= (eps2/eps1)^{N/2} meps(eps1).
  for (const Measure& mu :
       {th::growth_expdecay(), th::comb_on_Z(8), th::box(), th::staircase(6),
        th::growth_stretched()}) {
    const double base = 0.3;
    const double m1 = meps_norm(mu, base);
    for (double eps2 : {0.5, 1.0, 3.0}) {
      const double m2 = meps_norm(mu, eps2);
      const double cap = std::pow(eps2 / base, mu.dimension / 2.0) * m1;
      CHECK(m2 <= cap * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("meps_norm triangle inequality with equality for nonnegative sums") {
  Measure sum = make_sum(
      1, {{2.0, th::growth_expdecay()}, {3.0, th::dirac_origin()}});
  const double eps = 0.5;
  const double lhs = meps_norm(sum, eps);
  const double rhs = 2.0 * meps_norm(th::growth_expdecay(), eps) +
                     3.0 * meps_norm(th::dirac_origin(), eps);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

  Measure signed_sum = make_sum(
      1, {{1.0, th::growth_expdecay()}, {-3.0, th::dirac_origin()}});
  const double lhs2 = meps_norm(signed_sum, eps);
  const double rhs2 = meps_norm(th::growth_expdecay(), eps) +
                      3.0 * meps_norm(th::dirac_origin(), eps);
  CHECK(lhs2 <= rhs2 * (1.0 + 1e-10));
}

TEST_CASE("exact atom cancellation is honoured by the structural absolute value") {
  Measure cancel = th::dirac({{0.0, 1.0}, {0.0, -1.0}});
  CHECK(btv_norm(abs_measure(cancel)) == doctest::Approx(0.0));
  Measure partial = th::dirac({{0.0, 1.0}, {1.0, -2.0}});
  CHECK(btv_norm(abs_measure(partial)) ==
        doctest::Approx(btv_norm(partial)).epsilon(1e-14));
}

// ---------------------------------------------------------------------------
// Growth index and maximal time.
// ---------------------------------------------------------------------------

TEST_CASE("growth_index analytic values") {
  for (const Measure& mu : {th::growth_plain(), th::growth_power(),
                            th::growth_expdecay(), th::growth_stretched()}) {
    const GrowthIndex g = growth_index(mu);
    CHECK(g.eps0 == doctest::Approx(0.25));
    CHECK(g.source == GrowthIndexSource::analytic);
  }
  CHECK(growth_index(th::growth_plain()).attained == Attainment::no);
  CHECK(growth_index(th::growth_power()).attained == Attainment::yes);
  CHECK(growth_index(th::growth_expdecay()).attained == Attainment::yes);
  CHECK(growth_index(th::growth_exppower()).attained == Attainment::yes);
  CHECK(growth_index(th::growth_stretched()).attained == Attainment::yes);
  // Power decay attains only above the dimension: alpha = 2 in N = 2 fails.
  CHECK(growth_index(th::growth_power(2)).attained == Attainment::no);
  CHECK(growth_index(th::expquad(2, 0.25, ModPowerDecay{2.5})).attained ==
        Attainment::yes);

  for (const Measure& mu : {th::comb_on_Z(4), th::box(), th::staircase(6)}) {
    CHECK(growth_index(mu).eps0 == 0.0);
    CHECK(growth_index(mu).attained == Attainment::yes);
    CHECK(maximal_time(mu) == kInf);
  }
  CHECK(maximal_time(th::growth_plain()) == doctest::Approx(1.0));
  CHECK(maximal_time(th::expquad(1, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("growth_index attainment sees the linear tilt") {
  // At the critical index the surviving integrand is e^{b.x} v(|x|):
  // exponential decay wins only when its rate beats |b|.
  CHECK(growth_index(th::expquad(1, 0.25, ModExpDecay{1.0}, {2.0})).attained ==
        Attainment::no);
  CHECK(growth_index(th::expquad(1, 0.25, ModExpDecay{3.0}, {2.0})).attained ==
        Attainment::yes);
  // Equal rates: the power factor decides.
  CHECK(growth_index(th::expquad(1, 0.25, ModExpPowerDecay{1.0, 2.0}, {1.0}))
            .attained == Attainment::yes);
  CHECK(growth_index(th::expquad(1, 0.25, ModExpDecay{1.0}, {1.0})).attained ==
        Attainment::no);
  // Stretched decay beats any linear tilt.
  CHECK(growth_index(
            th::expquad(1, 0.25, ModStretchedExpDecay{1.0, 1.5}, {5.0}))
            .attained == Attainment::yes);
  // The centre shifts the effective tilt: e^{A|x-c|^2} = e^{A|x|^2 - 2Ac.x + ...}.
  Measure centred = th::expquad(1, 0.25, ModExpDecay{1.0}, {}, {3.0});
  CHECK(growth_index(centred).eps0 == doctest::Approx(0.25));
  CHECK(growth_index(centred).attained == Attainment::no);  // |2Ac| = 1.5 > 1
}

TEST_CASE("growth_index of half-space pieces and sums") {
  HalfSpacePiece h;
  h.n = {1.0};
  h.c = 0.5;
  h.A = 0.25;
  CHECK(growth_index(Measure{1, h}).eps0 == doctest::Approx(0.25));
  CHECK(growth_index(Measure{1, h}).attained == Attainment::yes);
  h.c = 0.0;
  h.x0 = {-1.0};  // effective offset negative: mass escapes the weight
  CHECK(growth_index(Measure{1, h}).attained == Attainment::no);

  Measure mixed = make_sum(
      1, {{1.0, th::growth_expdecay()}, {1.0, th::growth_plain()}});
  CHECK(growth_index(mixed).eps0 == doctest::Approx(0.25));
  CHECK(growth_index(mixed).attained == Attainment::no);
  Measure dominated = make_sum(
      1, {{1.0, th::growth_expdecay()}, {1.0, th::comb_on_Z(2)}});
  CHECK(growth_index(dominated).attained == Attainment::yes);
}

TEST_CASE("estimated growth index lands within five percent") {
  for (const Measure& mu : {th::growth_plain(), th::growth_power(),
                            th::growth_expdecay(),
                            th::expquad(1, 1.0, ModExpDecay{2.0})}) {
    const GrowthIndex exact = growth_index(mu);
    const GrowthIndex est = estimate_growth_index(mu, 12);
    CHECK(est.source == GrowthIndexSource::estimated);
    CHECK(est.eps0 == doctest::Approx(exact.eps0).epsilon(0.05));
  }
  CHECK(estimate_growth_index(th::box(), 12).eps0 <= 0.02);
}

// ---------------------------------------------------------------------------
// Translation and dilation.
// ---------------------------------------------------------------------------

TEST_CASE("translation preserves the growth index") {
  for (const Measure& mu :
       {th::growth_expdecay(), th::growth_plain(), th::dirac_origin()}) {
    Measure shifted = translate(mu, {1.5});
    CHECK(growth_index(shifted).eps0 ==
          doctest::Approx(growth_index(mu).eps0));
    const double T = maximal_time(mu);
    if (std::isinf(T))
      CHECK(maximal_time(shifted) == kInf);
    else
      CHECK(maximal_time(shifted) == doctest::Approx(T));
  }
  // Atom positions actually move.
  Measure shifted = translate(th::dirac_origin(), {1.0});
  CHECK(ball_mass(shifted, {1.0}, 0.25) == doctest::Approx(1.0));
  CHECK(ball_mass(shifted, {0.0}, 0.25) == doctest::Approx(0.0));
  // Families without a representable translate refuse (zero shift passes).
  CHECK(thrown_code([&] { (void)translate(th::staircase(4), {1.0}); }) ==
        errc::unsupported_restriction);
  CHECK_NOTHROW((void)translate(th::staircase(4), {0.0}));
  CHECK(thrown_code([&] { (void)translate(th::box(), {1.0}); }) ==
        errc::unsupported_restriction);
}

TEST_CASE("dilation identity for the weighted mass") {
  // mu_lambda(E) = lambda^{-N} mu(lambda E) turns the weighted mass at eps
  // into the weighted mass at eps/lambda^2.
  AnnulusSum a;
  a.terms.push_back({2.0, 1.0, 2.0});
  for (const Measure& mu :
       {th::dirac({{0.0, 1.0}, {2.0, 0.5}}), Measure{1, a}, th::box(),
        th::growth_expdecay(), th::growth_stretched()}) {
    for (double lambda : {0.5, 2.0}) {
      Measure d = dilate(mu, lambda);
      for (double eps : {0.4, 1.1}) {
        const double expect = meps_norm(mu, eps / (lambda * lambda));
        if (std::isinf(expect))
          CHECK(meps_norm(d, eps) == kInf);
        else
          CHECK(meps_norm(d, eps) == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
  CHECK(thrown_code([&] { (void)dilate(th::growth_power(), 2.0); }) ==
        errc::unsupported_restriction);
  CHECK(thrown_code([&] { (void)dilate(th::dirac_origin(), 0.0); }) ==
        errc::validation_error);
}

// ---------------------------------------------------------------------------
// Uniform norm, ball mass, total variation.
// ---------------------------------------------------------------------------

TEST_CASE("uniform_norm closed values") {
  CHECK(uniform_norm(th::lebesgue()) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(uniform_norm(th::dirac_origin()) == doctest::Approx(1.0));
  CHECK(uniform_norm(th::comb_on_Z(32)) == doctest::Approx(3.0));
  CHECK(uniform_norm(th::box()) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(uniform_norm(th::expquad(1, -1.0)) ==
        doctest::Approx(std::sqrt(kPi) * std::erf(1.0)).epsilon(1e-8));
  CHECK(uniform_norm(th::growth_plain()) == kInf);
}

TEST_CASE("ball_mass exact values") {
  CHECK(ball_mass(th::comb_on_Z(2), {0.0}, 1.0) == doctest::Approx(3.0));
  CHECK(ball_mass(th::box(), {0.0}, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ball_mass(th::box(), {2.0}, 3.0) == doctest::Approx(2.0).epsilon(1e-12));
  AnnulusSum a;
  a.terms.push_back({1.0, 2.0, 2.0});
  CHECK(ball_mass(Measure{1, a}, {0.0}, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ball_mass(th::box(1.0, 4, 2), {0.0, 0.0}, 10.0) ==
        doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("btv_norm closed values") {
  CHECK(btv_norm(th::dirac({{0.0, 1.0}, {1.0, -2.0}})) == doctest::Approx(3.0));
  CHECK(btv_norm(th::expquad(1, 0.0, ModExpDecay{1.0})) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(btv_norm(th::box()) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(btv_norm(th::growth_plain()) == kInf);
  CHECK(btv_norm(th::lebesgue()) == kInf);
}

TEST_CASE("sign_status classifies structural signs") {
  CHECK(sign_status(th::dirac({{0.0, 1.0}, {1.0, -2.0}})) == SignStatus::mixed);
  CHECK(sign_status(th::comb_on_Z(3)) == SignStatus::nonnegative);
  CHECK(sign_status(th::growth_plain()) == SignStatus::nonnegative);
  CHECK(sign_status(th::box(1.0, 2, 1, -1.0)) == SignStatus::mixed);
}
