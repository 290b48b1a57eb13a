#include "mvpois/extrema.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mvpois/oracle.hpp"
#include "mvpois/poisson.hpp"
#include "test_util.hpp"

using namespace mvpois;

namespace {

const CommonShockParams kCommonL1{3.3804, {2.6196, 3.6196, 4.6196}};
const CommonShockParams kCommonL2{8.2, {0.8, 0.8, 1.8}};
const ComonotonicParams kComonoL1{{6.0, 7.0, 8.0}, 0.5};
const ThinningParams kThinL1{{15.3829}, {{0.39}, {0.4551}, {0.5201}}};
const ThinningParams kThinL2{{8.2, 19.69}, {{1.0, 0.0406}, {1.0, 0.0406}, {1.0, 0.0914}}};

ExtremeQuery qmax(double x) { return {Extreme::kMax, x, 1e-12}; }
ExtremeQuery qmin(double x) { return {Extreme::kMin, x, 1e-12}; }

// Paper-style nested-sum reference for the conditional PMF of a sum of
// independent binomials (test-only oracle for the DP convolution).
double binom_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  double lb = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(static_cast<double>(n - k) + 1.0);
  return std::exp(lb + k * std::log(p) + static_cast<double>(n - k) * std::log1p(-p));
}

double nested_sum_pmf(const std::vector<double>& probs, const std::vector<std::int64_t>& y,
                      std::size_t k, std::int64_t remaining) {
  std::int64_t tail = 0;
  for (std::size_t i = k + 1; i < y.size(); ++i) tail += y[i];
  if (k + 1 == y.size()) return binom_pmf(y[k], remaining, probs[k]);
  double total = 0.0;
  std::int64_t lo = std::max<std::int64_t>(0, remaining - tail);
  std::int64_t hi = std::min(remaining, y[k]);
  for (std::int64_t v = lo; v <= hi; ++v) {
    total += binom_pmf(y[k], v, probs[k]) * nested_sum_pmf(probs, y, k + 1, remaining - v);
  }
  return total;
}

}  // namespace

TEST_CASE("common shock Max CDF regression values") {
  // Cross-validated against brute-force enumeration and Monte Carlo; the
  // l=2 values also match the published table.
  CHECK(common_shock_extreme_cdf(kCommonL2, qmax(6)).value ==
        doctest::Approx(0.09732638659206856).epsilon(1e-11));
  CHECK(common_shock_extreme_cdf(kCommonL2, qmax(10)).value ==
        doctest::Approx(0.5370499468632182).epsilon(1e-11));
  CHECK(common_shock_extreme_cdf(kCommonL1, qmax(6)).value ==
        doctest::Approx(0.18005897607165136).epsilon(1e-11));
  CHECK(common_shock_extreme_cdf(kCommonL1, qmax(10)).value ==
        doctest::Approx(0.7515070636428983).epsilon(1e-11));
  CHECK(common_shock_extreme_cdf(kCommonL1, qmax(-0.5)).value == 0.0);
  CHECK(common_shock_extreme_cdf(kCommonL1, qmax(6)).trunc_bound == 0.0);
}

TEST_CASE("common shock d=1 collapses to the marginal convolution") {
  CommonShockParams p{2.0, {3.0}};
  double g54 = poisson_cdf({5.0}, 4.0).value;
  CHECK(common_shock_extreme_cdf(p, qmax(4)).value == doctest::Approx(g54).epsilon(1e-13));
  CHECK(common_shock_extreme_cdf(p, qmin(4)).value == doctest::Approx(g54).epsilon(1e-13));
  CHECK(g54 == doctest::Approx(0.44049328506521241144).epsilon(1e-13));
}

TEST_CASE("common shock Min matches the brute-force oracle") {
  CommonShockParams p{0.5, {0.5, 0.5}};
  for (double x : {0.0, 1.0, 2.0, 3.0, 5.0}) {
    double analytic = common_shock_extreme_cdf(p, qmin(x)).value;
    double brute = brute_force_extreme_cdf(p, qmin(x), 1e-14);
    REQUIRE(std::fabs(analytic - brute) <= 1e-10);
  }
  CHECK(common_shock_extreme_cdf(p, qmin(1)).value ==
        doctest::Approx(0.857909824277).epsilon(1e-9));
}

TEST_CASE("comonotonic mass function") {
  // z = 0: the lower edge maximum is empty, so the mass is min_j G(0).
  ComonotonicParams p{{2.0, 4.0}, 0.5};
  double g0 = std::min(poisson_cdf({1.0}, 0.0).value, poisson_cdf({2.0}, 0.0).value);
  CHECK(comonotonic_mass(p, {0, 0}) == doctest::Approx(g0).epsilon(1e-14));

  // identical comonotonic marginals concentrate on the diagonal
  ComonotonicParams eq{{1.0, 1.0}, 1.0};
  CHECK(comonotonic_mass(eq, {0, 1}) == 0.0);

  // interval-length computation from the quantile breakpoints
  CHECK(comonotonic_mass(p, {1, 2}) == doctest::Approx(0.27067056647322538).epsilon(1e-12));

  // total mass over a box covering nearly all probability
  double total = 0.0;
  for (std::int64_t z1 = 0; z1 <= 15; ++z1) {
    for (std::int64_t z2 = 0; z2 <= 15; ++z2) total += comonotonic_mass(p, {z1, z2});
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(comonotonic_mass(p, {-1, 0}), std::domain_error);
}

TEST_CASE("comonotonic nested form boundary cases") {
  // theta = 0: independence
  ComonotonicParams ind{{2.0, 3.0}, 0.0};
  double expect = poisson_cdf({2.0}, 4.0).value * poisson_cdf({3.0}, 4.0).value;
  CHECK(comonotonic_extreme_cdf_nested(ind, qmax(4)).value == doctest::Approx(expect).epsilon(1e-13));
  // theta = 1, equal rates: fully comonotonic, Max CDF is the marginal CDF
  ComonotonicParams com{{5.0, 5.0, 5.0}, 1.0};
  CHECK(comonotonic_extreme_cdf_nested(com, qmax(5)).value ==
        doctest::Approx(poisson_cdf({5.0}, 5.0).value).epsilon(1e-13));
  // d above the nesting cap is rejected
  ComonotonicParams big{std::vector<double>(5, 1.0), 0.5};
  CHECK_THROWS_AS(comonotonic_extreme_cdf_nested(big, qmax(3)), std::domain_error);
  CHECK_THROWS_AS(comonotonic_extreme_cdf_copula(big, qmax(3)), std::domain_error);
  CHECK_NOTHROW(comonotonic_extreme_cdf_integral(big, qmax(3)));
}

TEST_CASE("comonotonic regression values via all three forms") {
  for (double x : {6.0, 10.0}) {
    double expect = x == 6.0 ? 0.18143702867265585 : 0.7531675400258748;
    CHECK(comonotonic_extreme_cdf_nested(kComonoL1, qmax(x)).value ==
          doctest::Approx(expect).epsilon(1e-10));
    CHECK(comonotonic_extreme_cdf_copula(kComonoL1, qmax(x)).value ==
          doctest::Approx(expect).epsilon(1e-10));
    CHECK(comonotonic_extreme_cdf_integral(kComonoL1, qmax(x)).value ==
          doctest::Approx(expect).epsilon(1e-10));
  }
  ComonotonicParams l2{{9.0, 9.0, 10.0}, 0.5};
  CHECK(comonotonic_extreme_cdf_integral(l2, qmax(8)).value ==
        doctest::Approx(0.16584364111464084).epsilon(1e-10));
}

TEST_CASE("comonotonic cross-form identity on a grid") {
  for (double theta : {0.1, 0.5, 0.9}) {
    ComonotonicParams p{{6.0, 7.0, 8.0}, theta};
    for (double x = 0.0; x <= 15.0; x += 1.0) {
      for (Extreme kind : {Extreme::kMax, Extreme::kMin}) {
        ExtremeQuery q{kind, x, 1e-12};
        double a = comonotonic_extreme_cdf_nested(p, q).value;
        double b = comonotonic_extreme_cdf_copula(p, q).value;
        double c = comonotonic_extreme_cdf_integral(p, q).value;
        REQUIRE(std::fabs(a - b) <= 1e-12);
        REQUIRE(std::fabs(a - c) <= 1e-10);
      }
    }
  }
}

TEST_CASE("comonotonic Min regression and d=1 collapse") {
  ComonotonicParams p{{2.0, 3.0}, 0.4};
  CHECK(comonotonic_extreme_cdf_nested(p, qmin(4)).value ==
        doctest::Approx(0.974608195671846).epsilon(1e-10));
  CHECK(comonotonic_extreme_cdf_integral(p, qmin(4)).value ==
        doctest::Approx(0.974608195671846).epsilon(1e-10));
  CHECK(comonotonic_extreme_cdf_nested(p, qmax(4)).value ==
        doctest::Approx(0.7880020315082146).epsilon(1e-10));

  ComonotonicParams single{{4.5}, 0.7};
  for (double x : {0.0, 2.0, 6.0, 11.0}) {
    double marginal = poisson_cdf({4.5}, x).value;
    CHECK(comonotonic_extreme_cdf_integral(single, qmax(x)).value ==
          doctest::Approx(marginal).epsilon(1e-12));
    CHECK(comonotonic_extreme_cdf_integral(single, qmin(x)).value ==
          doctest::Approx(marginal).epsilon(1e-12));
  }
}

TEST_CASE("thinning conditional CDF against the nested-sum reference") {
  ThinningParams one{{5.0}, {{0.5}, {0.5}}};
  CHECK(thinning_conditional_cdf(one, 0, 3, {3}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(thinning_conditional_cdf(one, 0, 1, {3}) == doctest::Approx(0.5).epsilon(1e-13));

  ThinningParams two{{1.0, 1.0}, {{0.3, 0.7}}};
  double dp = thinning_conditional_cdf(two, 0, 2, {2, 3});
  double ref = 0.0;
  for (std::int64_t s = 0; s <= 2; ++s) ref += nested_sum_pmf({0.3, 0.7}, {2, 3}, 0, s);
  CHECK(dp == doctest::Approx(ref).epsilon(1e-12));
  CHECK(dp == doctest::Approx(0.41508).epsilon(1e-12));

  testutil::Gen gen(17);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> probs{gen.uniform(0.0, 1.0), gen.uniform(0.0, 1.0), gen.uniform(0.0, 1.0)};
    ThinningParams p{{1.0, 1.0, 1.0}, {probs}};
    std::vector<std::int64_t> y{gen.integer(0, 8), gen.integer(0, 8), gen.integer(0, 8)};
    std::int64_t x = gen.integer(0, 10);
    double got = thinning_conditional_cdf(p, 0, x, y);
    double want = 0.0;
    for (std::int64_t s = 0; s <= x; ++s) want += nested_sum_pmf(probs, y, 0, s);
    REQUIRE(std::fabs(got - want) <= 1e-12);
  }
}

TEST_CASE("thinning Max regression values") {
  CHECK(thinning_extreme_cdf(kThinL1, qmax(6)).value ==
        doctest::Approx(0.1834831791706238).epsilon(1e-10));
  CHECK(thinning_extreme_cdf(kThinL1, qmax(10)).value ==
        doctest::Approx(0.7525579299510665).epsilon(1e-10));
  CHECK(thinning_extreme_cdf(kThinL2, qmax(6)).value ==
        doctest::Approx(0.0996640683586974).epsilon(1e-10));
  CHECK(thinning_extreme_cdf(kThinL2, qmax(12)).value ==
        doctest::Approx(0.7649049304979052).epsilon(1e-10));
  CHECK(thinning_extreme_cdf(kThinL2, qmax(12)).trunc_bound <= 1e-12);

  // all probabilities one: every coordinate equals Y_1
  ThinningParams ones{{4.0}, {{1.0}, {1.0}, {1.0}}};
  for (double x : {0.0, 3.0, 8.0}) {
    CHECK(thinning_extreme_cdf(ones, qmax(x)).value ==
          doctest::Approx(poisson_cdf({4.0}, x).value).epsilon(1e-12));
  }
}

TEST_CASE("thinning l=1 corollary agrees with the lattice form") {
  CHECK_THROWS_AS(thinning_l1_extreme_cdf(kThinL2, qmax(5)), std::domain_error);
  for (double x = 0.0; x <= 15.0; x += 1.0) {
    for (Extreme kind : {Extreme::kMax, Extreme::kMin}) {
      ExtremeQuery q{kind, x, 1e-12};
      double a = thinning_l1_extreme_cdf(kThinL1, q).value;
      double b = thinning_extreme_cdf(kThinL1, q).value;
      REQUIRE(std::fabs(a - b) <= 1e-11);
    }
  }
  ThinningParams unit{{3.5}, {{1.0}}};
  for (double x : {0.0, 2.0, 7.0}) {
    CHECK(thinning_l1_extreme_cdf(unit, qmax(x)).value ==
          doctest::Approx(poisson_cdf({3.5}, x).value).epsilon(1e-12));
  }
}

TEST_CASE("model reductions reproduce the source extrema CDFs") {
  CommonShockParams base{1.0, {2.0, 3.0}};
  ThinningParams reduced = thinning_from_common(base);
  for (double x = 0.0; x <= 20.0; x += 1.0) {
    for (Extreme kind : {Extreme::kMax, Extreme::kMin}) {
      ExtremeQuery q{kind, x, 1e-12};
      double want = common_shock_extreme_cdf(base, q).value;
      double got = thinning_extreme_cdf(reduced, q).value;
      REQUIRE(std::fabs(got - want) <= 1e-12);
    }
  }
  // d=1: the reduction is the plain convolution Poisson(theta0 + theta1)
  ThinningParams conv = thinning_from_common({2.0, {3.0}});
  CHECK(thinning_extreme_cdf(conv, qmax(4)).value ==
        doctest::Approx(poisson_cdf({5.0}, 4.0).value).epsilon(1e-12));

  ComonotonicParams eq{{5.0, 5.0, 5.0}, 0.4};
  CommonShockParams as_common = common_from_comonotonic_equal_rates(eq);
  for (double x = 0.0; x <= 20.0; x += 1.0) {
    for (Extreme kind : {Extreme::kMax, Extreme::kMin}) {
      ExtremeQuery q{kind, x, 1e-12};
      double want = comonotonic_extreme_cdf_integral(eq, q).value;
      double got = common_shock_extreme_cdf(as_common, q).value;
      REQUIRE(std::fabs(got - want) <= 1e-12);
    }
  }
}

TEST_CASE("floor semantics, monotonicity, limits, min >= max") {
  ModelParams models[] = {ModelParams{kCommonL1}, ModelParams{kComonoL1}, ModelParams{kThinL1},
                          ModelParams{kThinL2}};
  for (const ModelParams& p : models) {
    CHECK(extreme_cdf(p, qmax(7.9)).value == extreme_cdf(p, qmax(7.0)).value);
    CHECK(extreme_cdf(p, qmin(7.9)).value == extreme_cdf(p, qmin(7.0)).value);
    double prev_max = 0.0, prev_min = 0.0;
    for (double x = -1.0; x <= 30.0; x += 1.0) {
      double fmax = extreme_cdf(p, qmax(x)).value;
      double fmin = extreme_cdf(p, qmin(x)).value;
      REQUIRE(fmax >= prev_max - 1e-13);
      REQUIRE(fmin >= prev_min - 1e-13);
      REQUIRE(fmin >= fmax - 1e-12);
      prev_max = fmax;
      prev_min = fmin;
    }
    CHECK(extreme_cdf(p, qmax(-0.5)).value == 0.0);
    CHECK(extreme_cdf(p, qmax(40.0)).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(extreme_cdf(p, qmin(40.0)).value == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(common_shock_extreme_cdf(kCommonL1, {Extreme::kMax, 5.0, 0.0}),
                  std::domain_error);
  CHECK_THROWS_AS(common_shock_extreme_cdf(kCommonL1, {Extreme::kMax, 5.0, 1e-2}),
                  std::domain_error);
  EvalResult r = thinning_extreme_cdf(kThinL2, {Extreme::kMin, 9.0, 1e-9});
  CHECK(r.value >= 0.0);
  CHECK(r.value <= 1.0);
  CHECK(r.trunc_bound <= 1e-9);
}
