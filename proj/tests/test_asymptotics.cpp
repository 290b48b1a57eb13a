#include "mvpois/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mvpois/poisson.hpp"
#include "test_util.hpp"

using namespace mvpois;

namespace {

std::vector<double> printed_vs(const std::vector<SweepRow>& rows, bool invert) {
  std::vector<double> out;
  for (const SweepRow& r : rows) out.push_back(invert ? 1.0 / r.ratio : r.ratio);
  return out;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(std::fabs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("rate sequence grammar") {
  CHECK(RateSequence::parse("5").rate(3) == 5.0);
  RateSequence s = RateSequence::parse("8-2/j");
  CHECK(s.rate(1) == doctest::Approx(6.0));
  CHECK(s.rate(4) == doctest::Approx(7.5));
  CHECK(s.limit() == 8.0);
  CHECK(RateSequence::parse("8+2/j").rate(2) == doctest::Approx(9.0));
  CHECK(RateSequence::parse("2*j^0.5").rate(4) == doctest::Approx(4.0));
  CHECK(std::isinf(RateSequence::parse("2*j^0.5").limit()));
  RateSequence e = RateSequence::explicit_list({10.0, 8.0}, true);
  CHECK(e.rate(1) == 10.0);
  CHECK(e.rate(50) == 8.0);
  CHECK(e.limit() == 8.0);
  CHECK_THROWS_AS(RateSequence::explicit_list({1.0}, false).rate(2), std::domain_error);
  CHECK_THROWS_AS(RateSequence::parse("j*2"), std::domain_error);
}

TEST_CASE("dimension sweep ratios, common shock") {
  // printed row (AR/FM): 0.35464 0.71591 0.99193 0.99938 1
  auto rows = dim_ratio_sweep_common(5.0, RateSequence::constant(5.0), 7.0, Extreme::kMax,
                                     {10, 20, 50, 70, 200});
  check_close(printed_vs(rows, true), {0.35464, 0.71591, 0.99193, 0.99938, 1.0}, 1e-4);
  // tiny shock rate: the target collapses onto the exact CDF
  auto tiny = dim_ratio_sweep_common(1e-8, RateSequence::constant(5.0), 7.0, Extreme::kMax, {10});
  CHECK(std::fabs(tiny[0].ratio - 1.0) <= 1e-6);
  // Min target is the shock CDF itself
  auto mins = dim_ratio_sweep_common(5.0, RateSequence::constant(5.0), 7.0, Extreme::kMin, {50});
  CHECK(mins[0].target == doctest::Approx(poisson_cdf({5.0}, 7.0).value).epsilon(1e-12));
}

TEST_CASE("dimension sweep ratios, thinning") {
  // printed row (AR/FM): 0.83133 0.91117 0.98441 0.99520 1
  auto rows = dim_ratio_sweep_thinning({8.0}, {0.7}, 7.0, Extreme::kMax, {10, 20, 50, 70, 200});
  check_close(printed_vs(rows, true), {0.83133, 0.91117, 0.98441, 0.99520, 1.0}, 1e-4);
  CHECK(rows[0].target == doctest::Approx(poisson_cdf({8.0}, 7.0).value).epsilon(1e-12));
  // Min limit is certainty
  auto mins = dim_ratio_sweep_thinning({8.0}, {0.7}, 7.0, Extreme::kMin, {20});
  CHECK(mins[0].target == 1.0);
}

TEST_CASE("dimension sweep ratios, comonotonic") {
  auto rows = dim_ratio_sweep_comonotonic(RateSequence::parse("8-2/j"), 0.5, 7.0, Extreme::kMax,
                                          {10, 20, 50, 70, 200});
  check_close(printed_vs(rows, true),
              {0.1586272435, 0.3539121518, 0.8075408880, 0.9282231945, 0.9945469093}, 1e-6);
  // published digits are within the 1e-3 acceptance tolerance
  check_close(printed_vs(rows, true), {0.15952, 0.35401, 0.80749, 0.92822, 0.99389}, 1e-3);
}

TEST_CASE("comonotonic dimension constants") {
  // 8-2/j: infimum is the unattained cluster point e^-4, chain length 1.
  // The Max-side chain is stable; the x-level sets approach their cluster
  // point from above one value at a time, so the Min side is flagged.
  auto c1 = comonotonic_dim_constants(RateSequence::parse("8-2/j"), 0.5, 7.0);
  CHECK(c1.k_max == 1);
  CHECK(c1.max_side_ok);
  CHECK_FALSE(c1.min_side_ok);
  CHECK_FALSE(c1.assumption_ok);
  CHECK(c1.c == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

  // equal rates: matches the common shock constant e^{-theta0} via reduction
  auto c2 = comonotonic_dim_constants(RateSequence::constant(5.0), 0.4, 7.0);
  CHECK(c2.k_max == 1);
  CHECK(c2.c == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  // values accumulating at the cluster point from below violate the chain
  auto bad = comonotonic_dim_constants(RateSequence::parse("8+2/j"), 0.5, 7.0);
  CHECK_FALSE(bad.max_side_ok);
  CHECK_FALSE(bad.assumption_ok);

  // one isolated value below the cluster: k = 2 and c gains one exact piece;
  // (m^(1), cluster) = (G_5(0), G_4(0)) holds no Z_1 atoms, so on that whole
  // interval Q_1 = 1 and the piece is (len) * G_5(x-1)/G_5(x).
  auto c3 = comonotonic_dim_constants(RateSequence::explicit_list({10.0, 8.0}, true), 0.5, 7.0);
  CHECK(c3.k_max == 2);
  CHECK(c3.assumption_ok);
  double g50 = poisson_cdf({5.0}, 0.0).value;  // m^(1) = G_5(0)
  double g40 = poisson_cdf({4.0}, 0.0).value;  // cluster point G_4(0)
  double y = poisson_cdf({5.0}, 7.0).value;    // Y_1 has rate (1-theta)*10 = 5
  double expect = g50 + (g40 - g50) * poisson_cdf({5.0}, 6.0).value / y;
  CHECK(c3.c == doctest::Approx(expect).epsilon(1e-12));
  CHECK(c3.c_tilde == 0.0);
  CHECK(c3.Mk_tilde == doctest::Approx(poisson_cdf({4.0}, 7.0).value).epsilon(1e-13));
  CHECK(c3.m1_tilde == doctest::Approx(poisson_cdf({5.0}, 7.0).value).epsilon(1e-13));

  CHECK_THROWS_AS(comonotonic_dim_constants(RateSequence::constant(5.0), 0.5, 7.0, 1),
                  std::domain_error);
}

TEST_CASE("parameter sweep: common shock limits") {
  // theta_0 -> infinity row, d=2, theta_j=2, x=7 (printed AR/FM)
  CommonShockParams base{1.0, {2.0, 2.0}};
  Regime r{ModelKind::kCommon, LimitKind::kShockRateToInf, Extreme::kMax};
  auto rows = ratio_sweep(base, r, 7.0, {10.0, 50.0, 500.0, 5000.0, 8000.0});
  check_close(printed_vs(rows, true), {0.07647, 0.42064, 0.89728, 0.98890, 0.99304}, 1e-4);
  // the deep regime only survives in log scale
  CHECK(rows[4].exact == 0.0);
  CHECK(rows[4].target == 0.0);
  CHECK(rows[4].log_exact < -7000.0);
  CHECK(std::isfinite(rows[4].ratio));

  // theta_i -> infinity row with theta_0 = 6, theta_j = 6, d = 10
  CommonShockParams base2{6.0, std::vector<double>(10, 6.0)};
  Regime r2{ModelKind::kCommon, LimitKind::kMarginalRateToInf, Extreme::kMax, 9};
  auto rows2 = ratio_sweep(base2, r2, 7.0, {10.0, 100.0, 200.0, 1000.0, 5000.0});
  check_close(printed_vs(rows2, false), {0.08830, 0.71232, 0.84105, 0.96542, 0.99296}, 1e-4);
  for (std::size_t i = 1; i < rows2.size(); ++i) REQUIRE(rows2[i].ratio > rows2[i - 1].ratio);
}

TEST_CASE("parameter sweep: comonotonic limits") {
  Regime r1{ModelKind::kComonotonic, LimitKind::kMarginalRateToInf, Extreme::kMax, 2};
  auto rows1 = ratio_sweep(ComonotonicParams{{20.0, 20.0, 1.0}, 0.5}, r1, 7.0,
                           {10.0, 20.0, 40.0, 50.0, 100.0});
  check_close(printed_vs(rows1, false),
              {0.0022899099, 0.0630847397, 0.9166554627, 1.0, 1.0}, 1e-6);

  Regime r2{ModelKind::kComonotonic, LimitKind::kThetaToZero, Extreme::kMax};
  auto rows2 = ratio_sweep(ComonotonicParams{{10.0, 10.0, 10.0}, 0.5}, r2, 7.0,
                           {0.66, 0.46, 0.31, 0.11, 0.01});
  check_close(printed_vs(rows2, false),
              {0.0857794505, 0.0889201858, 0.1410039493, 0.4404684477, 0.9240747374}, 1e-6);
  for (std::size_t i = 1; i < rows2.size(); ++i) REQUIRE(rows2[i].ratio > rows2[i - 1].ratio);

  Regime r3{ModelKind::kComonotonic, LimitKind::kThetaToOne, Extreme::kMax};
  auto rows3 = ratio_sweep(ComonotonicParams{{5.0, 5.0, 5.0}, 0.5}, r3, 7.0,
                           {0.0005, 0.3005, 0.5005, 0.9005, 0.99999});
  check_close(printed_vs(rows3, false), {0.65094, 0.69323, 0.72714, 0.88655, 0.99998}, 1e-4);

  // limit attained: theta = 1 makes target and exact coincide
  auto attained = ratio_sweep(ComonotonicParams{{5.0, 5.0}, 0.5}, r3, 6.0, {1.0});
  CHECK(attained[0].ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parameter sweep: thinning limits") {
  ThinningParams base{{10.0}, std::vector<std::vector<double>>(10, std::vector<double>{0.5})};
  Regime r1{ModelKind::kThinning, LimitKind::kProbToOne, Extreme::kMax, 9};
  auto rows1 = ratio_sweep(base, r1, 7.0, {0.009, 0.309, 0.509, 0.709, 0.959});
  check_close(printed_vs(rows1, false), {0.56523, 0.57256, 0.64028, 0.80086, 0.99029}, 1e-4);

  Regime r2{ModelKind::kThinning, LimitKind::kProbToZero, Extreme::kMax, 9};
  auto rows2 = ratio_sweep(base, r2, 7.0, {0.951, 0.751, 0.551, 0.251, 0.001});
  check_close(printed_vs(rows2, false), {0.46755, 0.77821, 0.95398, 0.99972, 1.0}, 1e-4);
}

TEST_CASE("asymptotic target shapes and errors") {
  // thinning dim target is the convolution CDF
  ThinningParams t{{1.0, 2.0}, {{0.5, 0.5}, {0.5, 0.5}}};
  CHECK(thinning_dim_target(t, 4.0, Extreme::kMax).value ==
        doctest::Approx(poisson_cdf({3.0}, 4.0).value).epsilon(1e-13));
  CHECK(thinning_dim_target(t, 4.0, Extreme::kMin).value == 1.0);

  // comonotonic theta -> 1 target: min/max marginal shock CDFs
  ComonotonicParams cp{{2.0, 6.0}, 0.5};
  Regime r{ModelKind::kComonotonic, LimitKind::kThetaToOne, Extreme::kMax};
  CHECK(asymptotic_target(cp, r, 4.0).value ==
        doctest::Approx(poisson_cdf({3.0}, 4.0).value).epsilon(1e-13));
  r.kind = Extreme::kMin;
  CHECK(asymptotic_target(cp, r, 4.0).value ==
        doctest::Approx(poisson_cdf({1.0}, 4.0).value).epsilon(1e-13));

  // regime/model mismatch
  Regime wrong{ModelKind::kCommon, LimitKind::kThetaToZero, Extreme::kMax};
  CHECK_THROWS_AS(asymptotic_target(CommonShockParams{1.0, {1.0}}, wrong, 3.0), std::domain_error);
  CHECK_THROWS_AS(asymptotic_target(cp, wrong, 3.0), std::domain_error);
  CHECK_THROWS_AS(ratio_sweep(ModelParams{cp}, wrong, 3.0, {}), std::domain_error);
}

TEST_CASE("log-space ratio path agrees with the linear path when it exists") {
  CommonShockParams base{1.0, {2.0, 2.0}};
  Regime r{ModelKind::kCommon, LimitKind::kShockRateToInf, Extreme::kMax};
  auto rows = ratio_sweep(base, r, 7.0, {10.0, 25.0});
  for (const SweepRow& row : rows) {
    REQUIRE(row.exact > 0.0);
    REQUIRE(std::fabs(row.ratio - row.exact / row.target) <= 1e-10 * row.ratio);
  }
}
