#pragma once

#include <cstdint>
#include <vector>

#include "mvpois/models.hpp"
#include "mvpois/specfun.hpp"

namespace mvpois {

enum class Extreme { kMax, kMin };

struct ExtremeQuery {
  Extreme kind = Extreme::kMax;
  double x = 0.0;
  double tail_eps = 1e-12;  // truncation tolerance, must be in (0, 1e-3]
};

enum class EvalMethod {
  kCommonShockSum,
  kComonotonicNested,
  kComonotonicCopula,
  kComonotonicIntegral,
  kThinningLattice,
  kThinningBetaSeries,
  kBruteForce,
  kMonteCarlo,
};

struct EvalResult {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  double trunc_bound = 0.0;  // guaranteed absolute truncation error
  EvalMethod method = EvalMethod::kCommonShockSum;
};

/// Exact finite sum over the shock count y = 0..floor(x); no truncation.
EvalResult common_shock_extreme_cdf(const CommonShockParams& p, const ExtremeQuery& q);

/// Joint PMF of the comonotonic shock vector Z at z (convention G(-1)=0):
/// [min_j G_{theta lam_j}(z_j) - max_j G_{theta lam_j}(z_j - 1)]_+ .
double comonotonic_mass(const ComonotonicParams& p, const std::vector<std::int64_t>& z);

/// Nested d-fold sum form; O((x+1)^d) terms, rejects d above `nesting_cap`.
EvalResult comonotonic_extreme_cdf_nested(const ComonotonicParams& p, const ExtremeQuery& q,
                                          std::size_t nesting_cap = 4);

/// Equivalent form with the shock mass and CDF/survival factors swapped.
EvalResult comonotonic_extreme_cdf_copula(const ComonotonicParams& p, const ExtremeQuery& q,
                                          std::size_t nesting_cap = 4);

/// Scalable route: the conditioning integral over the shared uniform,
/// evaluated exactly as a sum over the quantile-function breakpoints.
EvalResult comonotonic_extreme_cdf_integral(const ComonotonicParams& p, const ExtremeQuery& q);

/// P(X_j <= x | Y = y): convolution of l binomials by dynamic programming
/// over the x+1 retained support cells.
double thinning_conditional_cdf(const ThinningParams& p, std::size_t j, std::int64_t x,
                                const std::vector<std::int64_t>& y);

/// Lattice sum over the background vector y, split at sum(y) <= floor(x).
EvalResult thinning_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q);

/// l=1 closed form through the regularized incomplete beta function.
EvalResult thinning_l1_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q);

/// Dispatcher used by the CLI: picks the scalable evaluator per model.
EvalResult extreme_cdf(const ModelParams& p, const ExtremeQuery& q);

}  // namespace mvpois
