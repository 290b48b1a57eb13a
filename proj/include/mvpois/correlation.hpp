#pragma once

#include <vector>

#include "mvpois/models.hpp"

namespace mvpois {

struct CorrelationReport {
  double avg_rho = 0.0;                          // in [-1, 1]
  std::vector<std::vector<double>> pairwise_cov;  // d x d, diagonal = variances
  double trunc_bound = 0.0;                      // series truncation bound
};

/// Average correlation coefficient: sum of off-diagonal covariances over the
/// sum of sqrt(Var_i Var_j), any d >= 2. Covariances: common shock theta0;
/// comonotonic Hoeffding double series m_{li,lj}(theta); thinning
/// sum_k theta_k p_i^k p_j^k. `paper_formula` switches the thinning average
/// to the paper's theta-free display.
CorrelationReport avg_corr(const CommonShockParams& p);
CorrelationReport avg_corr(const ComonotonicParams& p, double tail_eps = 1e-12);
CorrelationReport avg_corr(const ThinningParams& p, bool paper_formula = false);
CorrelationReport avg_corr(const ModelParams& p, bool paper_formula = false);

/// Attainable Poisson pair correlation interval [rho_min, rho_max], both
/// double series truncated at the 1 - tail_eps quantiles.
struct PairCorrBounds {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double trunc_bound = 0.0;
};

PairCorrBounds pair_corr_bounds(double theta_i, double theta_j, double tail_eps = 1e-12);

}  // namespace mvpois
