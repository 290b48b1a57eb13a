#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "mvpois/rng.hpp"

namespace mvpois {

/// Common shock structure: X_i = Y_0 + Y_i with independent Poisson
/// Y_0 ~ P(theta0), Y_i ~ P(thetas[i]).
struct CommonShockParams {
  double theta0;
  std::vector<double> thetas;

  std::size_t dim() const { return thetas.size(); }
};

/// Comonotonic shock structure: X_j = Y_j + Z_j with independent
/// Y_j ~ P((1-theta) lambda_j) and Z_j the quantile transform of one shared
/// uniform, Z_j ~ P(theta lambda_j).
struct ComonotonicParams {
  std::vector<double> lambdas;
  double theta;

  std::size_t dim() const { return lambdas.size(); }
};

/// Thinning dependence: X_j = sum_k X_j^k where X_j^k | Y_k=y is
/// Binomial(y, probs[j][k]) and Y_k ~ P(thetas[k]).
struct ThinningParams {
  std::vector<double> thetas;                // l background rates
  std::vector<std::vector<double>> probs;    // d rows, l columns

  std::size_t dim() const { return probs.size(); }
  std::size_t sources() const { return thetas.size(); }
};

struct SampleVector {
  std::vector<std::int64_t> values;
};

using ModelParams = std::variant<CommonShockParams, ComonotonicParams, ThinningParams>;

void validate(const CommonShockParams& p);
void validate(const ComonotonicParams& p);
void validate(const ThinningParams& p);
void validate(const ModelParams& p);

/// Per-coordinate Poisson rate of X_j.
std::vector<double> marginal_rates(const CommonShockParams& p);
std::vector<double> marginal_rates(const ComonotonicParams& p);
std::vector<double> marginal_rates(const ThinningParams& p);
std::vector<double> marginal_rates(const ModelParams& p);

/// Exact samplers. Parameters are assumed validated; the boundary values
/// theta=0 / theta=1 (comonotonic) and p=0 / p=1 are accepted.
SampleVector sample_common_shock(const CommonShockParams& p, CounterRng& rng);
SampleVector sample_comonotonic(const ComonotonicParams& p, CounterRng& rng);
SampleVector sample_thinning(const ThinningParams& p, CounterRng& rng);
SampleVector sample(const ModelParams& p, CounterRng& rng);

/// Exact Poisson draw: inversion by scan below rate 30, PTRS rejection above.
std::int64_t sample_poisson(double rate, CounterRng& rng);

/// Exact Binomial(n,p) draw: inversion for small n*p, BTRS rejection otherwise.
std::int64_t sample_binomial(std::int64_t n, double p, CounterRng& rng);

/// Remark-2.3 reduction: common shock as an l=d+1 thinning model with the
/// identity-plus-ones probability matrix and theta_{d+1} = theta0.
ThinningParams thinning_from_common(const CommonShockParams& p);

/// Equal-rate comonotonic model as a common shock model:
/// theta0 = theta*lambda, theta_j = (1-theta)*lambda. Rejects unequal rates
/// and theta in {0,1} (the reduced model needs strictly positive rates).
CommonShockParams common_from_comonotonic_equal_rates(const ComonotonicParams& p);

}  // namespace mvpois
