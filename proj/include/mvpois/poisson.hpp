#pragma once

#include <cstdint>

#include "mvpois/specfun.hpp"

namespace mvpois {

/// Univariate Poisson distribution with strictly positive rate.
struct PoissonDist {
  double rate;
};

/// Throws std::domain_error unless rate is finite and > 0.
void validate(const PoissonDist& dist);

/// P(X = k); log scale exact via k ln(rate) - rate - ln_gamma(k+1).
RegularizedValue poisson_pmf(const PoissonDist& dist, std::int64_t k);

/// P(X <= x). Real x allowed: 0 for x < 0, floor(x) otherwise.
RegularizedValue poisson_cdf(const PoissonDist& dist, double x);

/// P(X > x), the complement of the CDF at the same floor point.
RegularizedValue poisson_sf(const PoissonDist& dist, double x);

/// Generalized inverse: smallest k with cdf(k) >= u, for u in (0,1].
std::int64_t poisson_quantile(const PoissonDist& dist, double u);

}  // namespace mvpois
