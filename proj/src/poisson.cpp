#include "mvpois/poisson.hpp"

#include <cmath>
#include <stdexcept>

namespace mvpois {

namespace {

// Acklam's rational approximation to the inverse normal CDF. Only used to
// seed the quantile scan, so ~1e-9 accuracy is far more than needed.
double inv_norm_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

void validate(const PoissonDist& dist) {
  if (!(dist.rate > 0.0) || !std::isfinite(dist.rate)) {
    throw std::domain_error("PoissonDist: rate must be positive and finite");
  }
}

RegularizedValue poisson_pmf(const PoissonDist& dist, std::int64_t k) {
  validate(dist);
  if (k < 0) throw std::domain_error("poisson_pmf: k must be >= 0");
  double lv = static_cast<double>(k) * std::log(dist.rate) - dist.rate -
              ln_gamma(static_cast<double>(k) + 1.0);
  return reg_from_log(lv);
}

RegularizedValue poisson_cdf(const PoissonDist& dist, double x) {
  validate(dist);
  if (x < 0.0) return reg_zero();
  double k = std::floor(x);
  return reg_gamma_q(k + 1.0, dist.rate);
}

RegularizedValue poisson_sf(const PoissonDist& dist, double x) {
  validate(dist);
  if (x < 0.0) return reg_one();
  double k = std::floor(x);
  return reg_gamma_p(k + 1.0, dist.rate);
}

std::int64_t poisson_quantile(const PoissonDist& dist, double u) {
  validate(dist);
  if (!(u > 0.0) || u > 1.0) throw std::domain_error("poisson_quantile: u must be in (0,1]");
  double guess = dist.rate + std::sqrt(dist.rate) * inv_norm_cdf(u);
  std::int64_t k = guess > 0.0 ? static_cast<std::int64_t>(guess) : 0;
  if (poisson_cdf(dist, static_cast<double>(k)).value >= u) {
    while (k > 0 && poisson_cdf(dist, static_cast<double>(k - 1)).value >= u) --k;
    return k;
  }
  while (poisson_cdf(dist, static_cast<double>(k + 1)).value < u) ++k;
  return k + 1;
}

}  // namespace mvpois
