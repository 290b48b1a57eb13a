#include "mvpois/correlation.hpp"

#include <cmath>
#include <stdexcept>

#include "mvpois/poisson.hpp"

namespace mvpois {

namespace {

double sf0(double rate, std::int64_t m) {
  if (m < 0) return 1.0;
  if (rate == 0.0) return 0.0;
  return poisson_sf(PoissonDist{rate}, static_cast<double>(m)).value;
}

double log_sf0(double rate, std::int64_t m) {
  if (m < 0) return 0.0;
  if (rate == 0.0) return -std::numeric_limits<double>::infinity();
  return poisson_sf(PoissonDist{rate}, static_cast<double>(m)).log_value;
}

double cdf0(double rate, std::int64_t m) { return 1.0 - sf0(rate, m); }

std::int64_t quantile0(double rate, double u) {
  if (rate == 0.0) return 0;
  return poisson_quantile(PoissonDist{rate}, u);
}

// sum_{m >= from} sqrt(sf(rate, m)); Poisson tails decay fast enough that the
// square root stays summable, giving a cheap rigorous truncation bound.
double sqrt_sf_tail(double rate, std::int64_t from) {
  double s = 0.0;
  std::int64_t guard = from + 4 * static_cast<std::int64_t>(rate + 10.0 * std::sqrt(rate + 1.0)) + 200;
  for (std::int64_t m = from; m <= guard; ++m) {
    double t = std::exp(0.5 * log_sf0(rate, m));
    s += t;
    if (t < 1e-30) break;
  }
  return s;
}

// Hoeffding covariance of the comonotonic pair (Z_i, Z_j) with rates (a, b):
// sum_{m,n} min(sf_a(m), sf_b(n)) - a*b, truncated at 1 - eps quantiles.
double comonotonic_cov(double a, double b, double tail_eps, double* bound) {
  if (a == 0.0 || b == 0.0) {
    *bound = 0.0;
    return 0.0;
  }
  std::int64_t M = quantile0(a, 1.0 - tail_eps);
  std::int64_t N = quantile0(b, 1.0 - tail_eps);
  std::vector<double> sfb(static_cast<std::size_t>(N) + 1);
  for (std::int64_t n = 0; n <= N; ++n) sfb[static_cast<std::size_t>(n)] = sf0(b, n);
  double s = 0.0;
  for (std::int64_t m = 0; m <= M; ++m) {
    double sa = sf0(a, m);
    for (std::int64_t n = 0; n <= N; ++n) {
      s += std::min(sa, sfb[static_cast<std::size_t>(n)]);
    }
  }
  *bound = sqrt_sf_tail(a, M + 1) * sqrt_sf_tail(b, 0) + sqrt_sf_tail(a, 0) * sqrt_sf_tail(b, N + 1);
  return s - a * b;
}

CorrelationReport assemble(const std::vector<double>& vars,
                           const std::vector<std::vector<double>>& cov, double trunc) {
  std::size_t d = vars.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      num += cov[i][j];
      den += std::sqrt(vars[i] * vars[j]);
    }
  }
  CorrelationReport out;
  out.avg_rho = num / den;
  out.pairwise_cov = cov;
  out.trunc_bound = trunc;
  return out;
}

void require_dim2(std::size_t d) {
  if (d < 2) throw std::domain_error("avg_corr: requires d >= 2");
}

}  // namespace

CorrelationReport avg_corr(const CommonShockParams& p) {
  validate(p);
  require_dim2(p.dim());
  std::vector<double> vars = marginal_rates(p);
  std::vector<std::vector<double>> cov(p.dim(), std::vector<double>(p.dim(), p.theta0));
  for (std::size_t i = 0; i < p.dim(); ++i) cov[i][i] = vars[i];
  return assemble(vars, cov, 0.0);
}

CorrelationReport avg_corr(const ComonotonicParams& p, double tail_eps) {
  validate(p);
  require_dim2(p.dim());
  std::size_t d = p.dim();
  std::vector<double> vars = marginal_rates(p);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  double trunc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    cov[i][i] = vars[i];
    for (std::size_t j = i + 1; j < d; ++j) {
      double bound = 0.0;
      cov[i][j] = cov[j][i] =
          comonotonic_cov(p.theta * p.lambdas[i], p.theta * p.lambdas[j], tail_eps, &bound);
      trunc += bound;
    }
  }
  return assemble(vars, cov, trunc);
}

CorrelationReport avg_corr(const ThinningParams& p, bool paper_formula) {
  validate(p);
  require_dim2(p.dim());
  std::size_t d = p.dim();
  std::vector<double> vars = marginal_rates(p);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    cov[i][i] = vars[i];
    for (std::size_t j = i + 1; j < d; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < p.sources(); ++k) c += p.thetas[k] * p.probs[i][k] * p.probs[j][k];
      cov[i][j] = cov[j][i] = c;
    }
  }
  CorrelationReport out = assemble(vars, cov, 0.0);
  if (paper_formula) {
    // The paper's display drops the theta_k factors from both sums.
    double num = 0.0, den = 0.0;
    std::vector<double> psum(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < p.sources(); ++k) psum[i] += p.probs[i][k];
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        double c = 0.0;
        for (std::size_t k = 0; k < p.sources(); ++k) c += p.probs[i][k] * p.probs[j][k];
        num += c;
        den += std::sqrt(psum[i] * psum[j]);
      }
    }
    out.avg_rho = num / den;
  }
  return out;
}

CorrelationReport avg_corr(const ModelParams& p, bool paper_formula) {
  if (const auto* c = std::get_if<CommonShockParams>(&p)) return avg_corr(*c);
  if (const auto* m = std::get_if<ComonotonicParams>(&p)) return avg_corr(*m);
  return avg_corr(std::get<ThinningParams>(p), paper_formula);
}

PairCorrBounds pair_corr_bounds(double theta_i, double theta_j, double tail_eps) {
  if (!(theta_i > 0.0) || !(theta_j > 0.0)) {
    throw std::domain_error("pair_corr_bounds: rates must be > 0");
  }
  std::int64_t M = quantile0(theta_i, 1.0 - tail_eps);
  std::int64_t N = quantile0(theta_j, 1.0 - tail_eps);
  std::vector<double> sfj(static_cast<std::size_t>(N) + 1), cdj(static_cast<std::size_t>(N) + 1);
  for (std::int64_t n = 0; n <= N; ++n) {
    sfj[static_cast<std::size_t>(n)] = sf0(theta_j, n);
    cdj[static_cast<std::size_t>(n)] = cdf0(theta_j, n);
  }
  double smax = 0.0, smin = 0.0;
  for (std::int64_t m = 0; m <= M; ++m) {
    double sfi = sf0(theta_i, m);
    double cdi = cdf0(theta_i, m);
    for (std::int64_t n = 0; n <= N; ++n) {
      smax += std::min(sfi, sfj[static_cast<std::size_t>(n)]);
      double t = 1.0 - cdi - cdj[static_cast<std::size_t>(n)];
      if (t > 0.0) smin += t;
    }
  }
  double denom = std::sqrt(theta_i * theta_j);
  PairCorrBounds out;
  out.rho_max = (smax - theta_i * theta_j) / denom;
  out.rho_min = (-theta_i * theta_j + smin) / denom;
  out.trunc_bound = (sqrt_sf_tail(theta_i, M + 1) * sqrt_sf_tail(theta_j, 0) +
                     sqrt_sf_tail(theta_i, 0) * sqrt_sf_tail(theta_j, N + 1)) /
                    denom;
  return out;
}

}  // namespace mvpois
