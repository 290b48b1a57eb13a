#include "mvpois/models.hpp"

#include <cmath>
#include <stdexcept>

#include "mvpois/poisson.hpp"

namespace mvpois {

namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void validate(const CommonShockParams& p) {
  if (p.thetas.empty()) throw std::domain_error("common: thetas must have d >= 1 entries");
  if (!positive_finite(p.theta0)) throw std::domain_error("common: theta0 must be > 0");
  for (double t : p.thetas) {
    if (!positive_finite(t)) throw std::domain_error("common: thetas entries must be > 0");
  }
}

void validate(const ComonotonicParams& p) {
  if (p.lambdas.empty()) throw std::domain_error("comonotonic: lambdas must have d >= 1 entries");
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) {
    throw std::domain_error("comonotonic: theta must be in [0,1]");
  }
  for (double l : p.lambdas) {
    if (!positive_finite(l)) throw std::domain_error("comonotonic: lambdas entries must be > 0");
  }
}

void validate(const ThinningParams& p) {
  if (p.thetas.empty()) throw std::domain_error("thinning: thetas must have l >= 1 entries");
  if (p.probs.empty()) throw std::domain_error("thinning: probs must have d >= 1 rows");
  for (double t : p.thetas) {
    if (!positive_finite(t)) throw std::domain_error("thinning: thetas entries must be > 0");
  }
  for (const auto& row : p.probs) {
    if (row.size() != p.thetas.size()) {
      throw std::domain_error("thinning: probs rows must have l columns");
    }
    double rate = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!(row[k] >= 0.0 && row[k] <= 1.0)) {
        throw std::domain_error("thinning: probs entries must be in [0,1]");
      }
      rate += row[k] * p.thetas[k];
    }
    if (!(rate > 0.0)) throw std::domain_error("thinning: each marginal rate must be > 0");
  }
}

void validate(const ModelParams& p) {
  std::visit([](const auto& q) { validate(q); }, p);
}

std::vector<double> marginal_rates(const CommonShockParams& p) {
  std::vector<double> out;
  out.reserve(p.dim());
  for (double t : p.thetas) out.push_back(p.theta0 + t);
  return out;
}

std::vector<double> marginal_rates(const ComonotonicParams& p) { return p.lambdas; }

std::vector<double> marginal_rates(const ThinningParams& p) {
  std::vector<double> out;
  out.reserve(p.dim());
  for (const auto& row : p.probs) {
    double rate = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) rate += row[k] * p.thetas[k];
    out.push_back(rate);
  }
  return out;
}

std::vector<double> marginal_rates(const ModelParams& p) {
  return std::visit([](const auto& q) { return marginal_rates(q); }, p);
}

std::int64_t sample_poisson(double rate, CounterRng& rng) {
  if (rate == 0.0) return 0;
  if (rate < 30.0) {
    // Inversion by sequential search on the pmf recurrence.
    double p = std::exp(-rate);
    double cum = p;
    double u = rng.uniform01();
    std::int64_t k = 0;
    while (u > cum && k < 400) {
      ++k;
      p *= rate / static_cast<double>(k);
      cum += p;
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993).
  const double log_rate = std::log(rate);
  const double b = 0.931 + 2.53 * std::sqrt(rate);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    std::int64_t k = static_cast<std::int64_t>(kf);
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = -rate + kf * log_rate - ln_gamma(kf + 1.0);
    if (lhs <= rhs) return k;
  }
}

std::int64_t sample_binomial(std::int64_t n, double p, CounterRng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - sample_binomial(n, 1.0 - p, rng);
  double np = static_cast<double>(n) * p;
  if (np < 10.0) {
    // Inversion on the pmf recurrence.
    double q = 1.0 - p;
    double s = p / q;
    double f = std::pow(q, static_cast<double>(n));
    double cum = f;
    double u = rng.uniform01();
    std::int64_t k = 0;
    while (u > cum && k < n) {
      f *= s * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cum += f;
    }
    return k;
  }
  // BTRS transformed rejection (Hormann 1993), valid for np >= 10, p <= 0.5.
  const double q = 1.0 - p;
  const double spq = std::sqrt(np * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = np + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double urvr = 0.86 * vr;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const std::int64_t m = static_cast<std::int64_t>(std::floor((n + 1) * p));
  const double h = ln_gamma(m + 1.0) + ln_gamma(static_cast<double>(n - m) + 1.0);
  for (;;) {
    double v = rng.uniform01();
    double u;
    if (v <= urvr) {
      u = v / vr - 0.43;
      double us = 0.5 - std::fabs(u);
      return static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + c));
    }
    if (v >= vr) {
      u = rng.uniform01() - 0.5;
    } else {
      u = v / vr - 0.93;
      u = (u < 0.0 ? -0.5 : 0.5) - u;
      v = rng.uniform01() * vr;
    }
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > static_cast<double>(n)) continue;
    std::int64_t k = static_cast<std::int64_t>(kf);
    v = v * alpha / (a / (us * us) + b);
    double rhs = h - ln_gamma(kf + 1.0) - ln_gamma(static_cast<double>(n - k) + 1.0) +
                 (kf - static_cast<double>(m)) * lpq;
    if (std::log(v) <= rhs) return k;
  }
}

SampleVector sample_common_shock(const CommonShockParams& p, CounterRng& rng) {
  std::int64_t y0 = sample_poisson(p.theta0, rng);
  SampleVector out;
  out.values.reserve(p.dim());
  for (double t : p.thetas) out.values.push_back(y0 + sample_poisson(t, rng));
  return out;
}

SampleVector sample_comonotonic(const ComonotonicParams& p, CounterRng& rng) {
  double u = rng.uniform01();
  SampleVector out;
  out.values.reserve(p.dim());
  for (double lam : p.lambdas) {
    std::int64_t z = 0;
    if (p.theta > 0.0) z = poisson_quantile(PoissonDist{p.theta * lam}, u);
    std::int64_t y = p.theta < 1.0 ? sample_poisson((1.0 - p.theta) * lam, rng) : 0;
    out.values.push_back(y + z);
  }
  return out;
}

SampleVector sample_thinning(const ThinningParams& p, CounterRng& rng) {
  SampleVector out;
  out.values.assign(p.dim(), 0);
  for (std::size_t k = 0; k < p.sources(); ++k) {
    std::int64_t yk = sample_poisson(p.thetas[k], rng);
    for (std::size_t j = 0; j < p.dim(); ++j) {
      out.values[j] += sample_binomial(yk, p.probs[j][k], rng);
    }
  }
  return out;
}

SampleVector sample(const ModelParams& p, CounterRng& rng) {
  if (const auto* c = std::get_if<CommonShockParams>(&p)) return sample_common_shock(*c, rng);
  if (const auto* m = std::get_if<ComonotonicParams>(&p)) return sample_comonotonic(*m, rng);
  return sample_thinning(std::get<ThinningParams>(p), rng);
}

ThinningParams thinning_from_common(const CommonShockParams& p) {
  validate(p);
  std::size_t d = p.dim();
  ThinningParams out;
  out.thetas = p.thetas;
  out.thetas.push_back(p.theta0);
  out.probs.assign(d, std::vector<double>(d + 1, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    out.probs[j][j] = 1.0;
    out.probs[j][d] = 1.0;
  }
  return out;
}

CommonShockParams common_from_comonotonic_equal_rates(const ComonotonicParams& p) {
  validate(p);
  double lam = p.lambdas.front();
  for (double l : p.lambdas) {
    if (l != lam) {
      throw std::domain_error("common_from_comonotonic_equal_rates: rates must be equal");
    }
  }
  if (p.theta <= 0.0 || p.theta >= 1.0) {
    throw std::domain_error(
        "common_from_comonotonic_equal_rates: theta in (0,1) required for positive rates");
  }
  CommonShockParams out;
  out.theta0 = p.theta * lam;
  out.thetas.assign(p.dim(), (1.0 - p.theta) * lam);
  return out;
}

}  // namespace mvpois
