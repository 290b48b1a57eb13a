#include "mvpois/extrema.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvpois/poisson.hpp"

namespace mvpois {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_query(const ExtremeQuery& q) {
  if (!(q.tail_eps > 0.0 && q.tail_eps <= 1e-3)) {
    throw std::domain_error("ExtremeQuery: tail_eps must be in (0, 1e-3]");
  }
}

// Rate-zero tolerant Poisson helpers: rate 0 is the point mass at 0, used for
// the comonotonic boundaries theta = 0 and theta = 1.
double log_cdf0(double rate, std::int64_t k) {
  if (k < 0) return kNegInf;
  if (rate == 0.0) return 0.0;
  return poisson_cdf(PoissonDist{rate}, static_cast<double>(k)).log_value;
}

double cdf0(double rate, std::int64_t k) {
  if (k < 0) return 0.0;
  if (rate == 0.0) return 1.0;
  return poisson_cdf(PoissonDist{rate}, static_cast<double>(k)).value;
}

double log_sf0(double rate, std::int64_t k) {
  if (k < 0) return 0.0;
  if (rate == 0.0) return kNegInf;
  return poisson_sf(PoissonDist{rate}, static_cast<double>(k)).log_value;
}

double sf0(double rate, std::int64_t k) {
  if (k < 0) return 1.0;
  if (rate == 0.0) return 0.0;
  return poisson_sf(PoissonDist{rate}, static_cast<double>(k)).value;
}

double log_pmf0(double rate, std::int64_t k) {
  if (k < 0) return kNegInf;
  if (rate == 0.0) return k == 0 ? 0.0 : kNegInf;
  return poisson_pmf(PoissonDist{rate}, k).log_value;
}

std::int64_t quantile0(double rate, double u) {
  if (rate == 0.0) return 0;
  return poisson_quantile(PoissonDist{rate}, u);
}

// log(1 - e^s) for s <= 0.
double log1m_exp(double s) {
  if (s >= 0.0) return kNegInf;
  return s < -0.6931471805599453 ? std::log1p(-std::exp(s)) : std::log(-std::expm1(s));
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

EvalResult finish(double log_value, double trunc, EvalMethod m) {
  return {clamp01(std::exp(log_value)), log_value, trunc, m};
}

EvalResult zero_result(EvalMethod m) { return {0.0, kNegInf, 0.0, m}; }

// Iterates all integer cells of the box [0,caps[0]] x ... x [0,caps[d-1]].
template <typename F>
void for_each_cell(const std::vector<std::int64_t>& caps, F&& body) {
  std::vector<std::int64_t> z(caps.size(), 0);
  for (;;) {
    body(z);
    std::size_t i = 0;
    while (i < z.size()) {
      if (++z[i] <= caps[i]) break;
      z[i] = 0;
      ++i;
    }
    if (i == z.size()) return;
  }
}

}  // namespace

EvalResult common_shock_extreme_cdf(const CommonShockParams& p, const ExtremeQuery& q) {
  validate(p);
  check_query(q);
  if (q.x < 0.0) return zero_result(EvalMethod::kCommonShockSum);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  LogSum acc;
  for (std::int64_t y = 0; y <= xf; ++y) {
    double lw = log_pmf0(p.theta0, y);
    if (q.kind == Extreme::kMax) {
      double s = 0.0;
      for (double t : p.thetas) s += log_cdf0(t, xf - y);
      acc.add(lw + s);
    } else {
      double s = 0.0;
      for (double t : p.thetas) s += log_sf0(t, xf - y);
      acc.add(lw + log1m_exp(s));
    }
  }
  return finish(acc.log(), 0.0, EvalMethod::kCommonShockSum);
}

double comonotonic_mass(const ComonotonicParams& p, const std::vector<std::int64_t>& z) {
  validate(p);
  if (z.size() != p.dim()) throw std::domain_error("comonotonic_mass: z must have d entries");
  double hi = 1.0, lo = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] < 0) throw std::domain_error("comonotonic_mass: z entries must be >= 0");
    hi = std::min(hi, cdf0(p.theta * p.lambdas[j], z[j]));
    lo = std::max(lo, cdf0(p.theta * p.lambdas[j], z[j] - 1));
  }
  return std::max(0.0, hi - lo);
}

EvalResult comonotonic_extreme_cdf_nested(const ComonotonicParams& p, const ExtremeQuery& q,
                                          std::size_t nesting_cap) {
  validate(p);
  check_query(q);
  std::size_t d = p.dim();
  if (d > nesting_cap) {
    throw std::domain_error(
        "comonotonic_extreme_cdf_nested: d exceeds the nesting cap; use the integral form");
  }
  if (q.x < 0.0) return zero_result(EvalMethod::kComonotonicNested);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));

  if (q.kind == Extreme::kMax) {
    // F_M = sum_{z in [0,x]^d} prod_j g_{(1-th)l_j}(x - z_j) * min_j G_{th l_j}(z_j)
    std::vector<std::vector<double>> lg(d), lG(d);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::int64_t t = 0; t <= xf; ++t) {
        lg[j].push_back(log_pmf0((1.0 - p.theta) * p.lambdas[j], t));
        lG[j].push_back(log_cdf0(p.theta * p.lambdas[j], t));
      }
    }
    LogSum acc;
    std::vector<std::int64_t> caps(d, xf);
    for_each_cell(caps, [&](const std::vector<std::int64_t>& z) {
      double s = 0.0, mn = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += lg[j][xf - z[j]];
        mn = std::min(mn, lG[j][z[j]]);
      }
      acc.add(s + mn);
    });
    return finish(acc.log(), 0.0, EvalMethod::kComonotonicNested);
  }

  // F_m = sum_{z >= 0} prod_j g_{(1-th)l_j}(z_j) * max_j G_{th l_j}(x - z_j),
  // z_j truncated at the 1 - eps/(2d) quantile of P((1-th)l_j).
  double level = 1.0 - q.tail_eps / (2.0 * static_cast<double>(d));
  std::vector<std::int64_t> caps(d);
  double trunc = 0.0;
  std::vector<std::vector<double>> lg(d), lGx(d);
  for (std::size_t j = 0; j < d; ++j) {
    double yrate = (1.0 - p.theta) * p.lambdas[j];
    caps[j] = quantile0(yrate, level);
    trunc += sf0(yrate, caps[j]);
    for (std::int64_t t = 0; t <= caps[j]; ++t) {
      lg[j].push_back(log_pmf0(yrate, t));
      lGx[j].push_back(log_cdf0(p.theta * p.lambdas[j], xf - t));
    }
  }
  LogSum acc;
  for_each_cell(caps, [&](const std::vector<std::int64_t>& z) {
    double s = 0.0, mx = kNegInf;
    for (std::size_t j = 0; j < d; ++j) {
      s += lg[j][z[j]];
      mx = std::max(mx, lGx[j][z[j]]);
    }
    if (mx != kNegInf) acc.add(s + mx);
  });
  return finish(acc.log(), trunc, EvalMethod::kComonotonicNested);
}

EvalResult comonotonic_extreme_cdf_copula(const ComonotonicParams& p, const ExtremeQuery& q,
                                          std::size_t nesting_cap) {
  validate(p);
  check_query(q);
  std::size_t d = p.dim();
  if (d > nesting_cap) {
    throw std::domain_error(
        "comonotonic_extreme_cdf_copula: d exceeds the nesting cap; use the integral form");
  }
  if (q.x < 0.0) return zero_result(EvalMethod::kComonotonicCopula);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));

  if (q.kind == Extreme::kMax) {
    // F_M = sum_z prod_j G_{(1-th)l_j}(x - z_j) * C(z); C vanishes off the
    // comonotone staircase so most cells drop out immediately.
    LogSum acc;
    std::vector<std::int64_t> caps(d, xf);
    for_each_cell(caps, [&](const std::vector<std::int64_t>& z) {
      double mass = comonotonic_mass(p, z);
      if (mass <= 0.0) return;
      double s = std::log(mass);
      for (std::size_t j = 0; j < d; ++j) {
        s += log_cdf0((1.0 - p.theta) * p.lambdas[j], xf - z[j]);
      }
      acc.add(s);
    });
    return finish(acc.log(), 0.0, EvalMethod::kComonotonicCopula);
  }

  // F_m = 1 - sum_z prod_j G-bar_{(1-th)l_j}(x - z_j) * C(z), z_j truncated
  // at the 1 - eps/(2d) quantile of the shock component P(th l_j).
  double level = 1.0 - q.tail_eps / (2.0 * static_cast<double>(d));
  std::vector<std::int64_t> caps(d);
  double trunc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double zrate = p.theta * p.lambdas[j];
    caps[j] = quantile0(zrate, level);
    trunc += sf0(zrate, caps[j]);
  }
  LogSum acc;
  for_each_cell(caps, [&](const std::vector<std::int64_t>& z) {
    double mass = comonotonic_mass(p, z);
    if (mass <= 0.0) return;
    double s = std::log(mass);
    for (std::size_t j = 0; j < d; ++j) {
      s += log_sf0((1.0 - p.theta) * p.lambdas[j], xf - z[j]);
    }
    acc.add(s);
  });
  double lv = log1m_exp(std::min(0.0, acc.log()));
  return finish(lv, trunc, EvalMethod::kComonotonicCopula);
}

EvalResult comonotonic_extreme_cdf_integral(const ComonotonicParams& p, const ExtremeQuery& q) {
  validate(p);
  check_query(q);
  if (q.x < 0.0) return zero_result(EvalMethod::kComonotonicIntegral);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  std::size_t d = p.dim();

  // Breakpoints are the atoms {G_{th l_j}(z)} of the shock quantile
  // functions; between consecutive atoms the integrand is constant.
  struct Breakpoint {
    double level;
    std::size_t j;
  };
  std::vector<Breakpoint> bps;
  std::vector<std::int64_t> zstate(d, 0);
  std::vector<double> contrib(d);

  if (q.kind == Extreme::kMax) {
    // Integrand prod_j G_{(1-th)l_j}(x - Q_j(u)) vanishes for
    // u > u_end = min_j G_{th l_j}(x); everything below is exact.
    double u_end = 1.0;
    for (std::size_t j = 0; j < d; ++j) u_end = std::min(u_end, cdf0(p.theta * p.lambdas[j], xf));
    for (std::size_t j = 0; j < d; ++j) {
      double zrate = p.theta * p.lambdas[j];
      if (zrate == 0.0) continue;
      for (std::int64_t z = 0; z < xf; ++z) {
        double v = cdf0(zrate, z);
        if (v >= u_end) break;
        bps.push_back({v, j});
      }
    }
    std::sort(bps.begin(), bps.end(),
              [](const Breakpoint& a, const Breakpoint& b) { return a.level < b.level; });
    double lsum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      contrib[j] = log_cdf0((1.0 - p.theta) * p.lambdas[j], xf);
      lsum += contrib[j];
    }
    LogSum acc;
    double prev = 0.0;
    auto flush = [&](double to) {
      if (to > prev) {
        acc.add(lsum + std::log(to - prev));
        prev = to;
      }
    };
    for (const auto& bp : bps) {
      flush(bp.level);
      std::size_t j = bp.j;
      ++zstate[j];
      lsum -= contrib[j];
      contrib[j] = log_cdf0((1.0 - p.theta) * p.lambdas[j], xf - zstate[j]);
      lsum += contrib[j];
    }
    flush(u_end);
    return finish(acc.log(), 0.0, EvalMethod::kComonotonicIntegral);
  }

  // Min: F_m = 1 - int_0^1 prod_j Gbar_{(1-th)l_j}(x - Q_j(u)) du. The
  // integrand is exactly 1 above u_all = max_j G_{th l_j}(x); atoms are
  // enumerated up to the 1 - tail_eps level and the remaining sliver is
  // bounded by integrand <= 1.
  double u_all = 0.0;
  for (std::size_t j = 0; j < d; ++j) u_all = std::max(u_all, cdf0(p.theta * p.lambdas[j], xf));
  double u_stop = std::min(u_all, 1.0 - q.tail_eps);
  for (std::size_t j = 0; j < d; ++j) {
    double zrate = p.theta * p.lambdas[j];
    if (zrate == 0.0) continue;
    for (std::int64_t z = 0;; ++z) {
      double v = cdf0(zrate, z);
      if (v >= u_stop) break;
      bps.push_back({v, j});
    }
  }
  std::sort(bps.begin(), bps.end(),
            [](const Breakpoint& a, const Breakpoint& b) { return a.level < b.level; });
  double lsum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    contrib[j] = log_sf0((1.0 - p.theta) * p.lambdas[j], xf);
    lsum += contrib[j];
  }
  LogSum acc;  // log of int_0^{u_stop} prod Gbar du
  double prev = 0.0;
  auto flush = [&](double to) {
    if (to > prev) {
      acc.add(lsum + std::log(to - prev));
      prev = to;
    }
  };
  for (const auto& bp : bps) {
    flush(bp.level);
    std::size_t j = bp.j;
    ++zstate[j];
    lsum -= contrib[j];
    contrib[j] = log_sf0((1.0 - p.theta) * p.lambdas[j], xf - zstate[j]);
    lsum += contrib[j];
  }
  flush(u_stop);
  double gap = std::max(0.0, u_all - u_stop);
  double trunc = gap * (1.0 - std::exp(lsum));  // residual treated as integrand 1
  double total = std::exp(acc.log()) + gap + (1.0 - u_all);
  double lv = total >= 1.0 ? kNegInf : std::log1p(-total);
  EvalResult r = finish(lv, trunc, EvalMethod::kComonotonicIntegral);
  return r;
}

double thinning_conditional_cdf(const ThinningParams& p, std::size_t j, std::int64_t x,
                                const std::vector<std::int64_t>& y) {
  validate(p);
  if (j >= p.dim()) throw std::domain_error("thinning_conditional_cdf: coordinate out of range");
  if (y.size() != p.sources()) throw std::domain_error("thinning_conditional_cdf: y must have l entries");
  for (std::int64_t yk : y) {
    if (yk < 0) throw std::domain_error("thinning_conditional_cdf: y entries must be >= 0");
  }
  if (x < 0) return 0.0;
  std::vector<double> cells(static_cast<std::size_t>(x) + 1, 0.0);
  cells[0] = 1.0;
  std::vector<double> next(cells.size());
  for (std::size_t k = 0; k < p.sources(); ++k) {
    std::int64_t n = y[k];
    double pk = p.probs[j][k];
    std::fill(next.begin(), next.end(), 0.0);
    std::int64_t tmax = std::min<std::int64_t>(n, x);
    if (pk >= 1.0) {
      // all n trials retained: shift by n (drops out entirely when n > x)
      if (n <= x) {
        for (std::int64_t s = 0; s + n <= x; ++s) next[s + n] = cells[s];
      }
      cells.swap(next);
      continue;
    }
    for (std::int64_t t = 0; t <= tmax; ++t) {
      double lb = ln_gamma(static_cast<double>(n) + 1.0) - ln_gamma(static_cast<double>(t) + 1.0) -
                  ln_gamma(static_cast<double>(n - t) + 1.0);
      double bt = pk == 0.0 ? (t == 0 ? 1.0 : 0.0)
                            : std::exp(lb + t * std::log(pk) + (n - t) * std::log1p(-pk));
      if (bt == 0.0) continue;
      for (std::int64_t s = 0; s + t <= x; ++s) {
        if (cells[s] != 0.0) next[s + t] += cells[s] * bt;
      }
    }
    cells.swap(next);
  }
  double total = 0.0;
  for (double c : cells) total += c;
  return clamp01(total);
}

EvalResult thinning_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q) {
  validate(p);
  check_query(q);
  if (q.x < 0.0) return zero_result(EvalMethod::kThinningLattice);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  std::size_t l = p.sources(), d = p.dim();

  double level = 1.0 - q.tail_eps / (2.0 * static_cast<double>(l));
  std::vector<std::int64_t> caps(l);
  double trunc = 0.0;
  std::vector<std::vector<double>> lpmf(l);
  for (std::size_t k = 0; k < l; ++k) {
    caps[k] = std::max<std::int64_t>(quantile0(p.thetas[k], level), xf + 1);
    trunc += sf0(p.thetas[k], caps[k]);
    for (std::int64_t t = 0; t <= caps[k]; ++t) lpmf[k].push_back(log_pmf0(p.thetas[k], t));
  }

  LogSum acc;
  std::vector<std::int64_t> y(l);
  for_each_cell(caps, [&](const std::vector<std::int64_t>& cell) {
    double lw = 0.0;
    std::int64_t total = 0;
    for (std::size_t k = 0; k < l; ++k) {
      lw += lpmf[k][cell[k]];
      total += cell[k];
    }
    if (total <= xf) {
      acc.add(lw);
      return;
    }
    if (q.kind == Extreme::kMax) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double c = thinning_conditional_cdf(p, j, xf, cell);
        if (c <= 0.0) return;
        s += std::log(c);
      }
      acc.add(lw + s);
    } else {
      double prod_bar = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        prod_bar *= 1.0 - thinning_conditional_cdf(p, j, xf, cell);
        if (prod_bar == 0.0) break;
      }
      if (prod_bar < 1.0) acc.add(lw + std::log1p(-prod_bar));
    }
  });
  return finish(acc.log(), trunc, EvalMethod::kThinningLattice);
}

EvalResult thinning_l1_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q) {
  validate(p);
  check_query(q);
  if (p.sources() != 1) throw std::domain_error("thinning_l1_extreme_cdf: requires l = 1");
  if (q.x < 0.0) return zero_result(EvalMethod::kThinningBetaSeries);
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  double t1 = p.thetas[0];
  std::int64_t cap = std::max<std::int64_t>(quantile0(t1, 1.0 - q.tail_eps), xf + 1);

  LogSum acc;
  acc.add(log_cdf0(t1, xf));
  double xa = static_cast<double>(xf) + 1.0;
  for (std::int64_t y = xf + 1; y <= cap; ++y) {
    double lw = log_pmf0(t1, y);
    double ya = static_cast<double>(y - xf);
    if (q.kind == Extreme::kMax) {
      // P(X_j <= x | y) = I_{1-p_j}(y-x, x+1)
      double s = 0.0;
      for (std::size_t j = 0; j < p.dim(); ++j) {
        s += reg_inc_beta(1.0 - p.probs[j][0], ya, xa).log_value;
      }
      if (s != kNegInf) acc.add(lw + s);
    } else {
      // P(X_j > x | y) = I_{p_j}(x+1, y-x)
      double prod_bar = 1.0;
      for (std::size_t j = 0; j < p.dim(); ++j) {
        prod_bar *= reg_inc_beta(p.probs[j][0], xa, ya).value;
        if (prod_bar == 0.0) break;
      }
      if (prod_bar < 1.0) acc.add(lw + std::log1p(-prod_bar));
    }
  }
  return finish(acc.log(), sf0(t1, cap), EvalMethod::kThinningBetaSeries);
}

EvalResult extreme_cdf(const ModelParams& p, const ExtremeQuery& q) {
  if (const auto* c = std::get_if<CommonShockParams>(&p)) return common_shock_extreme_cdf(*c, q);
  if (const auto* m = std::get_if<ComonotonicParams>(&p)) return comonotonic_extreme_cdf_integral(*m, q);
  const auto& t = std::get<ThinningParams>(p);
  return t.sources() == 1 ? thinning_l1_extreme_cdf(t, q) : thinning_extreme_cdf(t, q);
}

}  // namespace mvpois
