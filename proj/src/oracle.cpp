#include "mvpois/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mvpois/poisson.hpp"

namespace mvpois {

namespace {

std::int64_t quantile_cap(double rate, double eps) {
  if (rate == 0.0) return 0;
  return poisson_quantile(PoissonDist{rate}, 1.0 - eps);
}

double pmf_lin(double rate, std::int64_t k) {
  if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
  return poisson_pmf(PoissonDist{rate}, k).value;
}

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

void check_lattice(const std::vector<std::int64_t>& caps) {
  double points = 1.0;
  for (std::int64_t c : caps) points *= static_cast<double>(c + 1);
  if (points > 1e8) {
    throw std::domain_error("brute_force_extreme_cdf: truncated lattice exceeds 1e8 points");
  }
}

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

McEstimate mc_extreme_cdf(const ModelParams& p, const ExtremeQuery& q, std::int64_t n,
                          std::uint64_t seed, std::uint32_t streams) {
  validate(p);
  if (n < 10000) throw std::domain_error("mc_extreme_cdf: n must be >= 1e4");
  if (streams == 0) throw std::domain_error("mc_extreme_cdf: streams must be >= 1");
  std::int64_t xf = q.x < 0.0 ? -1 : static_cast<std::int64_t>(std::floor(q.x));

  std::vector<std::int64_t> hits(streams, 0);
  auto run_stream = [&](std::uint32_t s) {
    std::int64_t ns = n / streams + (s < n % streams ? 1 : 0);
    CounterRng rng(seed, s);
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < ns; ++i) {
      SampleVector v = sample(p, rng);
      std::int64_t extreme = q.kind == Extreme::kMax
                                 ? *std::max_element(v.values.begin(), v.values.end())
                                 : *std::min_element(v.values.begin(), v.values.end());
      if (extreme <= xf) ++count;
    }
    hits[s] = count;
  };

  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::uint32_t workers = std::min<std::uint32_t>(streams, hw);
  std::vector<std::thread> pool;
  for (std::uint32_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint32_t s = w; s < streams; s += workers) run_stream(s);
    });
  }
  for (auto& t : pool) t.join();

  std::int64_t total = 0;
  for (std::int64_t h : hits) total += h;
  McEstimate out;
  out.estimate = static_cast<double>(total) / static_cast<double>(n);
  out.std_err = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(n));
  out.n = n;
  out.seed = seed;
  out.streams = streams;
  return out;
}

double brute_force_extreme_cdf(const CommonShockParams& p, const ExtremeQuery& q,
                               double lattice_eps) {
  validate(p);
  if (q.x < 0.0) return 0.0;
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  std::size_t d = p.dim();
  double share = lattice_eps / static_cast<double>(d + 1);

  std::vector<std::int64_t> caps(d + 1);
  caps[0] = quantile_cap(p.theta0, share);
  for (std::size_t j = 0; j < d; ++j) caps[j + 1] = quantile_cap(p.thetas[j], share);
  check_lattice(caps);

  std::vector<std::vector<double>> pmf(d + 1);
  pmf[0].resize(static_cast<std::size_t>(caps[0]) + 1);
  for (std::int64_t k = 0; k <= caps[0]; ++k) pmf[0][static_cast<std::size_t>(k)] = pmf_lin(p.theta0, k);
  for (std::size_t j = 0; j < d; ++j) {
    pmf[j + 1].resize(static_cast<std::size_t>(caps[j + 1]) + 1);
    for (std::int64_t k = 0; k <= caps[j + 1]; ++k) {
      pmf[j + 1][static_cast<std::size_t>(k)] = pmf_lin(p.thetas[j], k);
    }
  }

  Kahan acc;
  for_each_cell(caps, [&](const std::vector<std::int64_t>& y) {
    std::int64_t extreme = q.kind == Extreme::kMax ? std::numeric_limits<std::int64_t>::min()
                                                   : std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j < d; ++j) {
      std::int64_t xj = y[0] + y[j + 1];
      extreme = q.kind == Extreme::kMax ? std::max(extreme, xj) : std::min(extreme, xj);
    }
    if (extreme > xf) return;
    double w = pmf[0][static_cast<std::size_t>(y[0])];
    for (std::size_t j = 0; j < d; ++j) w *= pmf[j + 1][static_cast<std::size_t>(y[j + 1])];
    acc.add(w);
  });
  return acc.sum;
}

double brute_force_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q,
                               double lattice_eps) {
  validate(p);
  if (q.x < 0.0) return 0.0;
  std::int64_t xf = static_cast<std::int64_t>(std::floor(q.x));
  std::size_t l = p.sources(), d = p.dim();
  double share = lattice_eps / static_cast<double>(l);

  std::vector<std::int64_t> caps(l);
  for (std::size_t k = 0; k < l; ++k) caps[k] = quantile_cap(p.thetas[k], share);
  check_lattice(caps);

  Kahan acc;
  for_each_cell(caps, [&](const std::vector<std::int64_t>& y) {
    double w = 1.0;
    for (std::size_t k = 0; k < l; ++k) w *= pmf_lin(p.thetas[k], y[k]);
    if (w == 0.0) return;
    double conditional;
    if (q.kind == Extreme::kMax) {
      conditional = 1.0;
      for (std::size_t j = 0; j < d; ++j) conditional *= thinning_conditional_cdf(p, j, xf, y);
    } else {
      double prod_bar = 1.0;
      for (std::size_t j = 0; j < d; ++j) prod_bar *= 1.0 - thinning_conditional_cdf(p, j, xf, y);
      conditional = 1.0 - prod_bar;
    }
    acc.add(w * conditional);
  });
  return acc.sum;
}

}  // namespace mvpois
