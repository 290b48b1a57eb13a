#include "mvpois/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mvpois/poisson.hpp"

namespace mvpois {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kClusterTol = 1e-12;

double log_cdf0(double rate, std::int64_t k) {
  if (k < 0) return kNegInf;
  if (rate == 0.0) return 0.0;
  return poisson_cdf(PoissonDist{rate}, static_cast<double>(k)).log_value;
}

double cdf0(double rate, std::int64_t k) {
  if (k < 0) return 0.0;
  if (rate == 0.0) return 1.0;
  if (std::isinf(rate)) return 0.0;
  return poisson_cdf(PoissonDist{rate}, static_cast<double>(k)).value;
}

double log_sf0(double rate, std::int64_t k) {
  if (k < 0) return 0.0;
  if (rate == 0.0) return kNegInf;
  return poisson_sf(PoissonDist{rate}, static_cast<double>(k)).log_value;
}

double log1m_exp(double s) {
  if (s >= 0.0) return kNegInf;
  return s < -0.6931471805599453 ? std::log1p(-std::exp(s)) : std::log(-std::expm1(s));
}

std::int64_t floor_x(double x) { return static_cast<std::int64_t>(std::floor(x)); }

[[noreturn]] void bad_regime(const char* what) {
  throw std::domain_error(std::string("asymptotic_target: ") + what);
}

template <typename Params>
Params drop_coordinate(const Params& p, std::size_t i);

template <>
CommonShockParams drop_coordinate(const CommonShockParams& p, std::size_t i) {
  CommonShockParams out = p;
  out.thetas.erase(out.thetas.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

template <>
ComonotonicParams drop_coordinate(const ComonotonicParams& p, std::size_t i) {
  ComonotonicParams out = p;
  out.lambdas.erase(out.lambdas.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

template <>
ThinningParams drop_coordinate(const ThinningParams& p, std::size_t i) {
  ThinningParams out = p;
  out.probs.erase(out.probs.begin() + static_cast<std::ptrdiff_t>(i));
  return out;
}

RegularizedValue from_eval(const EvalResult& r) { return {r.value, r.log_value}; }

// Exact integral of prod_j G_{(1-th)r_j}(x - Q_{th r_j}(u)) / G_{(1-th)r_j}(x)
// over (lo, hi), swept across the shock-quantile atoms inside the interval.
double ratio_piece_integral(const std::vector<double>& rates, double theta, std::int64_t x,
                            double lo, double hi, bool survival_form) {
  struct Atom {
    double level;
    std::size_t j;
  };
  std::size_t n = rates.size();
  std::vector<Atom> atoms;
  std::vector<std::int64_t> zcur(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double zrate = theta * rates[j];
    std::int64_t z = 0;
    while (cdf0(zrate, z) <= lo) ++z;  // first atom strictly above lo
    zcur[j] = z;
    for (std::int64_t t = z;; ++t) {
      double v = cdf0(zrate, t);
      if (v >= hi) break;
      atoms.push_back({v, j});
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.level < b.level; });

  auto coord_log = [&](std::size_t j) {
    double yrate = (1.0 - theta) * rates[j];
    if (survival_form) return log_sf0(yrate, x - zcur[j]);
    return log_cdf0(yrate, x - zcur[j]) - log_cdf0(yrate, x);
  };
  std::vector<double> contrib(n);
  double lsum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    contrib[j] = coord_log(j);
    lsum += contrib[j];
  }
  double total = 0.0, prev = lo;
  auto flush = [&](double to) {
    if (to > prev) {
      double integrand = std::exp(lsum);
      total += (to - prev) * (survival_form ? 1.0 - integrand : integrand);
      prev = to;
    }
  };
  for (const auto& a : atoms) {
    flush(a.level);
    ++zcur[a.j];
    lsum -= contrib[a.j];
    contrib[a.j] = coord_log(a.j);
    lsum += contrib[a.j];
  }
  flush(hi);
  return total;
}

// Clusters of distinct probe values (tolerance kClusterTol), each with the
// first coordinate index attaining it and its multiplicity.
struct ValueCluster {
  double value;
  std::size_t first_j;  // 1-based coordinate index
  std::size_t count;
};

std::vector<ValueCluster> cluster_values(std::vector<std::pair<double, std::size_t>>& tagged) {
  std::sort(tagged.begin(), tagged.end());
  std::vector<ValueCluster> out;
  for (const auto& [v, j] : tagged) {
    if (!out.empty() && v - out.back().value <= kClusterTol) {
      ++out.back().count;
      out.back().first_j = std::min(out.back().first_j, j);
    } else {
      out.push_back({v, j, 1});
    }
  }
  return out;
}

}  // namespace

RegularizedValue asymptotic_target(const CommonShockParams& p, const Regime& r, double x) {
  validate(p);
  if (r.model != ModelKind::kCommon) bad_regime("regime model is not common shock");
  std::int64_t xf = floor_x(x);
  switch (r.limit) {
    case LimitKind::kMarginalRateToInf: {
      if (r.index >= p.dim()) bad_regime("coordinate index out of range");
      // F_{X_i}(x) * F_{M_{-i}^Y}(x); the marginal is Poisson(theta0+theta_i).
      if (r.kind == Extreme::kMax) {
        double lv = log_cdf0(p.theta0 + p.thetas[r.index], xf);
        for (std::size_t j = 0; j < p.dim(); ++j) {
          if (j != r.index) lv += log_cdf0(p.thetas[j], xf);
        }
        return reg_from_log(lv);
      }
      if (p.dim() < 2) bad_regime("min target needs d >= 2");
      return from_eval(common_shock_extreme_cdf(drop_coordinate(p, r.index),
                                                {Extreme::kMin, x, 1e-12}));
    }
    case LimitKind::kShockRateToInf: {
      if (r.kind == Extreme::kMax) {
        double lv = log_cdf0(p.theta0, xf);
        for (double t : p.thetas) lv -= t;
        return reg_from_log(lv);
      }
      double s = 0.0;
      for (double t : p.thetas) s += std::log1p(-std::exp(-t));
      return reg_from_log(log1m_exp(s) + log_cdf0(p.theta0, xf));
    }
    case LimitKind::kDimToInf:
      return common_dim_target(p, x, r.kind);
    default:
      bad_regime("limit not defined for the common shock model");
  }
}

RegularizedValue asymptotic_target(const ComonotonicParams& p, const Regime& r, double x) {
  validate(p);
  if (r.model != ModelKind::kComonotonic) bad_regime("regime model is not comonotonic");
  std::int64_t xf = floor_x(x);
  switch (r.limit) {
    case LimitKind::kMarginalRateToInf: {
      if (r.index >= p.dim()) bad_regime("coordinate index out of range");
      if (r.kind == Extreme::kMax) {
        double lv = log_cdf0(p.lambdas[r.index], xf);
        for (std::size_t j = 0; j < p.dim(); ++j) {
          if (j != r.index) lv += log_cdf0((1.0 - p.theta) * p.lambdas[j], xf);
        }
        return reg_from_log(lv);
      }
      if (p.dim() < 2) bad_regime("min target needs d >= 2");
      return from_eval(comonotonic_extreme_cdf_integral(drop_coordinate(p, r.index),
                                                        {Extreme::kMin, x, 1e-12}));
    }
    case LimitKind::kThetaToZero: {
      if (r.kind == Extreme::kMax) {
        double lv = 0.0;
        for (double l : p.lambdas) lv += log_cdf0((1.0 - p.theta) * l, xf);
        return reg_from_log(lv);
      }
      double s = 0.0;
      for (double l : p.lambdas) s += log_sf0((1.0 - p.theta) * l, xf);
      return reg_from_log(log1m_exp(s));
    }
    case LimitKind::kThetaToOne: {
      double best = r.kind == Extreme::kMax ? 0.0 : kNegInf;
      for (double l : p.lambdas) {
        double lv = log_cdf0(p.theta * l, xf);
        best = r.kind == Extreme::kMax ? std::min(best, lv) : std::max(best, lv);
      }
      return reg_from_log(best);
    }
    default:
      bad_regime("limit not defined for the comonotonic model (dimension sweeps use "
                 "comonotonic_dim_target)");
  }
}

RegularizedValue asymptotic_target(const ThinningParams& p, const Regime& r, double x) {
  validate(p);
  if (r.model != ModelKind::kThinning) bad_regime("regime model is not thinning");
  std::int64_t xf = floor_x(x);
  switch (r.limit) {
    case LimitKind::kProbToOne: {
      if (r.index >= p.dim()) bad_regime("coordinate index out of range");
      if (r.kind == Extreme::kMax) {
        return reg_from_log(log_cdf0(marginal_rates(p)[r.index], xf));
      }
      if (p.dim() < 2) bad_regime("min target needs d >= 2");
      return from_eval(thinning_extreme_cdf(drop_coordinate(p, r.index), {Extreme::kMin, x, 1e-12}));
    }
    case LimitKind::kProbToZero: {
      if (r.index >= p.dim()) bad_regime("coordinate index out of range");
      if (r.kind == Extreme::kMin) return reg_one();
      if (p.dim() < 2) bad_regime("max target needs d >= 2");
      return from_eval(thinning_extreme_cdf(drop_coordinate(p, r.index), {Extreme::kMax, x, 1e-12}));
    }
    case LimitKind::kDimToInf:
      return thinning_dim_target(p, x, r.kind);
    default:
      bad_regime("limit not defined for the thinning model");
  }
}

RegularizedValue asymptotic_target(const ModelParams& p, const Regime& r, double x) {
  if (const auto* c = std::get_if<CommonShockParams>(&p)) return asymptotic_target(*c, r, x);
  if (const auto* m = std::get_if<ComonotonicParams>(&p)) return asymptotic_target(*m, r, x);
  return asymptotic_target(std::get<ThinningParams>(p), r, x);
}

RegularizedValue common_dim_target(const CommonShockParams& p, double x, Extreme kind) {
  validate(p);
  std::int64_t xf = floor_x(x);
  if (kind == Extreme::kMin) return reg_from_log(log_cdf0(p.theta0, xf));
  double lv = -p.theta0;
  for (double t : p.thetas) lv += log_cdf0(t, xf);
  return reg_from_log(lv);
}

RateSequence RateSequence::constant(double a) {
  RateSequence s;
  s.kind_ = Kind::kConstant;
  s.a_ = a;
  return s;
}

RateSequence RateSequence::affine_inv_j(double a, double b) {
  RateSequence s;
  s.kind_ = Kind::kAffineInvJ;
  s.a_ = a;
  s.b_ = b;
  return s;
}

RateSequence RateSequence::power_j(double a, double p) {
  RateSequence s;
  s.kind_ = Kind::kPowerJ;
  s.a_ = a;
  s.b_ = p;
  return s;
}

RateSequence RateSequence::explicit_list(std::vector<double> values, bool repeat_last) {
  if (values.empty()) throw std::domain_error("RateSequence: explicit list must be nonempty");
  RateSequence s;
  s.kind_ = Kind::kExplicit;
  s.values_ = std::move(values);
  s.repeat_last_ = repeat_last;
  return s;
}

RateSequence RateSequence::parse(const std::string& expr) {
  // Accepted forms: "a", "a+b/j", "a-b/j", "a*j^p".
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::domain_error("");
      return v;
    } catch (const std::exception&) {
      throw std::domain_error("RateSequence: bad number in '" + expr + "'");
    }
  };
  std::string t;
  for (char c : expr) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (auto star = t.find("*j^"); star != std::string::npos) {
    return power_j(num(t.substr(0, star)), num(t.substr(star + 3)));
  }
  if (t.size() >= 2 && t.substr(t.size() - 2) == "/j") {
    std::string head = t.substr(0, t.size() - 2);
    // split at the last +/- that is not an exponent sign or leading sign
    for (std::size_t i = head.size(); i-- > 1;) {
      char c = head[i];
      if ((c == '+' || c == '-') && head[i - 1] != 'e' && head[i - 1] != 'E') {
        double a = num(head.substr(0, i));
        double b = num(head.substr(i + 1));
        return affine_inv_j(a, c == '+' ? b : -b);
      }
    }
    throw std::domain_error("RateSequence: cannot parse '" + expr + "'");
  }
  return constant(num(t));
}

double RateSequence::rate(std::size_t j) const {
  if (j == 0) throw std::domain_error("RateSequence: index is 1-based");
  switch (kind_) {
    case Kind::kConstant:
      return a_;
    case Kind::kAffineInvJ:
      return a_ + b_ / static_cast<double>(j);
    case Kind::kPowerJ:
      return a_ * std::pow(static_cast<double>(j), b_);
    case Kind::kExplicit:
      if (j <= values_.size()) return values_[j - 1];
      if (repeat_last_) return values_.back();
      throw std::domain_error("RateSequence: index beyond explicit list without repeat_last");
  }
  return a_;
}

double RateSequence::limit() const {
  switch (kind_) {
    case Kind::kConstant:
    case Kind::kAffineInvJ:
      return a_;
    case Kind::kPowerJ:
      if (b_ > 0.0) return std::numeric_limits<double>::infinity();
      if (b_ < 0.0) return 0.0;
      return a_;
    case Kind::kExplicit:
      return values_.back();
  }
  return a_;
}

std::string RateSequence::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kConstant:
      os << a_;
      break;
    case Kind::kAffineInvJ:
      os << a_ << (b_ >= 0 ? "+" : "-") << std::fabs(b_) << "/j";
      break;
    case Kind::kPowerJ:
      os << a_ << "*j^" << b_;
      break;
    case Kind::kExplicit:
      os << "list[" << values_.size() << (repeat_last_ ? ",repeat_last" : "") << "]";
      break;
  }
  return os.str();
}

ComonotonicDimConstants comonotonic_dim_constants(const RateSequence& seq, double theta, double x,
                                                  std::size_t probe_depth) {
  if (probe_depth < 2) throw std::domain_error("comonotonic_dim_constants: probe_depth >= 2");
  std::int64_t xf = floor_x(x);
  double lim_rate = theta * seq.limit();
  double m_cluster = cdf0(lim_rate, 0);
  double mx_cluster = cdf0(lim_rate, xf);

  std::vector<std::pair<double, std::size_t>> g0, gx;
  g0.reserve(probe_depth);
  gx.reserve(probe_depth);
  double gx_min = mx_cluster;
  for (std::size_t j = 1; j <= probe_depth; ++j) {
    double zr = theta * seq.rate(j);
    g0.emplace_back(cdf0(zr, 0), j);
    double v = cdf0(zr, xf);
    gx.emplace_back(v, j);
    gx_min = std::min(gx_min, v);
  }

  // Chain detection on a prefix, reused to test stability on the full probe.
  auto chain_below = [&](std::size_t upto) {
    std::vector<std::pair<double, std::size_t>> tagged(g0.begin(),
                                                       g0.begin() + static_cast<std::ptrdiff_t>(upto));
    auto clusters = cluster_values(tagged);
    std::vector<ValueCluster> below;
    for (const auto& cl : clusters) {
      if (cl.value < m_cluster - kClusterTol) below.push_back(cl);
    }
    return below;
  };
  auto chain_above = [&](std::size_t upto) {
    std::vector<std::pair<double, std::size_t>> tagged(gx.begin(),
                                                       gx.begin() + static_cast<std::ptrdiff_t>(upto));
    auto clusters = cluster_values(tagged);
    std::vector<ValueCluster> above;
    for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
      if (it->value > mx_cluster + kClusterTol) above.push_back(*it);  // descending
    }
    return above;
  };

  auto below_full = chain_below(probe_depth);
  auto below_half = chain_below(probe_depth / 2);
  auto above_full = chain_above(probe_depth);
  auto above_half = chain_above(probe_depth / 2);

  ComonotonicDimConstants out;
  out.max_side_ok = below_full.size() == below_half.size() && below_full.size() <= 64;
  out.min_side_ok = above_full.size() == above_half.size() && above_full.size() <= 64;
  // A value repeated without bound off the cluster point also breaks the
  // removable-chain picture (the tail product vanishes there instead).
  for (const auto& cl : below_full) {
    if (cl.count > probe_depth / 4) out.max_side_ok = false;
  }
  for (const auto& cl : above_full) {
    if (cl.count > probe_depth / 4) out.min_side_ok = false;
  }
  out.assumption_ok = out.max_side_ok && out.min_side_ok;
  // Unstable chains are truncated so the diagnostics stay cheap.
  if (below_full.size() > 64) below_full.resize(64);
  if (above_full.size() > 64) above_full.resize(64);

  out.k_max = below_full.size() + 1;
  out.m1_tilde = gx_min;
  out.Mk_tilde = mx_cluster;

  // c: piecewise exact integral over [0, m^(1)], [m^(1), m^(2)], ...,
  // [m^(k-1), cluster]; piece i carries the first i rearranged coordinates.
  std::vector<double> rates;
  double c = below_full.empty() ? m_cluster : below_full.front().value;
  double lo = below_full.empty() ? 0.0 : below_full.front().value;
  for (std::size_t i = 0; i < below_full.size(); ++i) {
    rates.push_back(seq.rate(below_full[i].first_j));
    double hi = i + 1 < below_full.size() ? below_full[i + 1].value : m_cluster;
    c += ratio_piece_integral(rates, theta, xf, lo, hi, /*survival_form=*/false);
    lo = hi;
  }
  out.c = c;

  // c_tilde: sum over i of int_{M^(i+1)}^{M^(i)} (1 - prod_{j<=i} Gbar) du,
  // coordinates taken in descending order of G_{theta lambda_j}(x).
  rates.clear();
  double ct = 0.0;
  for (std::size_t i = 0; i < above_full.size(); ++i) {
    rates.push_back(seq.rate(above_full[i].first_j));
    double hi = above_full[i].value;
    double lo2 = i + 1 < above_full.size() ? above_full[i + 1].value : mx_cluster;
    ct += ratio_piece_integral(rates, theta, xf, lo2, hi, /*survival_form=*/true);
  }
  out.c_tilde = ct;
  return out;
}

RegularizedValue comonotonic_dim_target(const ComonotonicDimConstants& constants,
                                        const RateSequence& seq, double theta, std::size_t d,
                                        double x, Extreme kind) {
  std::int64_t xf = floor_x(x);
  if (kind == Extreme::kMin) {
    double v = constants.Mk_tilde + constants.c_tilde;
    return {v, std::log(v)};
  }
  double lv = std::log(constants.c);
  for (std::size_t j = 1; j <= d; ++j) lv += log_cdf0((1.0 - theta) * seq.rate(j), xf);
  return reg_from_log(lv);
}

RegularizedValue thinning_dim_target(const ThinningParams& p, double x, Extreme kind) {
  validate(p);
  if (kind == Extreme::kMin) return reg_one();
  double total = 0.0;
  for (double t : p.thetas) total += t;
  return reg_from_log(log_cdf0(total, floor_x(x)));
}

namespace {

ModelParams with_value(const ModelParams& base, const Regime& r, double v) {
  ModelParams out = base;
  if (auto* c = std::get_if<CommonShockParams>(&out)) {
    if (r.limit == LimitKind::kMarginalRateToInf) {
      c->thetas.at(r.index) = v;
    } else if (r.limit == LimitKind::kShockRateToInf) {
      c->theta0 = v;
    } else {
      bad_regime("sweep limit not parameterized for common shock");
    }
  } else if (auto* m = std::get_if<ComonotonicParams>(&out)) {
    if (r.limit == LimitKind::kMarginalRateToInf) {
      m->lambdas.at(r.index) = v;
    } else if (r.limit == LimitKind::kThetaToZero || r.limit == LimitKind::kThetaToOne) {
      m->theta = v;
    } else {
      bad_regime("sweep limit not parameterized for comonotonic");
    }
  } else {
    auto& t = std::get<ThinningParams>(out);
    if (r.limit == LimitKind::kProbToOne || r.limit == LimitKind::kProbToZero) {
      for (std::size_t k = 0; k < t.sources(); ++k) t.probs.at(r.index)[k] = v;
    } else {
      bad_regime("sweep limit not parameterized for thinning");
    }
  }
  return out;
}

SweepRow make_row(double param, const RegularizedValue& exact, const RegularizedValue& target) {
  SweepRow row;
  row.param = param;
  row.exact = exact.value;
  row.target = target.value;
  row.log_exact = exact.log_value;
  row.log_target = target.log_value;
  row.ratio = std::exp(exact.log_value - target.log_value);
  return row;
}

}  // namespace

std::vector<SweepRow> ratio_sweep(const ModelParams& base, const Regime& regime, double x,
                                  const std::vector<double>& values) {
  if (values.empty()) throw std::domain_error("ratio_sweep: sweep must be nonempty");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    ModelParams p = with_value(base, regime, v);
    validate(p);
    EvalResult exact = extreme_cdf(p, {regime.kind, x, 1e-12});
    RegularizedValue target = asymptotic_target(p, regime, x);
    rows.push_back(make_row(v, {exact.value, exact.log_value}, target));
  }
  return rows;
}

std::vector<SweepRow> dim_ratio_sweep_common(double theta0, const RateSequence& theta_seq, double x,
                                             Extreme kind, const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::domain_error("dim_ratio_sweep_common: sweep must be nonempty");
  std::vector<SweepRow> rows;
  for (std::size_t d : dims) {
    CommonShockParams p;
    p.theta0 = theta0;
    for (std::size_t j = 1; j <= d; ++j) p.thetas.push_back(theta_seq.rate(j));
    EvalResult exact = common_shock_extreme_cdf(p, {kind, x, 1e-12});
    RegularizedValue target = common_dim_target(p, x, kind);
    rows.push_back(make_row(static_cast<double>(d), {exact.value, exact.log_value}, target));
  }
  return rows;
}

std::vector<SweepRow> dim_ratio_sweep_comonotonic(const RateSequence& seq, double theta, double x,
                                                  Extreme kind, const std::vector<std::size_t>& dims,
                                                  std::size_t probe_depth) {
  if (dims.empty()) throw std::domain_error("dim_ratio_sweep_comonotonic: sweep must be nonempty");
  ComonotonicDimConstants constants = comonotonic_dim_constants(seq, theta, x, probe_depth);
  std::vector<SweepRow> rows;
  for (std::size_t d : dims) {
    ComonotonicParams p;
    p.theta = theta;
    for (std::size_t j = 1; j <= d; ++j) p.lambdas.push_back(seq.rate(j));
    EvalResult exact = comonotonic_extreme_cdf_integral(p, {kind, x, 1e-12});
    RegularizedValue target = comonotonic_dim_target(constants, seq, theta, d, x, kind);
    rows.push_back(make_row(static_cast<double>(d), {exact.value, exact.log_value}, target));
  }
  return rows;
}

std::vector<SweepRow> dim_ratio_sweep_thinning(const std::vector<double>& thetas,
                                               const std::vector<double>& probs_row, double x,
                                               Extreme kind, const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::domain_error("dim_ratio_sweep_thinning: sweep must be nonempty");
  std::vector<SweepRow> rows;
  for (std::size_t d : dims) {
    ThinningParams p;
    p.thetas = thetas;
    p.probs.assign(d, probs_row);
    EvalResult exact = p.sources() == 1 ? thinning_l1_extreme_cdf(p, {kind, x, 1e-12})
                                        : thinning_extreme_cdf(p, {kind, x, 1e-12});
    RegularizedValue target = thinning_dim_target(p, x, kind);
    rows.push_back(make_row(static_cast<double>(d), {exact.value, exact.log_value}, target));
  }
  return rows;
}

}  // namespace mvpois
