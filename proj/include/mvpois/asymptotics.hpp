#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mvpois/extrema.hpp"
#include "mvpois/models.hpp"
#include "mvpois/specfun.hpp"

namespace mvpois {

enum class ModelKind { kCommon, kComonotonic, kThinning };

enum class LimitKind {
  kMarginalRateToInf,  // common theta_i / comonotonic lambda_i
  kShockRateToInf,     // common theta_0
  kThetaToZero,        // comonotonic
  kThetaToOne,         // comonotonic
  kProbToOne,          // thinning p_i^k, k = 1..l
  kProbToZero,         // thinning
  kDimToInf,
};

struct Regime {
  ModelKind model;
  LimitKind limit;
  Extreme kind = Extreme::kMax;
  std::size_t index = 0;  // coordinate i for the *_i limits
};

/// Right-hand side of the matching section-4 proposition, evaluated at the
/// given finite parameters. Throws on a regime/model mismatch.
RegularizedValue asymptotic_target(const CommonShockParams& p, const Regime& r, double x);
RegularizedValue asymptotic_target(const ComonotonicParams& p, const Regime& r, double x);
RegularizedValue asymptotic_target(const ThinningParams& p, const Regime& r, double x);
RegularizedValue asymptotic_target(const ModelParams& p, const Regime& r, double x);

/// d -> infinity target for the common shock model evaluated on a finite
/// prefix: Max -> e^{-theta0} prod_j G_{theta_j}(x); Min -> G_{theta0}(x).
RegularizedValue common_dim_target(const CommonShockParams& p, double x, Extreme kind);

/// Rate sequence lambda_j, j >= 1, with an analytic limit. Grammar accepted
/// by parse(): "a", "a+b/j", "a-b/j", "a*j^p"; explicit lists use the
/// explicit_list factory (tail repeats the last entry when repeat_last).
class RateSequence {
 public:
  static RateSequence parse(const std::string& expr);
  static RateSequence constant(double a);
  static RateSequence affine_inv_j(double a, double b);  // a + b/j
  static RateSequence power_j(double a, double p);       // a * j^p
  static RateSequence explicit_list(std::vector<double> values, bool repeat_last);

  double rate(std::size_t j) const;  // 1-based index
  double limit() const;              // lim_{j->inf} lambda_j (may be +inf or 0)
  std::string describe() const;

 private:
  enum class Kind { kConstant, kAffineInvJ, kPowerJ, kExplicit } kind_ = Kind::kConstant;
  double a_ = 1.0, b_ = 0.0;
  std::vector<double> values_;
  bool repeat_last_ = false;
};

/// Constants of the comonotonic d -> infinity proposition, probed
/// empirically over the first probe_depth indices. `assumption_ok` goes
/// false when either removable chain fails to stabilize within the probe
/// (values accumulating at the cluster point, or unbounded chains);
/// the per-side flags tell which proposition half is affected.
struct ComonotonicDimConstants {
  std::size_t k_max = 1;     // detected chain length for the Max-side sets
  double c = 0.0;            // Max target multiplier of F_{M^Y}(x)
  double c_tilde = 0.0;      // Min target additive constant
  double m1_tilde = 0.0;     // inf of the G_{theta lambda_j}(x) values
  double Mk_tilde = 0.0;     // cluster point after removing the top chain
  bool assumption_ok = true;  // both sides stable
  bool max_side_ok = true;    // removable-infimum chain of G^(k) stable
  bool min_side_ok = true;    // removable-supremum chain of the x-level sets
};

ComonotonicDimConstants comonotonic_dim_constants(const RateSequence& seq, double theta, double x,
                                                  std::size_t probe_depth = 10000);

/// Comonotonic d -> infinity target at finite d: Max -> c * prod_{j<=d}
/// G_{(1-theta) lambda_j}(x); Min -> Mk_tilde + c_tilde.
RegularizedValue comonotonic_dim_target(const ComonotonicDimConstants& constants,
                                        const RateSequence& seq, double theta, std::size_t d,
                                        double x, Extreme kind);

/// Thinning d -> infinity target: Max -> Poisson(sum theta_k) CDF, Min -> 1.
RegularizedValue thinning_dim_target(const ThinningParams& p, double x, Extreme kind);

struct SweepRow {
  double param = 0.0;  // swept parameter value (or dimension)
  double exact = 0.0;
  double target = 0.0;
  double ratio = 0.0;  // exp(log_exact - log_target), underflow safe
  double log_exact = 0.0;
  double log_target = 0.0;
};

/// Parameter sweep: substitutes each value into the regime's parameter and
/// evaluates exact CDF, target, and their log-space ratio.
std::vector<SweepRow> ratio_sweep(const ModelParams& base, const Regime& regime, double x,
                                  const std::vector<double>& values);

/// Dimension sweeps driving the d -> infinity rows.
std::vector<SweepRow> dim_ratio_sweep_common(double theta0, const RateSequence& theta_seq, double x,
                                             Extreme kind, const std::vector<std::size_t>& dims);
std::vector<SweepRow> dim_ratio_sweep_comonotonic(const RateSequence& seq, double theta, double x,
                                                  Extreme kind, const std::vector<std::size_t>& dims,
                                                  std::size_t probe_depth = 10000);
std::vector<SweepRow> dim_ratio_sweep_thinning(const std::vector<double>& thetas,
                                               const std::vector<double>& probs_row, double x,
                                               Extreme kind, const std::vector<std::size_t>& dims);

}  // namespace mvpois
