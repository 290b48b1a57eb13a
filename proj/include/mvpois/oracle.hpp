#pragma once

#include <cstdint>

#include "mvpois/extrema.hpp"
#include "mvpois/models.hpp"

namespace mvpois {

struct McEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::uint32_t streams = 1;
};

/// Monte Carlo estimate of P(extreme <= x) from n draws split across
/// counter-based substreams; identical (seed, streams) replays bit-identically
/// regardless of thread scheduling.
McEstimate mc_extreme_cdf(const ModelParams& p, const ExtremeQuery& q, std::int64_t n,
                          std::uint64_t seed, std::uint32_t streams = 16);

/// Exact joint-PMF enumeration over the lattice truncated at tail mass
/// lattice_eps per coordinate. Supports common shock (enumerates y0, y1..yd)
/// and thinning (enumerates y1..yl with exact conditional CDFs). Throws when
/// the truncated lattice would exceed 1e8 points.
double brute_force_extreme_cdf(const CommonShockParams& p, const ExtremeQuery& q,
                               double lattice_eps = 1e-14);
double brute_force_extreme_cdf(const ThinningParams& p, const ExtremeQuery& q,
                               double lattice_eps = 1e-14);

}  // namespace mvpois
