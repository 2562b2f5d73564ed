#pragma once

// Continuous UV mapping strategies: spherical plate carree, angular histogram
// equalization, and rank-based separable OT.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "otuvgs/gaussian.hpp"

namespace otuvgs {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegenerateEps = 1e-12;

enum class Strategy : std::uint8_t { Spherical = 0, HistogramEq = 1, RankOT = 2 };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Spherical: return "spherical";
    case Strategy::HistogramEq: return "he";
    case Strategy::RankOT: return "ot";
  }
  return "?";
}

struct AngularCoordinates {
  std::vector<double> theta;  // azimuth in [-pi, pi)
  std::vector<double> phi;    // polar angle in [0, pi]
  std::uint64_t degenerate_count = 0;

  std::size_t size() const { return theta.size(); }
};

struct ContinuousUV {
  std::vector<double> u;
  std::vector<double> v;
  Strategy strategy = Strategy::RankOT;
};

struct MappingConfig {
  Strategy strategy = Strategy::RankOT;
  std::uint32_t he_bins = 256;
  OriginPolicy origin = OriginPolicy::Centroid;
};

inline DVec3 resolve_center(const GaussianSet& set, OriginPolicy policy) {
  if (policy == OriginPolicy::RawOrigin) return {0.0, 0.0, 0.0};
  if (set.count() == 0) throw EmptyInput("centroid of empty set");
  DVec3 c{0.0, 0.0, 0.0};
  for (const Gaussian& g : set.gaussians)
    for (int k = 0; k < 3; ++k) c[k] += g.position[k];
  for (int k = 0; k < 3; ++k) c[k] /= static_cast<double>(set.count());
  return c;
}

inline DVec3 to_direction(const DVec3& position, const DVec3& center) {
  DVec3 d{position[0] - center[0], position[1] - center[1], position[2] - center[2]};
  const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (norm <= kDegenerateEps)
    throw DegenerateDirection("position coincides with the projection center");
  return {d[0] / norm, d[1] / norm, d[2] / norm};
}

// theta = atan2(y, x) folded into [-pi, pi); phi = arccos(clamped z).
inline std::pair<double, double> to_angles(const DVec3& dir) {
  double theta = std::atan2(dir[1], dir[0]);
  if (theta >= kPi) theta = -kPi;
  const double phi = std::acos(std::clamp(dir[2], -1.0, 1.0));
  return {theta, phi};
}

// Degenerate positions (at the center) keep their slot with theta = phi = 0
// and bump the warning counter; dropping them would shift every rank.
inline AngularCoordinates angles_of(const GaussianSet& set, const DVec3& center) {
  AngularCoordinates out;
  out.theta.reserve(set.count());
  out.phi.reserve(set.count());
  for (const Gaussian& g : set.gaussians) {
    const DVec3& p = g.position;
    DVec3 d{p[0] - center[0], p[1] - center[1], p[2] - center[2]};
    const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (norm <= kDegenerateEps) {
      out.theta.push_back(0.0);
      out.phi.push_back(0.0);
      ++out.degenerate_count;
      continue;
    }
    auto [theta, phi] = to_angles({d[0] / norm, d[1] / norm, d[2] / norm});
    out.theta.push_back(theta);
    out.phi.push_back(phi);
  }
  return out;
}

inline ContinuousUV spherical_uv(const AngularCoordinates& angles) {
  ContinuousUV out;
  out.strategy = Strategy::Spherical;
  out.u.reserve(angles.size());
  out.v.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    out.u.push_back((angles.theta[i] + kPi) / (2.0 * kPi));
    out.v.push_back(angles.phi[i] / kPi);
  }
  return out;
}

// output_i = rank(values_i)/N with 1-based ascending ranks; ties broken by
// position, so the output is always a permutation of {1/N, ..., N/N}.
inline std::vector<double> rank_normalize(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw EmptyInput("rank_normalize on empty input");
  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r)
    out[order[r]] = static_cast<double>(r + 1) / static_cast<double>(n);
  return out;
}

inline ContinuousUV rank_ot_uv(const AngularCoordinates& angles) {
  ContinuousUV out;
  out.strategy = Strategy::RankOT;
  out.u = rank_normalize(angles.theta);
  out.v = rank_normalize(angles.phi);
  return out;
}

namespace he_detail {

// Step-CDF equalization over B equal-width bins on a fixed domain; every
// value in a bin maps to the normalized cumulative count at that bin.
inline std::vector<double> equalize(const std::vector<double>& values, double lo, double hi,
                                    std::uint32_t bins) {
  const std::size_t n = values.size();
  std::vector<std::uint64_t> hist(bins, 0);
  auto bin_of = [&](double v) {
    const double t = (v - lo) / (hi - lo);
    auto b = static_cast<std::int64_t>(std::floor(t * bins));
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(b, 0, bins - 1));
  };
  for (double v : values) ++hist[bin_of(v)];
  std::vector<double> cdf(bins);
  std::uint64_t cum = 0;
  for (std::uint32_t b = 0; b < bins; ++b) {
    cum += hist[b];
    cdf[b] = static_cast<double>(cum) / static_cast<double>(n);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cdf[bin_of(values[i])];
  return out;
}

}  // namespace he_detail

inline ContinuousUV he_uv(const AngularCoordinates& angles, std::uint32_t bins) {
  if (angles.size() == 0) throw EmptyInput("he_uv on empty input");
  if (bins < 2) throw InvalidBins("he_bins must be >= 2");
  ContinuousUV out;
  out.strategy = Strategy::HistogramEq;
  out.u = he_detail::equalize(angles.theta, -kPi, kPi, bins);
  out.v = he_detail::equalize(angles.phi, 0.0, kPi, bins);
  return out;
}

inline ContinuousUV map_uv(const AngularCoordinates& angles, const MappingConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::Spherical: return spherical_uv(angles);
    case Strategy::HistogramEq: return he_uv(angles, cfg.he_bins);
    case Strategy::RankOT: return rank_ot_uv(angles);
  }
  throw Error("unknown strategy");
}

inline ContinuousUV map_uv(const GaussianSet& set, const MappingConfig& cfg) {
  if (set.count() == 0) {
    ContinuousUV empty;
    empty.strategy = cfg.strategy;
    return empty;
  }
  return map_uv(angles_of(set, resolve_center(set, cfg.origin)), cfg);
}

}  // namespace otuvgs
