#pragma once

// Capacity-utilization metrics over a packed UV tensor: non-empty slot
// ratio, collision rate, Gaussian retention, plus marginal arrival spread.

#include <cmath>
#include <cstdint>
#include <vector>

#include "otuvgs/packing.hpp"

namespace otuvgs {

struct UtilizationReport {
  Strategy mapping = Strategy::RankOT;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t capacity = 0;
  std::uint64_t n_input = 0;
  double non_empty_ratio = 0.0;   // slots with >= 1 arrival / all slots
  double collision_rate = 0.0;    // slots with >= 2 arrivals / non-empty slots
  double retention = 1.0;         // sum min(raw, K) / N, 1 when N = 0
  std::uint32_t max_slot_arrivals = 0;
  double row_count_stddev = 0.0;  // over raw arrival marginals
  double col_count_stddev = 0.0;
};

namespace metrics_detail {

inline double stddev(const std::vector<std::uint64_t>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (auto x : xs) mean += static_cast<double>(x);
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (auto x : xs) {
    const double d = static_cast<double>(x) - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace metrics_detail

// Retention is evaluated at the given capacity k, which lets a tensor packed
// at a large K serve every smaller K of a sweep (slots store descending
// opacity, so K-prefix truncation equals re-packing).
inline UtilizationReport utilization_at(const UVTensor& t, std::uint32_t k) {
  UtilizationReport r;
  r.mapping = t.strategy;
  r.height = t.config.height;
  r.width = t.config.width;
  r.capacity = k;
  r.n_input = t.n_input;

  const std::uint64_t slots = t.config.slot_count();
  std::uint64_t non_empty = 0, colliding = 0, retained = 0;
  std::vector<std::uint64_t> row_sum(t.config.height, 0), col_sum(t.config.width, 0);
  for (std::uint64_t s = 0; s < slots; ++s) {
    const std::uint32_t raw = t.raw_counts[s];
    if (raw >= 1) ++non_empty;
    if (raw >= 2) ++colliding;
    retained += std::min<std::uint32_t>(raw, k);
    if (raw > r.max_slot_arrivals) r.max_slot_arrivals = raw;
    row_sum[s / t.config.width] += raw;
    col_sum[s % t.config.width] += raw;
  }
  r.non_empty_ratio = static_cast<double>(non_empty) / static_cast<double>(slots);
  r.collision_rate =
      non_empty == 0 ? 0.0 : static_cast<double>(colliding) / static_cast<double>(non_empty);
  r.retention =
      t.n_input == 0 ? 1.0 : static_cast<double>(retained) / static_cast<double>(t.n_input);
  r.row_count_stddev = metrics_detail::stddev(row_sum);
  r.col_count_stddev = metrics_detail::stddev(col_sum);
  return r;
}

inline UtilizationReport utilization(const UVTensor& t) {
  return utilization_at(t, t.config.capacity);
}

// One mapping-and-packing pass at max(k_values), then K-prefix reports.
// non_empty_ratio and collision_rate are K-independent by definition.
inline std::vector<UtilizationReport> k_sweep(const GaussianSet& set, const ContinuousUV& uv,
                                              GridConfig config,
                                              const std::vector<std::uint32_t>& k_values) {
  std::uint32_t k_max = 1;
  for (auto k : k_values) k_max = std::max(k_max, k);
  config.capacity = k_max;
  const UVTensor t = pack(set, discretize(uv, config), config, uv.strategy);
  std::vector<UtilizationReport> reports;
  reports.reserve(k_values.size());
  for (auto k : k_values) reports.push_back(utilization_at(t, k));
  return reports;
}

inline std::vector<UtilizationReport> compare(const GaussianSet& set, const GridConfig& grid,
                                              const std::vector<Strategy>& strategies,
                                              std::uint32_t he_bins = 256,
                                              OriginPolicy origin = OriginPolicy::Centroid) {
  if (strategies.empty()) throw EmptyInput("compare with no strategies");
  std::vector<UtilizationReport> reports;
  reports.reserve(strategies.size());
  for (Strategy s : strategies) {
    MappingConfig cfg{s, he_bins, origin};
    const ContinuousUV uv = map_uv(set, cfg);
    reports.push_back(utilization(pack(set, discretize(uv, grid), grid, s)));
  }
  return reports;
}

}  // namespace otuvgs
