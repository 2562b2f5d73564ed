#pragma once

// Discretization of continuous UV to integer slots, per-slot top-K retention
// by opacity, and assembly of the H x W x K x C tensor.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "otuvgs/mapping.hpp"

namespace otuvgs {

inline constexpr std::uint64_t kEmptySlotId = std::numeric_limits<std::uint64_t>::max();

enum class Channel : std::uint8_t { Position, Scale, Rotation, Opacity, AppearanceDc };

inline std::uint32_t channel_width(Channel c) {
  switch (c) {
    case Channel::Position: return 3;
    case Channel::Scale: return 3;
    case Channel::Rotation: return 4;
    case Channel::Opacity: return 1;
    case Channel::AppearanceDc: return 3;
  }
  return 0;
}

inline std::vector<Channel> default_channel_layout() {
  return {Channel::Position, Channel::Scale, Channel::Rotation, Channel::Opacity,
          Channel::AppearanceDc};
}

struct GridConfig {
  std::uint32_t height = 512;
  std::uint32_t width = 512;
  std::uint32_t capacity = 1;
  std::vector<Channel> channel_layout = default_channel_layout();

  std::uint32_t channels() const {
    std::uint32_t c = 0;
    for (Channel ch : channel_layout) c += channel_width(ch);
    return c;
  }
  std::uint64_t slot_count() const {
    return static_cast<std::uint64_t>(height) * width;
  }
};

struct UVAssignment {
  std::vector<std::uint32_t> row;  // v index
  std::vector<std::uint32_t> col;  // u index
};

struct UVTensor {
  GridConfig config;
  Strategy strategy = Strategy::RankOT;
  std::uint64_t n_input = 0;
  std::vector<std::uint32_t> counts;      // H*W, retained occupancy, <= K
  std::vector<std::uint32_t> raw_counts;  // H*W, pre-truncation arrivals
  std::vector<float> data;                // H*W*K*C, row-major, zero-filled
  std::vector<std::uint64_t> retained_ids;  // H*W*K, kEmptySlotId where empty
};

// u_tilde = min(W-1, floor(u*W)); the min cap absorbs u = 1.
inline UVAssignment discretize(const ContinuousUV& uv, const GridConfig& config) {
  UVAssignment a;
  const std::size_t n = uv.u.size();
  a.row.resize(n);
  a.col.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.col[i] = std::min<std::uint32_t>(config.width - 1,
                                       static_cast<std::uint32_t>(uv.u[i] * config.width));
    a.row[i] = std::min<std::uint32_t>(config.height - 1,
                                       static_cast<std::uint32_t>(uv.v[i] * config.height));
  }
  return a;
}

struct Arrival {
  std::uint64_t source_index;
  float opacity;
  std::uint64_t position_in_set = 0;  // index into GaussianSet::gaussians
};

inline bool retains_before(const Arrival& a, const Arrival& b) {
  if (a.opacity != b.opacity) return a.opacity > b.opacity;
  return a.source_index < b.source_index;
}

// Keep the min(|arrivals|, K) entries of largest opacity, ties broken by
// ascending source index; result ordered by descending opacity.
inline std::vector<Arrival> top_k_retain(std::vector<Arrival> arrivals, std::uint32_t k) {
  if (arrivals.size() > k) {
    std::nth_element(arrivals.begin(), arrivals.begin() + k, arrivals.end(), retains_before);
    arrivals.resize(k);
  }
  std::sort(arrivals.begin(), arrivals.end(), retains_before);
  return arrivals;
}

namespace pack_detail {

inline void emit(const Gaussian& g, const std::vector<Channel>& layout, float* dst) {
  for (Channel ch : layout) {
    switch (ch) {
      case Channel::Position:
        for (int k = 0; k < 3; ++k) *dst++ = static_cast<float>(g.position[k]);
        break;
      case Channel::Scale:
        for (int k = 0; k < 3; ++k) *dst++ = g.scale[k];
        break;
      case Channel::Rotation:
        for (int k = 0; k < 4; ++k) *dst++ = g.rotation[k];
        break;
      case Channel::Opacity:
        *dst++ = g.opacity;
        break;
      case Channel::AppearanceDc:
        for (int k = 0; k < 3; ++k) *dst++ = g.appearance[k];
        break;
    }
  }
}

}  // namespace pack_detail

inline UVTensor pack(const GaussianSet& set, const UVAssignment& assignment,
                     const GridConfig& config, Strategy strategy) {
  for (Channel ch : config.channel_layout)
    if (ch == Channel::AppearanceDc && set.appearance_width < 3)
      throw ChannelMissing("layout requests appearance DC but appearance_width is " +
                           std::to_string(set.appearance_width));

  const std::uint64_t slots = config.slot_count();
  const std::uint32_t k = config.capacity;
  const std::uint32_t c = config.channels();
  const std::uint64_t n = set.count();

  UVTensor t;
  t.config = config;
  t.strategy = strategy;
  t.n_input = n;
  t.raw_counts.assign(slots, 0);
  t.counts.assign(slots, 0);
  t.data.assign(slots * k * c, 0.f);
  t.retained_ids.assign(slots * k, kEmptySlotId);

  std::vector<std::uint64_t> slot_of(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    slot_of[i] = static_cast<std::uint64_t>(assignment.row[i]) * config.width + assignment.col[i];
    ++t.raw_counts[slot_of[i]];
  }

  // Bucket arrivals by slot with a counting-sort pass, then select per slot.
  std::vector<std::uint64_t> offset(slots + 1, 0);
  for (std::uint64_t s = 0; s < slots; ++s) offset[s + 1] = offset[s] + t.raw_counts[s];
  std::vector<Arrival> arrivals(n);
  {
    std::vector<std::uint64_t> cursor(offset.begin(), offset.end() - 1);
    for (std::uint64_t i = 0; i < n; ++i)
      arrivals[cursor[slot_of[i]]++] = {set.gaussians[i].source_index, set.gaussians[i].opacity, i};
  }

  for (std::uint64_t s = 0; s < slots; ++s) {
    const std::uint64_t lo = offset[s], hi = offset[s + 1];
    if (lo == hi) continue;
    auto begin = arrivals.begin() + static_cast<std::ptrdiff_t>(lo);
    auto end = arrivals.begin() + static_cast<std::ptrdiff_t>(hi);
    if (hi - lo > k) {
      std::nth_element(begin, begin + k, end, retains_before);
      end = begin + k;
    }
    std::sort(begin, end, retains_before);
    const auto kept = static_cast<std::uint32_t>(end - begin);
    t.counts[s] = kept;
    for (std::uint32_t j = 0; j < kept; ++j) {
      const Arrival& a = *(begin + j);
      t.retained_ids[s * k + j] = a.source_index;
      pack_detail::emit(set.gaussians[a.position_in_set], config.channel_layout,
                        t.data.data() + (s * k + j) * c);
    }
  }
  return t;
}

}  // namespace otuvgs
