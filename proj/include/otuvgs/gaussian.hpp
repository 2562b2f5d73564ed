#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "otuvgs/errors.hpp"

namespace otuvgs {

using Vec3 = std::array<float, 3>;
using Vec4 = std::array<float, 4>;
using DVec3 = std::array<double, 3>;

enum class OriginPolicy { RawOrigin, Centroid };

// One splat. Scale is stored log-scale, opacity as the raw pre-activation
// logit, rotation as unnormalized quaternion components, all exactly as they
// appear in 3DGS PLY exports. Positions are held in double so centering and
// rescaling stay exact; every ingested value is float32-representable.
struct Gaussian {
  DVec3 position{};
  Vec3 scale{};
  Vec4 rotation{1.f, 0.f, 0.f, 0.f};
  float opacity = 0.f;
  std::vector<float> appearance;  // SH coefficients, DC first
  std::uint64_t source_index = 0;

  bool operator==(const Gaussian&) const = default;
};

struct GaussianSet {
  std::vector<Gaussian> gaussians;
  std::uint32_t appearance_width = 0;
  OriginPolicy origin_policy = OriginPolicy::Centroid;
  // Non-finite payload values (scale/rotation/appearance) zeroed at ingestion.
  std::uint64_t repaired_values = 0;

  std::uint64_t count() const { return gaussians.size(); }
};

template <class V>
bool finite3(const V& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace otuvgs
