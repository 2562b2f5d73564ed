#pragma once

// Deterministic synthetic Gaussian sets for stressing the mapping strategies.
//
// All draws come from a seeded mt19937_64 through hand-rolled uniform and
// Box-Muller transforms, so a (kind, parameters, seed) triple produces the
// same set on every platform this library builds on. The stream order is
// one Gaussian at a time: direction draws first, then the opacity draw.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "otuvgs/gaussian.hpp"
#include "otuvgs/mapping.hpp"

namespace otuvgs {

enum class SynthKind { UniformSphere, VmfClusters, AnisotropicShell };
enum class OpacityKind { Constant, UniformRange };

struct SynthSpec {
  SynthKind kind = SynthKind::UniformSphere;
  std::uint64_t n = 1;
  std::uint64_t seed = 0;
  std::uint32_t clusters = 8;       // VmfClusters
  double kappa = 50.0;              // VmfClusters concentration
  std::array<double, 3> axis_scales{1.0, 1.0, 1.0};  // AnisotropicShell
  OpacityKind opacity = OpacityKind::UniformRange;
  double opacity_lo = 0.0;
  double opacity_hi = 1.0;
};

namespace synth_detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one normal per call, pairs cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  std::uint64_t index(std::uint64_t bound) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Positions are kept float32-representable so PLY round-trips are exact.
// The volatile store stops GCC's vectorizer from illegally eliding the
// double->float->double rounding at -O3.
inline double snap_to_float(double v) {
  volatile float f = static_cast<float>(v);
  return f;
}

inline DVec3 uniform_direction(Rng& rng) {
  while (true) {
    const DVec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 1e-12) return {v[0] / norm, v[1] / norm, v[2] / norm};
  }
}

// vMF on S^2 via inversion of the cosine of the angle to the mean:
// w = 1 + log(u + (1-u) e^{-2k}) / k, exact and rejection-free.
inline DVec3 vmf_direction(Rng& rng, const DVec3& mean, double kappa) {
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  const double w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  const double angle = rng.uniform(0.0, 2.0 * kPi);

  // tangent frame around the mean
  DVec3 t1;
  if (std::abs(mean[0]) < 0.9)
    t1 = {0.0, -mean[2], mean[1]};
  else
    t1 = {-mean[2], 0.0, mean[0]};
  const double n1 = std::sqrt(t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]);
  for (double& c : t1) c /= n1;
  const DVec3 t2{mean[1] * t1[2] - mean[2] * t1[1], mean[2] * t1[0] - mean[0] * t1[2],
                 mean[0] * t1[1] - mean[1] * t1[0]};

  const double a = s * std::cos(angle), b = s * std::sin(angle);
  return {a * t1[0] + b * t2[0] + w * mean[0], a * t1[1] + b * t2[1] + w * mean[1],
          a * t1[2] + b * t2[2] + w * mean[2]};
}

}  // namespace synth_detail

inline GaussianSet generate(const SynthSpec& spec) {
  if (spec.n < 1) throw InvalidSpec("n must be >= 1");
  if (spec.kind == SynthKind::VmfClusters) {
    if (spec.kappa <= 0.0) throw InvalidSpec("kappa must be > 0");
    if (spec.clusters < 1) throw InvalidSpec("clusters must be >= 1");
  }
  if (spec.kind == SynthKind::AnisotropicShell)
    for (double s : spec.axis_scales)
      if (s <= 0.0) throw InvalidSpec("axis scales must be > 0");
  if (spec.opacity == OpacityKind::UniformRange && spec.opacity_hi < spec.opacity_lo)
    throw InvalidSpec("opacity range is inverted");

  synth_detail::Rng rng(spec.seed);

  std::vector<DVec3> means;
  if (spec.kind == SynthKind::VmfClusters) {
    means.reserve(spec.clusters);
    for (std::uint32_t c = 0; c < spec.clusters; ++c)
      means.push_back(synth_detail::uniform_direction(rng));
  }

  GaussianSet set;
  set.appearance_width = 3;
  set.gaussians.resize(spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    DVec3 d;
    switch (spec.kind) {
      case SynthKind::UniformSphere:
        d = synth_detail::uniform_direction(rng);
        break;
      case SynthKind::VmfClusters:
        d = synth_detail::vmf_direction(rng, means[rng.index(means.size())], spec.kappa);
        break;
      case SynthKind::AnisotropicShell:
        d = synth_detail::uniform_direction(rng);
        for (int k = 0; k < 3; ++k) d[k] *= spec.axis_scales[k];
        break;
    }
    Gaussian& g = set.gaussians[i];
    g.position = {synth_detail::snap_to_float(d[0]), synth_detail::snap_to_float(d[1]),
                  synth_detail::snap_to_float(d[2])};
    g.opacity = spec.opacity == OpacityKind::Constant
                    ? static_cast<float>(spec.opacity_lo)
                    : static_cast<float>(rng.uniform(spec.opacity_lo, spec.opacity_hi));
    g.scale = {0.f, 0.f, 0.f};
    g.rotation = {1.f, 0.f, 0.f, 0.f};
    g.appearance.assign(3, 0.f);
    g.source_index = i;
  }
  return set;
}

// key=value per line; '#' starts a comment. Keys: kind, n, seed, clusters,
// kappa, axis_scales (comma-separated), opacity (constant|uniform),
// opacity_lo, opacity_hi.
inline SynthSpec parse_spec_text(std::istream& in) {
  SynthSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    try {
      if (key == "kind") {
        if (val == "uniform_sphere") spec.kind = SynthKind::UniformSphere;
        else if (val == "vmf_clusters") spec.kind = SynthKind::VmfClusters;
        else if (val == "anisotropic_shell") spec.kind = SynthKind::AnisotropicShell;
        else throw InvalidSpec("unknown kind '" + val + "'");
      } else if (key == "n") spec.n = std::stoull(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else if (key == "clusters") spec.clusters = static_cast<std::uint32_t>(std::stoul(val));
      else if (key == "kappa") spec.kappa = std::stod(val);
      else if (key == "axis_scales") {
        std::istringstream vs(val);
        std::string tok;
        for (int k = 0; k < 3 && std::getline(vs, tok, ','); ++k)
          spec.axis_scales[k] = std::stod(tok);
      } else if (key == "opacity") {
        if (val == "constant") spec.opacity = OpacityKind::Constant;
        else if (val == "uniform") spec.opacity = OpacityKind::UniformRange;
        else throw InvalidSpec("unknown opacity kind '" + val + "'");
      } else if (key == "opacity_lo") spec.opacity_lo = std::stod(val);
      else if (key == "opacity_hi") spec.opacity_hi = std::stod(val);
      else throw InvalidSpec("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw InvalidSpec("bad value for '" + key + "': " + val);
    } catch (const std::out_of_range&) {
      throw InvalidSpec("value out of range for '" + key + "': " + val);
    }
  }
  return spec;
}

inline SynthSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  return parse_spec_text(in);
}

}  // namespace otuvgs
