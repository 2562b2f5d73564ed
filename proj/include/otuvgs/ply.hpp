#pragma once

// Binary little-endian PLY reader/writer for 3DGS splat files.
//
// Accepted header grammar (one statement per '\n'-terminated line):
//   ply
//   format binary_little_endian 1.0
//   comment <anything>            (zero or more, anywhere after format)
//   element vertex <N>            (exactly one element)
//   property float <name>         (float32 only; one per stored property)
//   end_header
//
// Required properties: x y z opacity scale_0 scale_1 scale_2 rot_0..rot_3.
// nx ny nz are accepted and ignored. f_dc_0..2 and f_rest_* feed the
// appearance vector as [f_dc..., f_rest... in declared order]; any other
// float property is preserved as a trailing appearance channel.

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "otuvgs/gaussian.hpp"

namespace otuvgs {

namespace ply_detail {

struct Layout {
  std::uint64_t vertex_count = 0;
  std::vector<std::string> properties;  // declared order
};

inline Layout parse_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw MalformedHeader("missing 'ply' magic line");
  if (!std::getline(in, line) || line != "format binary_little_endian 1.0")
    throw MalformedHeader("unsupported format, expected binary_little_endian 1.0");

  Layout layout;
  bool have_vertex = false;
  bool done = false;
  while (std::getline(in, line)) {
    if (line == "end_header") { done = true; break; }
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") continue;
    if (word == "element") {
      std::string name;
      std::uint64_t n = 0;
      if (!(ls >> name >> n) || name != "vertex" || have_vertex)
        throw MalformedHeader("expected a single 'element vertex <count>'");
      layout.vertex_count = n;
      have_vertex = true;
      continue;
    }
    if (word == "property") {
      std::string type, name;
      if (!(ls >> type >> name))
        throw MalformedHeader("malformed property line");
      if (type != "float" && type != "float32")
        throw MalformedHeader("property '" + name + "' is not float32");
      if (!have_vertex)
        throw MalformedHeader("property before element vertex");
      layout.properties.push_back(name);
      continue;
    }
    throw MalformedHeader("unrecognized header line: " + line);
  }
  if (!done) throw MalformedHeader("missing end_header");
  if (!have_vertex) throw MalformedHeader("missing element vertex");
  return layout;
}

inline int find(const std::vector<std::string>& props, const std::string& name) {
  for (std::size_t i = 0; i < props.size(); ++i)
    if (props[i] == name) return static_cast<int>(i);
  return -1;
}

inline float sanitize(float v, std::uint64_t& repaired) {
  if (std::isfinite(v)) return v;
  ++repaired;
  return 0.f;
}

}  // namespace ply_detail

inline GaussianSet load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);

  auto layout = ply_detail::parse_header(in);
  const auto& props = layout.properties;

  const int ix = ply_detail::find(props, "x");
  const int iy = ply_detail::find(props, "y");
  const int iz = ply_detail::find(props, "z");
  const int iop = ply_detail::find(props, "opacity");
  int iscale[3], irot[4];
  for (int k = 0; k < 3; ++k)
    iscale[k] = ply_detail::find(props, "scale_" + std::to_string(k));
  for (int k = 0; k < 4; ++k)
    irot[k] = ply_detail::find(props, "rot_" + std::to_string(k));

  auto require = [&](int idx, const char* what) {
    if (idx < 0) throw MalformedHeader(std::string("missing required property ") + what);
  };
  require(ix, "x"); require(iy, "y"); require(iz, "z"); require(iop, "opacity");
  for (int k = 0; k < 3; ++k) require(iscale[k], "scale_*");
  for (int k = 0; k < 4; ++k) require(irot[k], "rot_*");

  // Appearance channel order: f_dc_0..2, then f_rest_* in declared order,
  // then any unknown float property in declared order.
  std::vector<int> iapp;
  for (int k = 0; k < 3; ++k) {
    int i = ply_detail::find(props, "f_dc_" + std::to_string(k));
    if (i >= 0) iapp.push_back(i);
  }
  auto is_known = [&](std::size_t i) {
    const std::string& n = props[i];
    if (static_cast<int>(i) == ix || static_cast<int>(i) == iy ||
        static_cast<int>(i) == iz || static_cast<int>(i) == iop)
      return true;
    for (int k = 0; k < 3; ++k) if (static_cast<int>(i) == iscale[k]) return true;
    for (int k = 0; k < 4; ++k) if (static_cast<int>(i) == irot[k]) return true;
    return n == "nx" || n == "ny" || n == "nz" || n.rfind("f_dc_", 0) == 0;
  };
  for (std::size_t i = 0; i < props.size(); ++i)
    if (props[i].rfind("f_rest_", 0) == 0) iapp.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < props.size(); ++i)
    if (!is_known(i) && props[i].rfind("f_rest_", 0) != 0)
      iapp.push_back(static_cast<int>(i));

  const std::size_t stride = props.size();
  std::vector<float> body(layout.vertex_count * stride);
  in.read(reinterpret_cast<char*>(body.data()),
          static_cast<std::streamsize>(body.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != body.size() * sizeof(float))
    throw TruncatedBody("body holds " + std::to_string(in.gcount()) + " bytes, header promises " +
                        std::to_string(body.size() * sizeof(float)));

  GaussianSet set;
  set.appearance_width = static_cast<std::uint32_t>(iapp.size());
  set.gaussians.resize(layout.vertex_count);
  for (std::uint64_t r = 0; r < layout.vertex_count; ++r) {
    const float* rec = body.data() + r * stride;
    Gaussian& g = set.gaussians[r];
    g.position = {rec[ix], rec[iy], rec[iz]};
    g.opacity = rec[iop];
    if (!finite3(g.position) || !std::isfinite(g.opacity))
      throw NonFiniteRecord("non-finite position/opacity at record " + std::to_string(r));
    for (int k = 0; k < 3; ++k)
      g.scale[k] = ply_detail::sanitize(rec[iscale[k]], set.repaired_values);
    for (int k = 0; k < 4; ++k)
      g.rotation[k] = ply_detail::sanitize(rec[irot[k]], set.repaired_values);
    g.appearance.resize(iapp.size());
    for (std::size_t k = 0; k < iapp.size(); ++k)
      g.appearance[k] = ply_detail::sanitize(rec[iapp[k]], set.repaired_values);
    g.source_index = r;
  }
  return set;
}

inline void write_ply(const GaussianSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");

  const std::uint32_t aw = set.appearance_width;
  const std::uint32_t dc = aw < 3 ? aw : 3;
  const std::uint32_t rest = aw - dc;

  std::ostringstream hdr;
  hdr << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << set.count() << "\n";
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz"})
    hdr << "property float " << n << "\n";
  for (std::uint32_t k = 0; k < dc; ++k) hdr << "property float f_dc_" << k << "\n";
  for (std::uint32_t k = 0; k < rest; ++k) hdr << "property float f_rest_" << k << "\n";
  hdr << "property float opacity\n";
  for (int k = 0; k < 3; ++k) hdr << "property float scale_" << k << "\n";
  for (int k = 0; k < 4; ++k) hdr << "property float rot_" << k << "\n";
  hdr << "end_header\n";
  out << hdr.str();

  std::vector<float> rec(6 + aw + 1 + 3 + 4);
  for (const Gaussian& g : set.gaussians) {
    std::size_t p = 0;
    for (int k = 0; k < 3; ++k) rec[p++] = static_cast<float>(g.position[k]);
    for (int k = 0; k < 3; ++k) rec[p++] = 0.f;  // normals, unused
    for (std::uint32_t k = 0; k < aw; ++k) rec[p++] = g.appearance[k];
    rec[p++] = g.opacity;
    for (int k = 0; k < 3; ++k) rec[p++] = g.scale[k];
    for (int k = 0; k < 4; ++k) rec[p++] = g.rotation[k];
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size() * sizeof(float)));
  }
  if (!out) throw IoFailure("write failed for " + path);
}

}  // namespace otuvgs
