#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

#include "otuvgs/ply.hpp"
#include "otuvgs/synth.hpp"

using namespace otuvgs;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("otuvgs_ply_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void append_float(std::string& s, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  s.append(buf, 4);
}

// Byte-level fixture: header + one record, assembled by hand rather than via
// write_ply so the reader is checked against the documented grammar.
std::string single_vertex_bytes() {
  std::string s =
      "ply\n"
      "format binary_little_endian 1.0\n"
      "element vertex 1\n"
      "property float x\n"
      "property float y\n"
      "property float z\n"
      "property float opacity\n"
      "property float scale_0\n"
      "property float scale_1\n"
      "property float scale_2\n"
      "property float rot_0\n"
      "property float rot_1\n"
      "property float rot_2\n"
      "property float rot_3\n"
      "end_header\n";
  for (float v : {1.f, 2.f, 3.f, 0.5f, 0.f, 0.f, 0.f, 1.f, 0.f, 0.f, 0.f}) append_float(s, v);
  return s;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("load_ply single-vertex fixture") {
  TempDir tmp;
  write_file(tmp.file("one.ply"), single_vertex_bytes());
  auto set = load_ply(tmp.file("one.ply"));
  REQUIRE(set.count() == 1);
  CHECK(set.appearance_width == 0);
  const Gaussian& g = set.gaussians[0];
  CHECK(g.position == DVec3{1, 2, 3});
  CHECK(g.opacity == 0.5f);
  CHECK(g.scale == Vec3{0, 0, 0});
  CHECK(g.rotation == Vec4{1, 0, 0, 0});
  CHECK(g.source_index == 0);
}

TEST_CASE("load_ply empty vertex element") {
  TempDir tmp;
  auto bytes = single_vertex_bytes();
  auto pos = bytes.find("element vertex 1");
  bytes.replace(pos, strlen("element vertex 1"), "element vertex 0");
  bytes.resize(bytes.find("end_header\n") + strlen("end_header\n"));
  write_file(tmp.file("empty.ply"), bytes);
  auto set = load_ply(tmp.file("empty.ply"));
  CHECK(set.count() == 0);
}

TEST_CASE("load_ply truncated body") {
  TempDir tmp;
  auto bytes = single_vertex_bytes();
  bytes.resize(bytes.size() - 4);
  write_file(tmp.file("short.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("short.ply")), TruncatedBody);
}

TEST_CASE("load_ply header rejection") {
  TempDir tmp;

  auto bytes = single_vertex_bytes();
  bytes.replace(0, 3, "plz");
  write_file(tmp.file("magic.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("magic.ply")), MalformedHeader);

  bytes = single_vertex_bytes();
  auto pos = bytes.find("binary_little_endian");
  bytes.replace(pos, strlen("binary_little_endian"), "ascii_little_endiann");
  write_file(tmp.file("fmt.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("fmt.ply")), MalformedHeader);

  bytes = single_vertex_bytes();
  pos = bytes.find("property float opacity\n");
  bytes.erase(pos, strlen("property float opacity\n"));
  write_file(tmp.file("noop.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("noop.ply")), MalformedHeader);

  bytes = single_vertex_bytes();
  pos = bytes.find("property float x");
  bytes.replace(pos, strlen("property float x"), "property uchar x");
  write_file(tmp.file("type.ply"), bytes);
  CHECK_THROWS_AS(load_ply(tmp.file("type.ply")), MalformedHeader);
}

TEST_CASE("load_ply non-finite handling") {
  TempDir tmp;
  auto bytes = single_vertex_bytes();
  const std::size_t body = bytes.find("end_header\n") + strlen("end_header\n");
  const float nan = std::numeric_limits<float>::quiet_NaN();

  // NaN position -> reject
  auto bad = bytes;
  std::memcpy(bad.data() + body, &nan, 4);
  write_file(tmp.file("nanpos.ply"), bad);
  CHECK_THROWS_AS(load_ply(tmp.file("nanpos.ply")), NonFiniteRecord);

  // NaN scale -> repaired to 0 with a warning count
  bad = bytes;
  std::memcpy(bad.data() + body + 4 * 4, &nan, 4);  // scale_0
  write_file(tmp.file("nanscale.ply"), bad);
  auto set = load_ply(tmp.file("nanscale.ply"));
  CHECK(set.gaussians[0].scale[0] == 0.f);
  CHECK(set.repaired_values == 1);
}

TEST_CASE("write_ply round-trips bit-exactly") {
  TempDir tmp;
  write_file(tmp.file("one.ply"), single_vertex_bytes());
  auto set = load_ply(tmp.file("one.ply"));
  write_ply(set, tmp.file("rt.ply"));
  auto back = load_ply(tmp.file("rt.ply"));
  CHECK(back.gaussians == set.gaussians);
  CHECK(back.appearance_width == set.appearance_width);
}

TEST_CASE("write_ply round-trips a synthetic thousand") {
  TempDir tmp;
  SynthSpec spec;
  spec.kind = SynthKind::VmfClusters;
  spec.n = 1000;
  spec.seed = 42;
  auto set = generate(spec);
  write_ply(set, tmp.file("synth.ply"));
  auto back = load_ply(tmp.file("synth.ply"));
  REQUIRE(back.count() == set.count());
  CHECK(back.gaussians == set.gaussians);
  for (std::size_t i = 0; i < back.count(); ++i)
    CHECK(back.gaussians[i].source_index == i);
}

TEST_CASE("write_ply declares dc and rest channels for wide appearance") {
  TempDir tmp;
  GaussianSet set;
  set.appearance_width = 48;
  Gaussian g;
  g.appearance.assign(48, 0.25f);
  set.gaussians.push_back(g);
  write_ply(set, tmp.file("wide.ply"));
  auto text = read_file(tmp.file("wide.ply"));
  CHECK(text.find("property float f_dc_2\n") != std::string::npos);
  CHECK(text.find("property float f_rest_44\n") != std::string::npos);
  CHECK(text.find("property float f_rest_45\n") == std::string::npos);
  auto back = load_ply(tmp.file("wide.ply"));
  CHECK(back.appearance_width == 48);
  CHECK(back.gaussians == set.gaussians);
}

TEST_CASE("unknown float properties land in trailing appearance channels") {
  TempDir tmp;
  auto bytes = single_vertex_bytes();
  auto pos = bytes.find("end_header\n");
  bytes.insert(pos, "property float confidence\n");
  append_float(bytes, 0.75f);
  write_file(tmp.file("extra.ply"), bytes);
  auto set = load_ply(tmp.file("extra.ply"));
  REQUIRE(set.appearance_width == 1);
  CHECK(set.gaussians[0].appearance[0] == 0.75f);
}
