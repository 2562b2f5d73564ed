// otuvgs command-line front end.
//
// Subcommands: map, stats, heatmap, compare, synth, bench.
// Diagnostics go to stderr; data goes to files or stdout.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <sys/resource.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "otuvgs/io.hpp"
#include "otuvgs/metrics.hpp"
#include "otuvgs/ply.hpp"
#include "otuvgs/synth.hpp"

namespace {

using namespace otuvgs;
using Clock = std::chrono::steady_clock;

long peak_rss_kb() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return ru.ru_maxrss;
}

Strategy parse_strategy(const std::string& s) {
  if (s == "spherical") return Strategy::Spherical;
  if (s == "he") return Strategy::HistogramEq;
  if (s == "ot") return Strategy::RankOT;
  throw CLI::ValidationError("--mapping", "expected spherical|he|ot");
}

OriginPolicy parse_center(const std::string& s) {
  if (s == "origin") return OriginPolicy::RawOrigin;
  if (s == "centroid") return OriginPolicy::Centroid;
  throw CLI::ValidationError("--center", "expected origin|centroid");
}

struct GridFlags {
  std::uint32_t height = 512;
  std::uint32_t width = 512;
  std::uint32_t capacity = 1;

  void attach(CLI::App& app) {
    app.add_option("--height", height, "UV grid height")->check(CLI::PositiveNumber);
    app.add_option("--width", width, "UV grid width")->check(CLI::PositiveNumber);
    app.add_option("-K,--capacity", capacity, "per-slot capacity")->check(CLI::PositiveNumber);
  }

  GridConfig config(const GaussianSet& set) const {
    GridConfig g;
    g.height = height;
    g.width = width;
    g.capacity = capacity;
    if (set.appearance_width < 3) {
      g.channel_layout = {Channel::Position, Channel::Scale, Channel::Rotation, Channel::Opacity};
    }
    return g;
  }
};

struct MappingFlags {
  std::string mapping = "ot";
  std::uint32_t he_bins = 256;
  std::string center = "centroid";

  void attach(CLI::App& app) {
    app.add_option("--mapping", mapping, "mapping strategy")
        ->check(CLI::IsMember({"spherical", "he", "ot"}));
    app.add_option("--he-bins", he_bins, "histogram bins for he mapping")
        ->check(CLI::Range(2u, 1u << 20));
    app.add_option("--center", center, "projection center")
        ->check(CLI::IsMember({"origin", "centroid"}));
  }

  MappingConfig config() const {
    return {parse_strategy(mapping), he_bins, parse_center(center)};
  }
};

void write_manifest(const std::string& out_path, const nlohmann::json& body) {
  std::ofstream m(out_path + ".manifest.json");
  if (!m) throw IoFailure("cannot write manifest for " + out_path);
  m << body.dump(2) << "\n";
}

// Stage-labelled runner so failures name where they happened.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

int cmd_map(const std::string& input, const MappingFlags& mf, const GridFlags& gf,
            const std::string& out) {
  const auto t0 = Clock::now();
  GaussianSet set = stage("parse", [&] { return load_ply(input); });
  const MappingConfig mcfg = mf.config();
  const GridConfig grid = gf.config(set);
  ContinuousUV uv = stage("map", [&] { return map_uv(set, mcfg); });
  UVTensor tensor =
      stage("pack", [&] { return pack(set, discretize(uv, grid), grid, mcfg.strategy); });
  stage("write", [&] { write_tensor(tensor, out); });
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  write_manifest(out, {{"tool_version", kVersion},
                       {"command", "map"},
                       {"input", input},
                       {"mapping", mf.mapping},
                       {"he_bins", mf.he_bins},
                       {"center", mf.center},
                       {"height", grid.height},
                       {"width", grid.width},
                       {"capacity", grid.capacity},
                       {"output", out},
                       {"n_input", set.count()},
                       {"wall_seconds", secs},
                       {"peak_rss_kb", peak_rss_kb()}});
  return 0;
}

int cmd_stats(const std::string& tensor_path, const std::string& format) {
  const UVTensor t = stage("parse", [&] { return read_tensor(tensor_path); });
  std::cout << format_reports({utilization(t)},
                              format == "csv" ? ReportFormat::Csv : ReportFormat::Json);
  return 0;
}

int cmd_heatmap(const std::string& tensor_path, const std::string& mode,
                const std::string& out) {
  const UVTensor t = stage("parse", [&] { return read_tensor(tensor_path); });
  stage("write", [&] {
    write_heatmap(t, out, mode == "raw" ? HeatmapMode::Raw : HeatmapMode::Retained);
  });
  return 0;
}

int cmd_compare(const std::string& input, const MappingFlags& mf, const GridFlags& gf,
                const std::vector<std::uint32_t>& k_sweep_values, const std::string& format,
                const std::string& out) {
  GaussianSet set = stage("parse", [&] { return load_ply(input); });
  const GridConfig grid = gf.config(set);
  const OriginPolicy origin = parse_center(mf.center);
  const std::vector<Strategy> strategies{Strategy::Spherical, Strategy::HistogramEq,
                                         Strategy::RankOT};

  std::vector<UtilizationReport> reports;
  if (k_sweep_values.empty()) {
    reports = stage("map", [&] { return compare(set, grid, strategies, mf.he_bins, origin); });
  } else {
    for (Strategy s : strategies) {
      MappingConfig mcfg{s, mf.he_bins, origin};
      ContinuousUV uv = stage("map", [&] { return map_uv(set, mcfg); });
      auto rows = stage("pack", [&] { return k_sweep(set, uv, grid, k_sweep_values); });
      reports.insert(reports.end(), rows.begin(), rows.end());
    }
  }
  const std::string text =
      format_reports(reports, format == "csv" ? ReportFormat::Csv : ReportFormat::Json);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream o(out);
    if (!o) throw IoFailure("cannot open " + out + " for writing");
    o << text;
  }
  return 0;
}

int cmd_synth(SynthSpec spec, const std::string& spec_file, const std::string& kind,
              const std::string& opacity, const std::string& out) {
  if (!spec_file.empty()) {
    spec = stage("parse", [&] { return load_spec_file(spec_file); });
  } else {
    if (kind == "uniform_sphere") spec.kind = SynthKind::UniformSphere;
    else if (kind == "vmf_clusters") spec.kind = SynthKind::VmfClusters;
    else if (kind == "anisotropic_shell") spec.kind = SynthKind::AnisotropicShell;
    spec.opacity = opacity == "constant" ? OpacityKind::Constant : OpacityKind::UniformRange;
  }
  GaussianSet set = stage("map", [&] { return generate(spec); });
  stage("write", [&] { write_ply(set, out); });
  return 0;
}

int cmd_bench(const std::vector<std::uint64_t>& n_values, const MappingFlags& mf,
              const GridFlags& gf, std::uint64_t seed) {
  if (n_values.empty()) throw Error("bench: --n list must be non-empty");
  const MappingConfig mcfg = mf.config();
  std::cout << "n,seconds\n";
  for (std::uint64_t n : n_values) {
    if (n == 0) throw Error("bench: n must be >= 1");
    SynthSpec spec;
    spec.kind = SynthKind::UniformSphere;
    spec.n = n;
    spec.seed = seed;
    GaussianSet set = generate(spec);
    const GridConfig grid = gf.config(set);
    const auto t0 = Clock::now();
    ContinuousUV uv = map_uv(set, mcfg);
    UVTensor tensor = pack(set, discretize(uv, grid), grid, mcfg.strategy);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    (void)tensor;
    std::cout << n << "," << secs << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UV-grid capacity allocation for 3D Gaussian sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(otuvgs::kVersion));

  std::string input, out, format = "json", mode = "raw", spec_file;
  std::string synth_kind = "uniform_sphere", synth_opacity = "uniform";
  MappingFlags mf;
  GridFlags gf;
  std::vector<std::uint32_t> ks;
  std::vector<std::uint64_t> ns;
  otuvgs::SynthSpec spec;

  auto* map_cmd = app.add_subcommand("map", "map a PLY splat file onto a UV tensor");
  map_cmd->add_option("input", input, "input PLY file")->required()->check(CLI::ExistingFile);
  mf.attach(*map_cmd);
  gf.attach(*map_cmd);
  map_cmd->add_option("--out", out, "output UVGT path")->required();

  auto* stats_cmd = app.add_subcommand("stats", "print utilization metrics for a UVGT tensor");
  stats_cmd->add_option("tensor", input, "UVGT file")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  auto* heat_cmd = app.add_subcommand("heatmap", "write a PGM occupancy heatmap");
  heat_cmd->add_option("tensor", input, "UVGT file")->required()->check(CLI::ExistingFile);
  heat_cmd->add_option("--mode", mode, "raw|retained")->check(CLI::IsMember({"raw", "retained"}));
  heat_cmd->add_option("--out", out, "output PGM path")->required();

  auto* cmp_cmd = app.add_subcommand("compare", "run all three strategies on one input");
  cmp_cmd->add_option("input", input, "input PLY file")->required()->check(CLI::ExistingFile);
  mf.attach(*cmp_cmd);
  gf.attach(*cmp_cmd);
  cmp_cmd->add_option("--k-sweep", ks, "comma-separated K list")->delimiter(',');
  cmp_cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  cmp_cmd->add_option("--out", out, "output path (default stdout)");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic Gaussian set");
  synth_cmd->add_option("--kind", synth_kind, "uniform_sphere|vmf_clusters|anisotropic_shell")
      ->check(CLI::IsMember({"uniform_sphere", "vmf_clusters", "anisotropic_shell"}));
  synth_cmd->add_option("-n,--count", spec.n, "number of Gaussians")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", spec.seed, "generator seed");
  synth_cmd->add_option("--clusters", spec.clusters, "vMF cluster count");
  synth_cmd->add_option("--kappa", spec.kappa, "vMF concentration");
  synth_cmd->add_option("--axis-scales", spec.axis_scales, "shell axis scales")->delimiter(',');
  synth_cmd->add_option("--opacity", synth_opacity, "constant|uniform")
      ->check(CLI::IsMember({"constant", "uniform"}));
  synth_cmd->add_option("--opacity-lo", spec.opacity_lo, "opacity lower bound / constant value");
  synth_cmd->add_option("--opacity-hi", spec.opacity_hi, "opacity upper bound");
  synth_cmd->add_option("--spec-file", spec_file, "key=value spec file (overrides flags)")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", out, "output PLY path")->required();

  auto* bench_cmd = app.add_subcommand("bench", "time mapping+packing across N values");
  bench_cmd->add_option("--n", ns, "comma-separated N list")->delimiter(',')->required();
  mf.attach(*bench_cmd);
  gf.attach(*bench_cmd);
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--seed", bench_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (map_cmd->parsed()) return cmd_map(input, mf, gf, out);
    if (stats_cmd->parsed()) return cmd_stats(input, format);
    if (heat_cmd->parsed()) return cmd_heatmap(input, mode, out);
    if (cmp_cmd->parsed()) return cmd_compare(input, mf, gf, ks, format, out);
    if (synth_cmd->parsed()) return cmd_synth(spec, spec_file, synth_kind, synth_opacity, out);
    if (bench_cmd->parsed()) return cmd_bench(ns, mf, gf, bench_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
