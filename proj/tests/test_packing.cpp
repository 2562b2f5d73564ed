#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "otuvgs/metrics.hpp"
#include "otuvgs/packing.hpp"
#include "otuvgs/synth.hpp"
#include "oracles.hpp"

using namespace otuvgs;

namespace {

GridConfig small_grid(std::uint32_t h, std::uint32_t w, std::uint32_t k) {
  GridConfig g;
  g.height = h;
  g.width = w;
  g.capacity = k;
  g.channel_layout = {Channel::Position, Channel::Opacity};
  return g;
}

GaussianSet tiny_set(std::size_t n) {
  GaussianSet s;
  s.gaussians.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.gaussians[i].source_index = i;
    s.gaussians[i].opacity = static_cast<float>(i) * 0.1f;
  }
  return s;
}

}  // namespace

TEST_CASE("discretize formula") {
  ContinuousUV uv;
  uv.u = {1.0, 0.5, 0.0};
  uv.v = {1.0, 0.25, 0.0};
  GridConfig g512 = small_grid(512, 512, 1);
  auto a = discretize(uv, g512);
  CHECK(a.col[0] == 511);
  CHECK(a.row[0] == 511);
  CHECK(a.col[2] == 0);
  CHECK(a.row[2] == 0);

  GridConfig g4 = small_grid(4, 4, 1);
  auto b = discretize(uv, g4);
  CHECK(b.col[1] == 2);
  CHECK(b.row[1] == 1);
}

TEST_CASE("top_k_retain") {
  std::vector<Arrival> arr{{0, 0.9f}, {1, 0.1f}, {2, 0.5f}};
  auto keep1 = top_k_retain(arr, 1);
  REQUIRE(keep1.size() == 1);
  CHECK(keep1[0].source_index == 0);

  auto keep2 = top_k_retain(arr, 2);
  REQUIRE(keep2.size() == 2);
  CHECK(keep2[0].opacity == 0.9f);
  CHECK(keep2[1].opacity == 0.5f);

  std::vector<Arrival> ties{{5, 0.3f}, {2, 0.3f}};
  auto kept = top_k_retain(ties, 1);
  CHECK(kept[0].source_index == 2);
}

TEST_CASE("pack hand-counted 2x2") {
  auto set = tiny_set(3);
  UVAssignment a;
  a.row = {0, 0, 1};
  a.col = {0, 0, 1};
  auto grid = small_grid(2, 2, 1);
  auto t = pack(set, a, grid, Strategy::RankOT);
  CHECK(t.raw_counts == std::vector<std::uint32_t>{2, 0, 0, 1});
  CHECK(t.counts == std::vector<std::uint32_t>{1, 0, 0, 1});
  // arrivals 0 and 1 collide; 1 has larger opacity
  CHECK(t.retained_ids[0] == 1);
  CHECK(t.retained_ids[3] == 2);
  CHECK(t.n_input == 3);
}

TEST_CASE("pack empty set") {
  auto t = pack(GaussianSet{}, UVAssignment{}, small_grid(2, 2, 1), Strategy::Spherical);
  CHECK(t.n_input == 0);
  for (auto c : t.counts) CHECK(c == 0);
  for (auto f : t.data) CHECK(f == 0.f);
  for (auto id : t.retained_ids) CHECK(id == kEmptySlotId);
}

TEST_CASE("pack without truncation keeps everything") {
  auto set = tiny_set(5);
  UVAssignment a;
  a.row = {0, 0, 0, 1, 1};
  a.col = {0, 0, 0, 0, 1};
  auto t = pack(set, a, small_grid(2, 2, 3), Strategy::RankOT);
  std::uint64_t retained = 0;
  for (auto c : t.counts) retained += c;
  CHECK(retained == 5);
}

TEST_CASE("pack rejects missing channels") {
  auto set = tiny_set(1);  // appearance_width 0
  UVAssignment a;
  a.row = {0};
  a.col = {0};
  GridConfig grid = small_grid(2, 2, 1);
  grid.channel_layout = default_channel_layout();  // includes appearance DC
  CHECK_THROWS_AS(pack(set, a, grid, Strategy::RankOT), ChannelMissing);
}

TEST_CASE("within-slot order is descending opacity") {
  auto set = tiny_set(4);
  set.gaussians[0].opacity = 0.2f;
  set.gaussians[1].opacity = 0.9f;
  set.gaussians[2].opacity = 0.4f;
  set.gaussians[3].opacity = 0.7f;
  UVAssignment a;
  a.row = {0, 0, 0, 0};
  a.col = {0, 0, 0, 0};
  auto t = pack(set, a, small_grid(1, 1, 3), Strategy::RankOT);
  CHECK(t.retained_ids[0] == 1);
  CHECK(t.retained_ids[1] == 3);
  CHECK(t.retained_ids[2] == 2);
  CHECK(t.counts[0] == 3);
  CHECK(t.raw_counts[0] == 4);
}

TEST_CASE("pack matches exhaustive slot tally on random inputs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_int_distribution<int> nn(0, 80);
    const std::uint32_t h = dim(rng), w = dim(rng);
    std::uniform_int_distribution<std::uint32_t> rr(0, h - 1), cc(0, w - 1);
    std::uniform_int_distribution<int> kk(1, 4);
    std::uniform_real_distribution<float> op(0.f, 1.f);
    const int n = nn(rng);
    const std::uint32_t k = kk(rng);

    auto set = tiny_set(n);
    UVAssignment a;
    std::vector<float> opacities(n);
    for (int i = 0; i < n; ++i) {
      set.gaussians[i].opacity = opacities[i] = op(rng);
      a.row.push_back(rr(rng));
      a.col.push_back(cc(rng));
    }
    auto t = pack(set, a, small_grid(h, w, k), Strategy::RankOT);
    auto want = oracle::tally(a.row, a.col, opacities, k);

    std::uint64_t retained = 0, raw_total = 0;
    for (std::uint32_t r = 0; r < h; ++r)
      for (std::uint32_t c = 0; c < w; ++c) {
        const auto s = r * w + c;
        CHECK(t.raw_counts[s] == want.raw(r, c));
        CHECK(t.counts[s] == std::min<std::uint64_t>(want.raw(r, c), k));
        retained += t.counts[s];
        raw_total += t.raw_counts[s];
        auto it = want.arrivals.find({r, c});
        for (std::uint32_t j = 0; j < t.counts[s]; ++j)
          CHECK(t.retained_ids[s * k + j] == it->second[j].id);
      }
    CHECK(retained == want.retained);
    CHECK(raw_total == static_cast<std::uint64_t>(n));
    CHECK(retained <= static_cast<std::uint64_t>(h) * w * k);
  }
}

TEST_CASE("packing is input-order independent for distinct keys") {
  SynthSpec spec;
  spec.kind = SynthKind::VmfClusters;
  spec.n = 2000;
  spec.seed = 4242;
  auto set = generate(spec);

  MappingConfig cfg{Strategy::RankOT, 256, OriginPolicy::RawOrigin};
  GridConfig grid = small_grid(16, 16, 2);
  auto uv = map_uv(set, cfg);
  auto t0 = pack(set, discretize(uv, grid), grid, cfg.strategy);

  auto shuffled = set;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.gaussians.begin(), shuffled.gaussians.end(), rng);
  auto uv1 = map_uv(shuffled, cfg);
  auto t1 = pack(shuffled, discretize(uv1, grid), grid, cfg.strategy);

  CHECK(t0.counts == t1.counts);
  CHECK(t0.raw_counts == t1.raw_counts);
  CHECK(t0.retained_ids == t1.retained_ids);
  CHECK(t0.data == t1.data);
}
