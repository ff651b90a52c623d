#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "ebbiot/ebbi_frame.hpp"
#include "oracles.hpp"

using namespace ebbiot;
using oracle::random_frame;
using oracle::sort_median;

namespace {

const SensorConfig kCfg;

FilterParams patch(int p) {
  FilterParams fp;
  fp.patch = p;
  return fp;
}

}  // namespace

TEST_CASE("accumulate sets one bit per fired pixel") {
  const std::vector<Event> ev{{0, 5, 5, 1}, {10, 5, 5, -1}, {20, 6, 5, 1}};
  const auto f = accumulate(ev, kCfg);
  CHECK(f.count() == 2);
  CHECK(f.get(5, 5));
  CHECK(f.get(6, 5));
  CHECK(accumulate({}, kCfg).count() == 0);
}

TEST_CASE("accumulate of every pixel once gives an all-ones frame") {
  std::vector<Event> ev;
  for (int y = 0; y < kCfg.height; ++y) {
    for (int x = 0; x < kCfg.width; ++x) ev.push_back({0, std::uint16_t(x), std::uint16_t(y), 1});
  }
  CHECK(ev.size() == 43200);
  CHECK(accumulate(ev, kCfg).count() == 43200);
}

TEST_CASE("property: accumulate is idempotent under duplication") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Event> ev;
    for (int i = 0; i < 300; ++i) {
      ev.push_back({0, std::uint16_t(rng() % 240), std::uint16_t(rng() % 180), 1});
    }
    auto doubled = ev;
    doubled.insert(doubled.end(), ev.begin(), ev.end());
    CHECK(accumulate(doubled, kCfg) == accumulate(ev, kCfg));
  }
}

TEST_CASE("median filter basic cases") {
  BinaryFrame single(kCfg);
  single.set(100, 100);
  CHECK(median_filter(single, {}).count() == 0);

  BinaryFrame block(kCfg);
  for (int y = 50; y < 53; ++y) {
    for (int x = 50; x < 53; ++x) block.set(x, y);
  }
  CHECK(median_filter(block, {}).get(51, 51));
}

TEST_CASE("median filter threshold: 5 of 9 survives, 4 of 9 does not") {
  const int cx = 20, cy = 20;
  const std::vector<std::pair<int, int>> offsets{{0, 0}, {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  BinaryFrame five(kCfg);
  for (auto [dx, dy] : offsets) five.set(cx + dx, cy + dy);
  CHECK(median_filter(five, {}).get(cx, cy));

  BinaryFrame four(kCfg);
  for (std::size_t i = 0; i < 4; ++i) four.set(cx + offsets[i].first, cy + offsets[i].second);
  CHECK_FALSE(median_filter(four, {}).get(cx, cy));
}

TEST_CASE("median filter pads with zeros at the border") {
  BinaryFrame f(kCfg);
  // A full 2x2 corner block: each corner patch sees at most 4 in-bounds bits.
  f.set(0, 0);
  f.set(1, 0);
  f.set(0, 1);
  f.set(1, 1);
  CHECK(median_filter(f, {}).count() == 0);
  for (int y = 0; y < 3; ++y) f.set(2, y);
  f.set(0, 2);
  f.set(1, 2);
  // 3x3 corner block: the pixel (1,1) sees 9, (0,0) sees 4.
  const auto out = median_filter(f, {});
  CHECK(out.get(1, 1));
  CHECK_FALSE(out.get(0, 0));
}

TEST_CASE("oracle: median filter equals sort-based median on random frames") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const double density = 0.05 + 0.9 * double(trial) / 100.0;
    const auto f = random_frame(rng, kCfg.width, kCfg.height, density);
    CHECK(median_filter(f, {}) == sort_median(f, 3));
  }
  for (int p : {5, 7}) {
    const auto f = random_frame(rng, 40, 30, 0.5);
    CHECK(median_filter(f, patch(p)) == sort_median(f, p));
  }
}

TEST_CASE("property: every isolated set pixel is removed") {
  // Exhaustive: an isolated centre in a 5x5 frame with all 2^16 settings of
  // the outer ring (the only pixels that may be set without touching it).
  std::vector<std::pair<int, int>> ring;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      if (std::abs(x - 2) == 2 || std::abs(y - 2) == 2) ring.emplace_back(x, y);
    }
  }
  REQUIRE(ring.size() == 16);
  bool all_removed = true;
  for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
    BinaryFrame f(5, 5);
    f.set(2, 2);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (mask & (1u << i)) f.set(ring[i].first, ring[i].second);
    }
    if (median_filter(f, {}).get(2, 2)) all_removed = false;
  }
  CHECK(all_removed);

  // Isolated pixels on borders and corners of the full sensor.
  const std::vector<std::pair<int, int>> anchors{{10, 10}, {0, 10}, {10, 0}, {0, 0}, {239, 179}, {239, 0}};
  for (auto [ax, ay] : anchors) {
    BinaryFrame f(kCfg);
    f.set(ax, ay);
    CHECK_FALSE(median_filter(f, {}).get(ax, ay));
  }

  // Random dense frames: every pixel without set 8-neighbours disappears.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_frame(rng, kCfg.width, kCfg.height, 0.3);
    const auto out = median_filter(f, {});
    for (int y = 0; y < kCfg.height; ++y) {
      for (int x = 0; x < kCfg.width; ++x) {
        if (!f.get(x, y)) continue;
        int neighbours = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx || dy) && f.get_padded(x + dx, y + dy)) ++neighbours;
          }
        }
        if (neighbours == 0) CHECK_FALSE(out.get(x, y));
      }
    }
  }
}

TEST_CASE("median filter counters: one comparison per pixel, one increment per patch hit") {
  BinaryFrame f(kCfg);
  f.set(50, 50);
  f.set(51, 50);
  f.set(0, 0);  // corner pixel lies in 4 in-bounds patches
  StageCounters c;
  median_filter(f, {}, &c);
  CHECK(c.comparisons == kCfg.pixel_count());
  CHECK(c.increments == 9 + 9 + 4);
}

TEST_CASE("apply_roe clears only masked pixels") {
  BinaryFrame f(kCfg);
  f.set(10, 10);
  f.set(100, 100);
  CHECK(apply_roe(f, {}) == f);
  RoeMask all{{{0, 0, 240, 180}}};
  CHECK(apply_roe(f, all).count() == 0);
  RoeMask one{{{5, 5, 10, 10}}};
  const auto out = apply_roe(f, one);
  CHECK_FALSE(out.get(10, 10));
  CHECK(out.get(100, 100));
}

TEST_CASE("RoeMask clipping drops regions outside the sensor") {
  RoeMask m{{{-10, -10, 20, 20}, {300, 10, 5, 5}, {230, 170, 50, 50}}};
  const auto c = m.clipped(kCfg);
  REQUIRE(c.regions.size() == 2);
  CHECK(c.regions[0] == BoundingBox{0, 0, 10, 10});
  CHECK(c.regions[1] == BoundingBox{230, 170, 10, 10});
}

TEST_CASE("nn_filter hand trace") {
  const std::vector<Event> ev{{1000, 10, 10, 1}, {2000, 11, 10, 1}};
  const auto out = nn_filter(ev, {}, kCfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == ev[1]);

  const std::vector<Event> lone{{1000, 10, 10, 1}};
  CHECK(nn_filter(lone, {}, kCfg).empty());

  const std::vector<Event> repeat{{1000, 10, 10, 1}, {1500, 10, 10, 1}, {1800, 10, 10, -1}};
  CHECK(nn_filter(repeat, {}, kCfg).empty());
}

TEST_CASE("nn_filter window is inclusive and bounded") {
  const std::vector<Event> at_edge{{0, 10, 10, 1}, {5000, 11, 11, 1}};
  CHECK(nn_filter(at_edge, {}, kCfg).size() == 1);
  const std::vector<Event> too_late{{0, 10, 10, 1}, {5001, 11, 11, 1}};
  CHECK(nn_filter(too_late, {}, kCfg).empty());
  const std::vector<Event> too_far{{0, 10, 10, 1}, {100, 12, 10, 1}};
  CHECK(nn_filter(too_far, {}, kCfg).empty());
}

TEST_CASE("property: nn_filter is causal") {
  std::mt19937_64 rng(17);
  std::vector<Event> ev;
  std::uint64_t t = 0;
  for (int i = 0; i < 4000; ++i) {
    t += rng() % 50;
    ev.push_back({t, std::uint16_t(rng() % 40), std::uint16_t(rng() % 30), 1});
  }
  const auto full = nn_filter(ev, {}, kCfg);
  for (std::size_t cut : {std::size_t(1), std::size_t(100), std::size_t(1777), std::size_t(3999)}) {
    const auto prefix = nn_filter(std::span(ev).first(cut), {}, kCfg);
    const auto last_t = ev[cut - 1].t;
    std::vector<Event> expect;
    for (std::size_t i = 0; i < full.size() && expect.size() < prefix.size(); ++i) expect.push_back(full[i]);
    CHECK(prefix == expect);
    for (const auto& e : prefix) CHECK(e.t <= last_t);
  }
}

TEST_CASE("filter parameters are validated") {
  CHECK_THROWS_AS(median_filter(BinaryFrame(kCfg), patch(4)), ValidationError);
  CHECK_THROWS_AS(median_filter(BinaryFrame(kCfg), patch(1)), ValidationError);
}
