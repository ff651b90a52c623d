#include <doctest.h>

#include <algorithm>
#include <random>

#include "ebbiot/eval_metrics.hpp"
#include "oracles.hpp"

using namespace ebbiot;
using oracle::random_box;
using oracle::raster_iou;

namespace {

BoxTable table(std::initializer_list<std::pair<std::uint64_t, BoundingBox>> rows) {
  BoxTable t;
  int id = 1;
  for (const auto& [f, b] : rows) t[f].push_back({id++, b});
  return t;
}

}  // namespace

TEST_CASE("iou examples") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 5, 5}) == 0.0);
  CHECK(iou(a, {10, 0, 10, 10}) == 0.0);  // touching edges
  CHECK(iou(a, {5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("property: iou equals the raster oracle, is symmetric and bounded") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    CHECK(v == raster_iou(a, b));
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("match_frame examples") {
  const BoundingBox g{10, 10, 20, 10};
  CHECK(match_frame(std::vector{g}, std::vector{g}, 0.5).true_positives == 1);
  // Two tracker boxes shifted 10 px either way: IoU 80/100 each.
  const BoundingBox gw{0, 0, 90, 10};
  const BoundingBox l{-10, 0, 90, 10}, r{10, 0, 90, 10};
  REQUIRE(iou(gw, l) == doctest::Approx(0.8));
  REQUIRE(iou(gw, r) == doctest::Approx(0.8));
  const auto m = match_frame(std::vector{gw}, std::vector{l, r}, 0.5);
  CHECK(m.true_positives == 1);
  CHECK(m.pairs.size() == 1);
  CHECK(match_frame(std::vector{g}, std::vector<BoundingBox>{}, 0.5).true_positives == 0);
  // The threshold is strict.
  CHECK(match_frame(std::vector{gw}, std::vector{l}, 0.8).true_positives == 0);
}

TEST_CASE("match_frame is greedy in descending IoU") {
  // Track 0 overlaps both GTs; GT 0 would be left unmatched by a poor order.
  const std::vector<BoundingBox> gt{{0, 0, 10, 10}, {4, 0, 10, 10}};
  const std::vector<BoundingBox> tr{{2, 0, 10, 10}, {5, 0, 10, 10}};
  const auto m = match_frame(gt, tr, 0.3);
  CHECK(m.true_positives == 2);
  // Highest pair is (gt 1, track 1) with IoU 9/11.
  CHECK(m.pairs.front() == std::pair<std::size_t, std::size_t>{1, 1});
}

TEST_CASE("property: match count is invariant under permutation of the inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<BoundingBox> gt, tr;
    const int ng = int(rng() % 6), nt = int(rng() % 6);
    for (int i = 0; i < ng; ++i) gt.push_back(random_box(rng));
    for (int i = 0; i < nt; ++i) tr.push_back(random_box(rng));
    // Duplicates force exact IoU ties.
    if (!gt.empty() && nt > 0) tr.push_back(gt[0]);
    if (!gt.empty()) gt.push_back(gt[0]);
    for (double th : {0.1, 0.3, 0.5}) {
      const auto base = match_frame(gt, tr, th).true_positives;
      for (int p = 0; p < 5; ++p) {
        std::shuffle(gt.begin(), gt.end(), rng);
        std::shuffle(tr.begin(), tr.end(), rng);
        CHECK(match_frame(gt, tr, th).true_positives == base);
      }
    }
  }
}

TEST_CASE("property: matching is one-to-one") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BoundingBox> gt, tr;
    for (int i = 0; i < 5; ++i) gt.push_back(random_box(rng));
    for (int i = 0; i < 5; ++i) tr.push_back(random_box(rng));
    const auto m = match_frame(gt, tr, 0.1);
    std::vector<int> gu(5, 0), tu(5, 0);
    for (auto [g, t] : m.pairs) {
      ++gu[g];
      ++tu[t];
      CHECK(iou(gt[g], tr[t]) > 0.1);
    }
    CHECK(*std::max_element(gu.begin(), gu.end()) <= 1);
    CHECK(*std::max_element(tu.begin(), tu.end()) <= 1);
  }
}

TEST_CASE("evaluate: identical tables are perfect at every threshold") {
  const auto gt = table({{0, {10, 10, 30, 15}}, {1, {12, 10, 30, 15}}, {1, {100, 50, 20, 20}}});
  const auto r = evaluate(gt, gt, default_iou_thresholds());
  REQUIRE(r.per_threshold.size() == 5);
  for (const auto& m : r.per_threshold) {
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.true_positives == 3);
    CHECK_FALSE(m.precision_undefined);
    CHECK_FALSE(m.recall_undefined);
  }
  CHECK(r.gt_tracks == 3);
}

TEST_CASE("evaluate: 1 px dilation of a 30x15 box") {
  const auto gt = table({{0, {10, 10, 30, 15}}});
  const auto tr = table({{0, {9, 9, 32, 17}}});
  const double expected = (30.0 * 15.0) / (32.0 * 17.0);
  CHECK(iou({10, 10, 30, 15}, {9, 9, 32, 17}) == doctest::Approx(expected));
  const std::vector<double> th{0.5, 0.9};
  const auto r = evaluate(gt, tr, th);
  CHECK(r.per_threshold[0].true_positives == 1);
  CHECK(r.per_threshold[1].true_positives == 0);
}

TEST_CASE("evaluate: zero denominators are flagged") {
  const auto gt = table({{0, {10, 10, 30, 15}}});
  const std::vector<double> th{0.5};
  const auto r = evaluate(gt, BoxTable{}, th);
  CHECK(r.per_threshold[0].precision == 1.0);
  CHECK(r.per_threshold[0].precision_undefined);
  CHECK(r.per_threshold[0].recall == 0.0);
  CHECK_FALSE(r.per_threshold[0].recall_undefined);

  const auto r2 = evaluate(BoxTable{}, gt, th);
  CHECK(r2.per_threshold[0].precision == 0.0);
  CHECK(r2.per_threshold[0].recall == 1.0);
  CHECK(r2.per_threshold[0].recall_undefined);
}

TEST_CASE("evaluate skips frames before first_frame") {
  const auto gt = table({{0, {10, 10, 30, 15}}, {1, {10, 10, 30, 15}}});
  const auto tr = table({{1, {10, 10, 30, 15}}});
  const std::vector<double> th{0.5};
  CHECK(evaluate(gt, tr, th).per_threshold[0].recall == 0.5);
  const auto r = evaluate(gt, tr, th, 1);
  CHECK(r.per_threshold[0].recall == 1.0);
  CHECK(r.per_threshold[0].ground_truths == 1);
}

TEST_CASE("property: precision and recall never increase with the threshold") {
  std::mt19937_64 rng(31);
  std::vector<double> th;
  for (int i = 0; i <= 20; ++i) th.push_back(i * 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    BoxTable gt, tr;
    for (std::uint64_t f = 0; f < 20; ++f) {
      for (int i = 0, n = int(rng() % 4); i < n; ++i) gt[f].push_back({i + 1, random_box(rng)});
      for (int i = 0, n = int(rng() % 4); i < n; ++i) tr[f].push_back({i + 1, random_box(rng)});
    }
    const auto r = evaluate(gt, tr, th);
    for (std::size_t i = 1; i < r.per_threshold.size(); ++i) {
      CHECK(r.per_threshold[i].precision <= r.per_threshold[i - 1].precision);
      CHECK(r.per_threshold[i].recall <= r.per_threshold[i - 1].recall);
    }
    for (const auto& m : r.per_threshold) {
      CHECK(m.true_positives <= std::min(m.proposals, m.ground_truths));
      CHECK(m.precision >= 0.0);
      CHECK(m.precision <= 1.0);
      CHECK(m.recall >= 0.0);
      CHECK(m.recall <= 1.0);
    }
  }
}

TEST_CASE("weighted_average examples") {
  const std::vector<PrecisionRecall> one{{0.6, 0.7}};
  const std::vector<double> w1{4};
  CHECK(weighted_average(one, w1).precision == 0.6);
  CHECK(weighted_average(one, w1).recall == 0.7);

  const std::vector<PrecisionRecall> two{{1.0, 1.0}, {0.0, 0.0}};
  const std::vector<double> w31{3, 1};
  CHECK(weighted_average(two, w31).precision == 0.75);
  CHECK(weighted_average(two, w31).recall == 0.75);
  const std::vector<double> w11{2, 2};
  CHECK(weighted_average(two, w11).precision == 0.5);

  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(weighted_average(two, zero), ValidationError);
}
