#include "ebbiot/region_proposal.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace ebbiot {

ScaledImage downsample(const BinaryFrame& frame, int s1, int s2, StageCounters* counters) {
  if (s1 < 1 || s2 < 1) throw ValidationError("rpn.s1 and rpn.s2 must be >= 1");
  if (s1 > frame.width()) throw ValidationError("rpn.s1 exceeds the frame width");
  if (s2 > frame.height()) throw ValidationError("rpn.s2 exceeds the frame height");

  ScaledImage img;
  img.s1 = s1;
  img.s2 = s2;
  img.cols = frame.width() / s1;
  img.rows = frame.height() / s2;
  img.values.assign(std::size_t(img.cols) * img.rows, 0);
  // Trailing columns/rows beyond cols*s1 and rows*s2 are dropped.
  for (int y = 0; y < img.rows * s2; ++y) {
    const int j = y / s2;
    for (int x = 0; x < img.cols * s1; ++x) {
      if (frame.get(x, y)) ++img.values[std::size_t(j) * img.cols + x / s1];
    }
  }
  if (counters) counters->arithmetic += std::uint64_t(img.rows * s2) * std::uint64_t(img.cols * s1);
  return img;
}

Histograms histograms(const ScaledImage& img, StageCounters* counters) {
  Histograms h;
  h.hx.assign(img.cols, 0);
  h.hy.assign(img.rows, 0);
  for (int j = 0; j < img.rows; ++j) {
    for (int i = 0; i < img.cols; ++i) {
      const auto v = img.at(i, j);
      h.hx[i] += v;
      h.hy[j] += v;
    }
  }
  if (counters) counters->arithmetic += 2 * std::uint64_t(img.cols) * std::uint64_t(img.rows);
  return h;
}

std::vector<Run> find_runs(std::span<const std::uint32_t> hist, std::uint32_t threshold) {
  std::vector<Run> runs;
  int start = -1;
  for (int i = 0; i < static_cast<int>(hist.size()); ++i) {
    if (hist[i] > threshold) {
      if (start < 0) start = i;
    } else if (start >= 0) {
      runs.push_back({start, i - 1});
      start = -1;
    }
  }
  if (start >= 0) runs.push_back({start, static_cast<int>(hist.size()) - 1});
  return runs;
}

std::vector<RegionProposal> propose(const BinaryFrame& frame, const RpnParams& params,
                                    StageCounters* counters) {
  params.validate();
  const auto img = downsample(frame, params.s1, params.s2, counters);
  const auto hist = histograms(img, counters);
  const auto xruns = find_runs(hist.hx, params.threshold);
  const auto yruns = find_runs(hist.hy, params.threshold);
  if (counters) counters->comparisons += hist.hx.size() + hist.hy.size();

  std::vector<RegionProposal> candidates;
  for (const auto& xr : xruns) {
    for (const auto& yr : yruns) {
      BoundingBox box{xr.start * params.s1, yr.start * params.s2,
                      (xr.end - xr.start + 1) * params.s1, (yr.end - yr.start + 1) * params.s2};
      box = clip(box, SensorConfig{frame.width(), frame.height()});
      std::uint32_t n = 0;
      for (int y = box.y; y < box.top(); ++y) {
        for (int x = box.x; x < box.right(); ++x) n += frame.get(x, y) ? 1 : 0;
      }
      if (counters) counters->comparisons += std::uint64_t(box.area());
      if (n >= params.min_pixels && n > 0) candidates.push_back({box, n});
    }
  }

  if (candidates.size() > params.max_proposals) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return candidates[a].pixel_count > candidates[b].pixel_count;
    });
    order.resize(params.max_proposals);
    std::sort(order.begin(), order.end());
    std::vector<RegionProposal> kept;
    kept.reserve(order.size());
    for (auto i : order) kept.push_back(candidates[i]);
    candidates = std::move(kept);
  }
  return candidates;
}

void write_proposals_csv(std::ostream& out, std::uint64_t frame,
                         std::span<const RegionProposal> proposals) {
  for (const auto& p : proposals) {
    out << frame << ',' << p.box.x << ',' << p.box.y << ',' << p.box.w << ',' << p.box.h << ','
        << p.pixel_count << '\n';
  }
}

}  // namespace ebbiot
