#include "ebbiot/ebbi_frame.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace ebbiot {

std::size_t BinaryFrame::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RoeMask RoeMask::clipped(const SensorConfig& cfg) const {
  RoeMask out;
  for (const auto& r : regions) {
    const auto c = clip(r, cfg);
    if (!c.empty()) out.regions.push_back(c);
  }
  return out;
}

BinaryFrame accumulate(std::span<const Event> events, const SensorConfig& cfg,
                       StageCounters* counters) {
  BinaryFrame frame(cfg);
  for (const auto& e : events) frame.set(e.x, e.y);
  // The whole array is read out once per period, one write per pixel.
  if (counters) counters->writes += cfg.pixel_count();
  return frame;
}

BinaryFrame median_filter(const BinaryFrame& frame, const FilterParams& params,
                          StageCounters* counters) {
  params.validate();
  const int w = frame.width();
  const int h = frame.height();
  const int r = params.patch / 2;
  const int majority = params.majority();

  // Summed-area table with a one-cell zero border: sat[(y+1)*(w+1) + (x+1)]
  // holds the number of set bits in [0,x]x[0,y].
  const std::size_t sw = std::size_t(w) + 1;
  std::vector<std::uint32_t> sat(sw * (std::size_t(h) + 1), 0);
  for (int y = 0; y < h; ++y) {
    std::uint32_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += frame.get(x, y) ? 1u : 0u;
      sat[(y + 1) * sw + (x + 1)] = sat[y * sw + (x + 1)] + row;
    }
  }
  const auto rect = [&](int x0, int y0, int x1, int y1) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, w - 1);
    y1 = std::min(y1, h - 1);
    return sat[(y1 + 1) * sw + (x1 + 1)] - sat[y0 * sw + (x1 + 1)] - sat[(y1 + 1) * sw + x0] +
           sat[y0 * sw + x0];
  };

  BinaryFrame out(w, h);
  std::uint64_t increments = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto n = rect(x - r, y - r, x + r, y + r);
      increments += n;
      if (static_cast<int>(n) > majority) out.set(x, y);
    }
  }
  if (counters) {
    counters->increments += increments;
    counters->comparisons += std::uint64_t(w) * std::uint64_t(h);
  }
  return out;
}

BinaryFrame apply_roe(const BinaryFrame& frame, const RoeMask& mask) {
  BinaryFrame out = frame;
  for (const auto& region : mask.regions) {
    const int x0 = std::max(region.x, 0);
    const int y0 = std::max(region.y, 0);
    const int x1 = std::min(region.right(), frame.width());
    const int y1 = std::min(region.top(), frame.height());
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) out.set(x, y, false);
    }
  }
  return out;
}

std::vector<Event> nn_filter(std::span<const Event> stream, const FilterParams& params,
                             const SensorConfig& cfg, StageCounters* counters) {
  params.validate();
  constexpr auto kNever = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> last(cfg.pixel_count(), kNever);
  const int r = params.patch / 2;
  std::vector<Event> passed;

  for (const auto& e : stream) {
    bool supported = false;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = e.x + dx;
        const int ny = e.y + dy;
        if (!cfg.contains(nx, ny)) continue;
        const auto stamp = last[std::size_t(ny) * cfg.width + nx];
        if (counters) ++counters->comparisons;
        if (stamp != kNever && stamp <= e.t && e.t - stamp <= params.nn_window_us) {
          supported = true;
          if (counters) ++counters->increments;
        }
      }
    }
    last[std::size_t(e.y) * cfg.width + e.x] = e.t;
    if (counters) counters->writes += std::uint64_t(cfg.timestamp_bits);
    if (supported) passed.push_back(e);
  }
  return passed;
}

}  // namespace ebbiot
