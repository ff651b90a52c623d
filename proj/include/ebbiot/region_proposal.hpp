#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ebbiot/counters.hpp"
#include "ebbiot/ebbi_frame.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

/// Block-summed copy of a binary frame. Cell (i, j) holds the number of set
/// bits in columns [i*s1, (i+1)*s1) and rows [j*s2, (j+1)*s2).
struct ScaledImage {
  int cols = 0;
  int rows = 0;
  int s1 = 1;
  int s2 = 1;
  std::vector<std::uint16_t> values;  // row-major, rows x cols

  std::uint16_t at(int i, int j) const { return values[std::size_t(j) * cols + i]; }
};

struct Histograms {
  std::vector<std::uint32_t> hx;  // per scaled column
  std::vector<std::uint32_t> hy;  // per scaled row
};

/// Inclusive index range.
struct Run {
  int start = 0;
  int end = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

struct RegionProposal {
  BoundingBox box;
  std::uint32_t pixel_count = 0;
};

struct RpnParams {
  int s1 = 6;
  int s2 = 3;
  std::uint32_t threshold = 1;     // a histogram bin must be strictly above this
  std::uint32_t min_pixels = 5;    // validity check against the filtered frame
  std::size_t max_proposals = 8;   // the tracker budget N_T

  void validate() const {
    if (s1 < 1 || s2 < 1) throw ValidationError("rpn.s1 and rpn.s2 must be >= 1");
    if (max_proposals < 1) throw ValidationError("rpn.max_proposals must be >= 1");
  }
};

ScaledImage downsample(const BinaryFrame& frame, int s1, int s2, StageCounters* counters = nullptr);

Histograms histograms(const ScaledImage& img, StageCounters* counters = nullptr);

/// Maximal runs of consecutive bins with value > threshold, ascending.
std::vector<Run> find_runs(std::span<const std::uint32_t> hist, std::uint32_t threshold);

/// Histogram-based proposals. Every X-run x Y-run pair is a candidate; the
/// ones with fewer than min_pixels set bits in the frame are rejected and at
/// most max_proposals survive, largest pixel_count first.
std::vector<RegionProposal> propose(const BinaryFrame& frame, const RpnParams& params,
                                    StageCounters* counters = nullptr);

inline constexpr std::string_view kProposalCsvHeader = "frame,x,y,w,h,pixel_count";

/// Debug rows for one frame, without the header.
void write_proposals_csv(std::ostream& out, std::uint64_t frame,
                         std::span<const RegionProposal> proposals);

}  // namespace ebbiot
