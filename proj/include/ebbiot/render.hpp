#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ebbiot/ebbi_frame.hpp"
#include "ebbiot/overlap_tracker.hpp"
#include "ebbiot/pipeline.hpp"
#include "ebbiot/region_proposal.hpp"

namespace ebbiot {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBackground{0, 0, 0};
inline constexpr Rgb kSetPixel{255, 255, 255};
inline constexpr Rgb kExcluded{72, 72, 72};
inline constexpr Rgb kExcludedSet{160, 160, 160};
inline constexpr Rgb kProposalColor{0, 200, 0};
inline constexpr Rgb kTrackColor{230, 0, 0};

/// Row-major RGB raster, row 0 at the top (y = 0).
class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = kBackground)
      : width_(width), height_(height), pixels_(std::size_t(width) * std::size_t(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb at(int x, int y) const { return pixels_[std::size_t(y) * width_ + x]; }
  void set(int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < width_ && y < height_) pixels_[std::size_t(y) * width_ + x] = c;
  }
  /// One-pixel outline on the box's first and last rows and columns.
  void outline(const BoundingBox& box, Rgb c);
  std::span<const Rgb> pixels() const { return pixels_; }

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// Frame pixels in white, ROE shaded gray, proposals green, trackers red
/// on top. An empty frame renders as the background of the sensor size.
RgbImage render_frame(const BinaryFrame& frame, std::span<const RegionProposal> proposals,
                      std::span<const TrackOutput> tracks, const RoeMask& roe,
                      const SensorConfig& cfg);

void write_ppm(const std::filesystem::path& path, const RgbImage& img);
void write_pbm(const std::filesystem::path& path, const BinaryFrame& frame);

/// Writes frame_NNNNNN.ppm (annotated) and, for frame-based records,
/// frame_NNNNNN.pbm (the raw binary image) into `dir`. Returns the number of
/// files written.
std::size_t render_debug(std::span<const FrameRecord> records, const RoeMask& roe,
                         const SensorConfig& cfg, const std::filesystem::path& dir);

}  // namespace ebbiot
