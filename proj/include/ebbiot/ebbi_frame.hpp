#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebbiot/counters.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

/// Event-based binary image: one bit per pixel, set when the pixel fired at
/// least once during the readout period. Stored a byte per pixel, row-major.
class BinaryFrame {
 public:
  BinaryFrame() = default;
  BinaryFrame(int width, int height)
      : width_(width), height_(height), bits_(std::size_t(width) * std::size_t(height), 0) {}
  explicit BinaryFrame(const SensorConfig& cfg) : BinaryFrame(cfg.width, cfg.height) {}

  int width() const { return width_; }
  int height() const { return height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  // Zero outside the frame, which is the padding the median filter uses.
  bool get_padded(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
  }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const BinaryFrame&, const BinaryFrame&) = default;

 private:
  std::size_t index(int x, int y) const { return std::size_t(y) * std::size_t(width_) + std::size_t(x); }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// The raw readout and its noise-filtered copy; both are kept per frame.
struct FramePair {
  BinaryFrame raw;
  BinaryFrame filtered;
};

struct FilterParams {
  int patch = 3;                       // odd side p of the p x p neighbourhood
  std::uint64_t nn_window_us = 5000;   // temporal support for the NN filter

  int majority() const { return patch * patch / 2; }
  void validate() const {
    if (patch < 3 || patch % 2 == 0) throw ValidationError("filter.p must be odd and >= 3");
  }
};

struct RoeMask {
  std::vector<BoundingBox> regions;

  /// Clips every region to the sensor and drops the ones that vanish.
  RoeMask clipped(const SensorConfig& cfg) const;
};

BinaryFrame accumulate(std::span<const Event> events, const SensorConfig& cfg,
                       StageCounters* counters = nullptr);

/// Binary median over a p x p patch with zero padding: a pixel survives when
/// strictly more than floor(p^2/2) patch pixels are set.
BinaryFrame median_filter(const BinaryFrame& frame, const FilterParams& params,
                          StageCounters* counters = nullptr);

BinaryFrame apply_roe(const BinaryFrame& frame, const RoeMask& mask);

/// Nearest-neighbour event filter. An event passes when a pixel of its p x p
/// neighbourhood, excluding its own, fired within nn_window_us before it.
std::vector<Event> nn_filter(std::span<const Event> stream, const FilterParams& params,
                             const SensorConfig& cfg, StageCounters* counters = nullptr);

}  // namespace ebbiot
