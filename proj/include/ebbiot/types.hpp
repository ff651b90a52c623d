#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ebbiot {

// Error hierarchy. Everything the library throws derives from Error so the
// CLI can map failures onto exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class OrderingError : public Error {
 public:
  OrderingError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Sensor geometry and frame timing. Defaults describe a DAVIS240 read out
/// every 66 ms.
struct SensorConfig {
  int width = 240;
  int height = 180;
  std::uint64_t frame_us = 66000;
  int timestamp_bits = 16;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  void validate() const {
    if (width <= 0) throw ValidationError("sensor.width must be > 0");
    if (height <= 0) throw ValidationError("sensor.height must be > 0");
    if (frame_us == 0) throw ValidationError("sensor.frame_us must be > 0");
    if (timestamp_bits <= 0) throw ValidationError("sensor.timestamp_bits must be > 0");
  }
};

struct Event {
  std::uint64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;    // +1 ON, -1 OFF

  friend bool operator==(const Event&, const Event&) = default;
};

/// Integer pixel rectangle. (x, y) is the corner with the smallest
/// coordinates; the box spans columns [x, x+w) and rows [y, y+h).
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int top() const { return y + h; }
  long long area() const {
    return w > 0 && h > 0 ? static_cast<long long>(w) * h : 0;
  }
  bool empty() const { return w <= 0 || h <= 0; }
  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < top();
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline long long intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const long long w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const long long h = std::min(a.top(), b.top()) - std::max(a.y, b.y);
  return w > 0 && h > 0 ? w * h : 0;
}

inline BoundingBox bounding_union(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.top(), b.top()) - y0};
}

/// Intersection with the sensor rectangle; may come back empty.
inline BoundingBox clip(const BoundingBox& b, const SensorConfig& cfg) {
  const int x0 = std::clamp(b.x, 0, cfg.width);
  const int y0 = std::clamp(b.y, 0, cfg.height);
  const int x1 = std::clamp(b.right(), 0, cfg.width);
  const int y1 = std::clamp(b.top(), 0, cfg.height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

/// Sub-pixel rectangle used for tracker state. Emitted boxes are rounded.
struct RealBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double top() const { return y + h; }
  double area() const { return w > 0 && h > 0 ? w * h : 0.0; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  static RealBox from(const BoundingBox& b) {
    return {double(b.x), double(b.y), double(b.w), double(b.h)};
  }
  BoundingBox rounded() const {
    const int x0 = static_cast<int>(std::lround(x));
    const int y0 = static_cast<int>(std::lround(y));
    const int x1 = static_cast<int>(std::lround(right()));
    const int y1 = static_cast<int>(std::lround(top()));
    return {x0, y0, x1 - x0, y1 - y0};
  }
  friend bool operator==(const RealBox&, const RealBox&) = default;
};

inline double intersection_area(const RealBox& a, const RealBox& b) {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.top(), b.top()) - std::max(a.y, b.y);
  return w > 0 && h > 0 ? w * h : 0.0;
}

inline RealBox bounding_union(const RealBox& a, const RealBox& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.top(), b.top()) - y0};
}

inline RealBox clip(const RealBox& b, const SensorConfig& cfg) {
  const double x0 = std::clamp(b.x, 0.0, double(cfg.width));
  const double y0 = std::clamp(b.y, 0.0, double(cfg.height));
  const double x1 = std::clamp(b.right(), 0.0, double(cfg.width));
  const double y1 = std::clamp(b.top(), 0.0, double(cfg.height));
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

/// Box tagged with the identity of whatever produced it (GT object or track).
struct LabeledBox {
  int track_id = 0;
  BoundingBox box;
  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

}  // namespace ebbiot
