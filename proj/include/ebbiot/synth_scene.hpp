#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ebbiot/event_io.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

/// Velocity in 1/256 pixel per frame, so trajectories are exact integer
/// arithmetic and identical on every platform.
struct SubpixelVelocity {
  std::int32_t x_q8 = 0;
  std::int32_t y_q8 = 0;

  static SubpixelVelocity from_pixels(double vx, double vy);
  double vx() const { return x_q8 / 256.0; }
  double vy() const { return y_q8 / 256.0; }
};

/// Column span of the object (relative to its left edge) whose boundary
/// fires at a reduced rate, e.g. the flat side of a bus.
struct EdgeGap {
  int begin = 0;
  int end = 0;
  double density = 0;
};

struct SceneObject {
  BoundingBox initial;
  SubpixelVelocity velocity;
  std::uint64_t entry_frame = 0;
  double edge_density = 1.0;
  double interior_density = 0.0;
  int edge_thickness = 1;
  std::optional<EdgeGap> gap;

  /// Unclipped box `frame` periods after entry.
  BoundingBox box_at(std::uint64_t frame) const;
};

struct SceneSpec {
  std::string name = "custom";
  SensorConfig cfg;
  std::uint64_t duration_frames = 0;
  std::vector<SceneObject> objects;
  double noise_rate = 0;  // expected spurious events per pixel per frame
  std::uint64_t rng_seed = 1;
  // Presets scaled from a longer recording note where they came from.
  double source_duration_s = 0;
  double source_events = 0;
  double time_scale = 1.0;

  void validate() const;
  double duration_s() const { return double(duration_frames) * double(cfg.frame_us) * 1e-6; }
};

struct Scene {
  std::vector<Event> events;
  BoxTable ground_truth;
};

/// Deterministic event source.
///
/// All randomness comes from one std::mt19937_64 seeded with rng_seed. Only
/// raw 64-bit outputs are consumed: uniform reals are (u >> 11) * 2^-53 and
/// bounded integers use rejection against 2^64 mod n. Per frame, objects are
/// sampled in list order and each visible pixel of an object (row-major) fires
/// with the band or interior probability; noise pixels are then visited by
/// geometric skipping over the row-major pixel index. Each event draws its
/// timestamp uniformly inside the frame period, and the frame's events are
/// sorted by (t, y, x, p).
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

Scene generate(const SceneSpec& spec);

/// Named scenes: "eng-like", "lt4-like", "crossing", "fragmenting-bus".
SceneSpec preset(std::string_view name);
const std::vector<std::string>& preset_names();

}  // namespace ebbiot
