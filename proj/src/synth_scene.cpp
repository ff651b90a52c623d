#include "ebbiot/synth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace ebbiot {
namespace {

// Nearest integer of n/256, halves rounded up, for either sign of n.
std::int64_t round_q8(std::int64_t n) {
  const std::int64_t shifted = n + 128;
  return shifted >= 0 ? shifted / 256 : -((-shifted + 255) / 256);
}

void check_density(double d, const std::string& what) {
  if (!(d >= 0.0 && d <= 1.0)) throw ValidationError(what + " must lie in [0,1]");
}

}  // namespace

SubpixelVelocity SubpixelVelocity::from_pixels(double vx, double vy) {
  return {static_cast<std::int32_t>(std::lround(vx * 256.0)),
          static_cast<std::int32_t>(std::lround(vy * 256.0))};
}

BoundingBox SceneObject::box_at(std::uint64_t frame) const {
  const auto k = static_cast<std::int64_t>(frame) - static_cast<std::int64_t>(entry_frame);
  BoundingBox b = initial;
  b.x += static_cast<int>(round_q8(k * velocity.x_q8));
  b.y += static_cast<int>(round_q8(k * velocity.y_q8));
  return b;
}

std::uint64_t SceneRng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const auto r = next();
    if (r >= threshold) return r % n;
  }
}

void SceneSpec::validate() const {
  cfg.validate();
  check_density(noise_rate, "noise_rate");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const auto tag = "object " + std::to_string(i);
    if (o.initial.w < 1 || o.initial.h < 1) throw ValidationError(tag + ": box must be at least 1x1");
    if (clip(o.initial, cfg).empty()) {
      throw ValidationError(tag + ": initial box lies outside the sensor");
    }
    check_density(o.edge_density, tag + " edge density");
    check_density(o.interior_density, tag + " interior density");
    if (o.edge_density < o.interior_density) {
      throw ValidationError(tag + ": edge density must be >= interior density");
    }
    if (o.edge_thickness < 1) throw ValidationError(tag + ": edge thickness must be >= 1");
    if (o.gap) check_density(o.gap->density, tag + " gap density");
  }
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  const auto& cfg = spec.cfg;
  SceneRng rng(spec.rng_seed);
  Scene scene;
  std::vector<bool> gone(spec.objects.size(), false);
  std::vector<Event> frame_events;

  for (std::uint64_t k = 0; k < spec.duration_frames; ++k) {
    frame_events.clear();
    const std::uint64_t t0 = k * cfg.frame_us;
    const auto emit = [&](int x, int y, std::int8_t p) {
      frame_events.push_back({t0 + rng.below(cfg.frame_us), static_cast<std::uint16_t>(x),
                              static_cast<std::uint16_t>(y), p});
    };

    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      const auto& o = spec.objects[i];
      if (k < o.entry_frame || gone[i]) continue;
      const BoundingBox full = o.box_at(k);
      const BoundingBox vis = clip(full, cfg);
      if (vis.empty()) {
        gone[i] = true;
        continue;
      }
      scene.ground_truth[k].push_back({static_cast<int>(i) + 1, vis});

      const double cx = full.x + 0.5 * full.w;
      const double cy = full.y + 0.5 * full.h;
      const double vx = o.velocity.vx();
      const double vy = o.velocity.vy();
      for (int y = vis.y; y < vis.top(); ++y) {
        for (int x = vis.x; x < vis.right(); ++x) {
          const int rx = x - full.x;
          const int ry = y - full.y;
          const int border = std::min({rx, ry, full.w - 1 - rx, full.h - 1 - ry});
          double density = o.interior_density;
          if (border < o.edge_thickness) {
            density = o.edge_density;
            if (o.gap && rx >= o.gap->begin && rx < o.gap->end) density = o.gap->density;
          }
          if (density <= 0.0) continue;
          if (density < 1.0 && rng.uniform01() >= density) continue;
          const double lead = (x + 0.5 - cx) * vx + (y + 0.5 - cy) * vy;
          emit(x, y, lead >= 0 ? std::int8_t{1} : std::int8_t{-1});
        }
      }
    }

    if (spec.noise_rate > 0) {
      const auto npix = static_cast<std::int64_t>(cfg.pixel_count());
      if (spec.noise_rate >= 1.0) {
        for (std::int64_t idx = 0; idx < npix; ++idx) {
          emit(static_cast<int>(idx % cfg.width), static_cast<int>(idx / cfg.width),
               rng.below(2) ? std::int8_t{1} : std::int8_t{-1});
        }
      } else {
        const double log_q = std::log1p(-spec.noise_rate);
        std::int64_t idx = -1;
        while (true) {
          const double u = 1.0 - rng.uniform01();  // (0, 1]
          idx += 1 + static_cast<std::int64_t>(std::floor(std::log(u) / log_q));
          if (idx >= npix) break;
          emit(static_cast<int>(idx % cfg.width), static_cast<int>(idx / cfg.width),
               rng.below(2) ? std::int8_t{1} : std::int8_t{-1});
        }
      }
    }

    std::sort(frame_events.begin(), frame_events.end(), [](const Event& a, const Event& b) {
      return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
    });
    scene.events.insert(scene.events.end(), frame_events.begin(), frame_events.end());
  }
  return scene;
}

namespace {

SceneObject vehicle(int x, int y, int w, int h, double vx, std::uint64_t entry, double edge,
                    double interior, int thickness) {
  SceneObject o;
  o.initial = {x, y, w, h};
  o.velocity = SubpixelVelocity::from_pixels(vx, 0.0);
  o.entry_frame = entry;
  o.edge_density = edge;
  o.interior_density = interior;
  o.edge_thickness = thickness;
  return o;
}

// Frames covering `seconds` of a recording shrunk by `scale`.
std::uint64_t scaled_frames(double seconds, double scale, const SensorConfig& cfg) {
  return static_cast<std::uint64_t>(std::llround(seconds * scale * 1e6 / double(cfg.frame_us)));
}

// Long recording through a 12 mm lens: large vehicles in two lanes each way,
// object sizes spanning an order of magnitude, speeds 0.5 to 6 px/frame.
// 2998.4 s / 107.5M events, shrunk 100x in time to ~30 s and ~1.07M events.
SceneSpec eng_like() {
  SceneSpec s;
  s.name = "eng-like";
  s.source_duration_s = 2998.4;
  s.source_events = 107.5e6;
  s.time_scale = 0.01;
  s.duration_frames = scaled_frames(s.source_duration_s, s.time_scale, s.cfg);
  s.rng_seed = 2998;
  s.noise_rate = 0.02;
  const int W = s.cfg.width;
  // Rightbound lanes enter on the left edge, leftbound lanes on the right.
  s.objects = {
      vehicle(0, 120, 44, 22, 3.0, 0, 0.9, 0.3, 2),       // car
      vehicle(W - 60, 40, 60, 30, -2.0, 10, 0.9, 0.3, 2), // van
      vehicle(0, 112, 12, 16, 4.5, 60, 0.9, 0.4, 2),      // bike
      vehicle(0, 150, 6, 16, 0.5, 80, 0.9, 0.5, 2),       // pedestrian
      vehicle(W - 110, 30, 110, 40, -1.5, 110, 0.9, 0.2, 3),  // bus
      vehicle(0, 118, 48, 24, 5.5, 170, 0.9, 0.3, 2),     // car, fast
      vehicle(W - 80, 44, 80, 34, -2.5, 230, 0.9, 0.25, 3),   // truck
      vehicle(0, 122, 40, 20, 2.0, 290, 0.9, 0.3, 2),     // car
      vehicle(W - 44, 48, 44, 22, -6.0, 330, 0.9, 0.3, 2),    // car, fast
      vehicle(0, 110, 56, 28, 1.0, 360, 0.9, 0.3, 2),     // van, slow
      vehicle(W - 12, 60, 12, 16, -3.5, 400, 0.9, 0.4, 2),    // bike
  };
  return s;
}

// Shorter recording through a 6 mm lens: the same traffic appears smaller.
// 999.5 s / 12.5M events, shrunk 100x to ~10 s and ~125k events.
SceneSpec lt4_like() {
  SceneSpec s;
  s.name = "lt4-like";
  s.source_duration_s = 999.5;
  s.source_events = 12.5e6;
  s.time_scale = 0.01;
  s.duration_frames = scaled_frames(s.source_duration_s, s.time_scale, s.cfg);
  s.rng_seed = 999;
  s.noise_rate = 0.01;
  const int W = s.cfg.width;
  s.objects = {
      vehicle(0, 100, 22, 12, 2.5, 0, 0.9, 0.3, 2),      // car
      vehicle(W - 30, 60, 30, 16, -2.0, 15, 0.9, 0.3, 2),  // van
      vehicle(0, 96, 8, 10, 3.5, 40, 0.9, 0.4, 2),       // bike
      vehicle(W - 56, 56, 56, 20, -1.5, 60, 0.9, 0.2, 2),  // bus
      vehicle(0, 104, 24, 12, 5.0, 100, 0.9, 0.3, 2),    // car, fast
  };
  return s;
}

// Two cars in overlapping lanes passing through each other mid-frame.
SceneSpec crossing() {
  SceneSpec s;
  s.name = "crossing";
  s.duration_frames = 60;
  s.rng_seed = 7;
  s.noise_rate = 0.002;
  s.objects = {
      vehicle(10, 80, 36, 18, 3.0, 0, 0.9, 0.25, 2),
      vehicle(194, 84, 36, 18, -3.0, 0, 0.9, 0.25, 2),
  };
  return s;
}

// A long vehicle with no interior events and a sparse stretch of boundary,
// which the histograms split into two blobs in about two frames of three.
SceneSpec fragmenting_bus() {
  SceneSpec s;
  s.name = "fragmenting-bus";
  s.duration_frames = 90;
  s.rng_seed = 11;
  s.noise_rate = 0.002;
  auto bus = vehicle(4, 70, 120, 36, 1.25, 0, 0.95, 0.0, 3);
  bus.gap = EdgeGap{48, 62, 0.3};
  s.objects = {bus};
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"eng-like", "lt4-like", "crossing",
                                              "fragmenting-bus"};
  return names;
}

SceneSpec preset(std::string_view name) {
  if (name == "eng-like") return eng_like();
  if (name == "lt4-like") return lt4_like();
  if (name == "crossing") return crossing();
  if (name == "fragmenting-bus") return fragmenting_bus();
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + std::string(name) + "' (available: " + list + ")");
}

}  // namespace ebbiot
