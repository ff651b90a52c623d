#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebbiot/counters.hpp"
#include "ebbiot/region_proposal.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

enum class SlotStatus { Free, Active, Occluded };

struct Velocity {
  double vx = 0;
  double vy = 0;
};

/// One tracker slot. `box` is kept sub-pixel; emitted boxes are rounded.
struct TrackerState {
  int id = 0;
  RealBox box;
  Velocity velocity;
  SlotStatus status = SlotStatus::Free;
  int unmatched_frames = 0;
  int age_frames = 0;
};

struct OtParams {
  std::size_t max_trackers = 8;
  double overlap_fraction = 0.2;
  double proposal_weight = 0.75;
  double velocity_smoothing = 0.5;
  int occlusion_lookahead = 2;
  int max_unmatched = 3;
  int max_unmatched_occluded = 5;
  double growth_limit = 0.5;  // fragment unions may grow at most (1+g)x per frame
  // Trackers moving at nearly the same velocity are fragments of one object,
  // never an occluding pair.
  double min_relative_speed = 0.5;
  int lock_in = 2;

  void validate() const;
};

/// Box as a tracker emits it for one frame.
struct TrackOutput {
  int track_id = 0;
  BoundingBox box;
  bool occluded = false;
};

/// Which step-5 branch a multi-tracker match took in the last step.
struct StepDiagnostics {
  int occlusion_events = 0;
  int fragment_merges = 0;
  int seeded = 0;
  int freed = 0;
};

/// Box translated by the tracker velocity and clipped to the sensor.
RealBox predict(const TrackerState& t, const SensorConfig& cfg);

/// True when the intersection exceeds frac times the smaller of the two areas.
bool overlap_match(const RealBox& a, const RealBox& b, double frac);
bool overlap_match(const BoundingBox& a, const BoundingBox& b, double frac);

/// Overlap-based multi-object tracker with a fixed pool of slots.
///
/// Each frame: predict every live slot, relate predictions to proposals by
/// overlap, seed free slots from unmatched proposals, fold fragment
/// proposals into their tracker, and resolve one-proposal/many-tracker
/// matches as either occlusion (coast on prediction) or fragmentation
/// (merge into the oldest tracker). Processing order is ascending slot id
/// and ascending proposal index, so the result is deterministic.
class OverlapTracker {
 public:
  OverlapTracker(const SensorConfig& cfg, const OtParams& params);

  std::vector<TrackOutput> step(std::span<const RegionProposal> proposals);

  std::span<const TrackerState> slots() const { return slots_; }
  std::size_t live_count() const;
  const StepDiagnostics& last_step() const { return diag_; }

  void set_counters(StageCounters* counters) { counters_ = counters; }

 private:
  void seed(TrackerState& slot, const BoundingBox& box);
  void correct(TrackerState& slot, const RealBox& predicted, std::span<const BoundingBox> boxes);
  void coast(TrackerState& slot, const RealBox& predicted);
  void free_slot(TrackerState& slot);
  bool is_occlusion(std::span<const std::size_t> slot_indices,
                    std::span<const RealBox> predicted) const;
  void count(std::uint64_t ops) const {
    if (counters_) counters_->arithmetic += ops;
  }

  SensorConfig cfg_;
  OtParams params_;
  std::vector<TrackerState> slots_;
  int next_id_ = 1;
  StepDiagnostics diag_;
  StageCounters* counters_ = nullptr;
};

}  // namespace ebbiot
