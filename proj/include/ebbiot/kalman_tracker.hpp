#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ebbiot/counters.hpp"
#include "ebbiot/overlap_tracker.hpp"
#include "ebbiot/region_proposal.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

/// Constant-velocity track. State is (cx, cy, vx, vy) in pixels and
/// pixels/frame; only the centroid is measured.
struct KfTrack {
  int id = 0;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  double box_w = 0;
  double box_h = 0;
  int unmatched_frames = 0;
  int age_frames = 0;
};

struct KfParams {
  double process_noise = 1.0;      // q, px^2/frame^2
  double measurement_noise = 4.0;  // r, px^2
  double initial_velocity_variance = 25.0;
  double overlap_fraction = 0.2;
  int max_unmatched = 3;
  std::size_t max_tracks = 8;
  int lock_in = 2;

  void validate() const;
};

/// x <- F x, P <- F P F^T + Q with the white-acceleration Q scaled by q.
void kf_predict(KfTrack& track, double q);

/// Standard measurement update with H = [I2 0] and R = r I2. Throws
/// NumericalError when the covariance cannot be made positive definite.
void kf_update(KfTrack& track, const Eigen::Vector2d& z, double r);

/// Box of the track's size centred on its current centroid estimate.
RealBox kf_box(const KfTrack& track);

/// Multi-object Kalman tracker over the same region proposals the overlap
/// tracker consumes, associated with the same overlap matcher.
class KalmanTracker {
 public:
  KalmanTracker(const SensorConfig& cfg, const KfParams& params);

  std::vector<TrackOutput> step(std::span<const RegionProposal> proposals);

  std::span<const KfTrack> tracks() const { return tracks_; }
  void set_counters(StageCounters* counters) { counters_ = counters; }

 private:
  SensorConfig cfg_;
  KfParams params_;
  std::vector<KfTrack> tracks_;
  int next_id_ = 1;
  StageCounters* counters_ = nullptr;
};

}  // namespace ebbiot
