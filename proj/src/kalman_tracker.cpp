#include "ebbiot/kalman_tracker.hpp"

#include <algorithm>

namespace ebbiot {

void KfParams::validate() const {
  if (process_noise < 0) throw ValidationError("kf.process_noise must be >= 0");
  if (measurement_noise <= 0) throw ValidationError("kf.measurement_noise must be > 0");
  if (initial_velocity_variance <= 0) throw ValidationError("kf.initial_velocity_variance must be > 0");
  if (overlap_fraction < 0 || overlap_fraction > 1) throw ValidationError("kf.overlap_fraction must lie in [0,1]");
  if (max_unmatched < 1) throw ValidationError("kf.max_unmatched must be >= 1");
  if (max_tracks < 1) throw ValidationError("kf.max_tracks must be >= 1");
  if (lock_in < 1) throw ValidationError("kf.lock_in must be >= 1");
}

namespace {

Eigen::Matrix4d transition() {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

Eigen::Matrix4d process_covariance(double q) {
  // Piecewise-constant acceleration, dt = 1 frame.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = m(1, 1) = 0.25;
  m(0, 2) = m(2, 0) = m(1, 3) = m(3, 1) = 0.5;
  m(2, 2) = m(3, 3) = 1.0;
  return q * m;
}

}  // namespace

void kf_predict(KfTrack& track, double q) {
  static const Eigen::Matrix4d f = transition();
  track.state = f * track.state;
  track.covariance = f * track.covariance * f.transpose() + process_covariance(q);
}

void kf_update(KfTrack& track, const Eigen::Vector2d& z, double r) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix4d& p = track.covariance;
  const Eigen::Matrix2d s = h * p * h.transpose() + r * Eigen::Matrix2d::Identity();
  const Eigen::Matrix<double, 4, 2> k = p * h.transpose() * s.inverse();
  track.state += k * (z - h * track.state);
  Eigen::Matrix4d updated = (Eigen::Matrix4d::Identity() - k * h) * p;
  updated = 0.5 * (updated + updated.transpose());
  if (Eigen::LLT<Eigen::Matrix4d>(updated).info() != Eigen::Success) {
    throw NumericalError("Kalman covariance lost positive definiteness");
  }
  track.covariance = updated;
}

RealBox kf_box(const KfTrack& track) {
  return {track.state(0) - 0.5 * track.box_w, track.state(1) - 0.5 * track.box_h, track.box_w,
          track.box_h};
}

KalmanTracker::KalmanTracker(const SensorConfig& cfg, const KfParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  params_.validate();
}

std::vector<TrackOutput> KalmanTracker::step(std::span<const RegionProposal> proposals) {
  for (auto& t : tracks_) {
    kf_predict(t, params_.process_noise);
    // F x is 4 adds; F P F^T + Q on 4x4 is roughly 2*64 multiply-adds.
    if (counters_) counters_->arithmetic += 4 + 2 * 2 * 64 + 16;
  }

  // Greedy association in ascending track id: each track takes the
  // still-free proposal with the largest overlap that passes the matcher.
  std::vector<bool> used(proposals.size(), false);
  std::vector<int> match(tracks_.size(), -1);
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const RealBox predicted = kf_box(tracks_[i]);
    double best = 0;
    for (std::size_t j = 0; j < proposals.size(); ++j) {
      if (used[j]) continue;
      const RealBox pb = RealBox::from(proposals[j].box);
      if (counters_) counters_->arithmetic += 12;
      if (!overlap_match(predicted, pb, params_.overlap_fraction)) continue;
      const double a = intersection_area(predicted, pb);
      if (a > best) {
        best = a;
        match[i] = static_cast<int>(j);
      }
    }
    if (match[i] >= 0) used[match[i]] = true;
  }

  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    auto& t = tracks_[i];
    ++t.age_frames;
    if (match[i] < 0) {
      ++t.unmatched_frames;
      continue;
    }
    const auto& box = proposals[match[i]].box;
    const RealBox rb = RealBox::from(box);
    kf_update(t, Eigen::Vector2d(rb.cx(), rb.cy()), params_.measurement_noise);
    // S, K, state and covariance updates for a 2x4 measurement model.
    if (counters_) counters_->arithmetic += 2 * 32 + 2 * 32 + 8 + 16 + 2 * 64;
    t.box_w = rb.w;
    t.box_h = rb.h;
    t.unmatched_frames = 0;
  }

  tracks_.erase(std::remove_if(tracks_.begin(), tracks_.end(),
                               [&](const KfTrack& t) {
                                 return t.unmatched_frames > params_.max_unmatched ||
                                        clip(kf_box(t), cfg_).area() < 1.0;
                               }),
                tracks_.end());

  for (std::size_t j = 0; j < proposals.size(); ++j) {
    if (used[j] || tracks_.size() >= params_.max_tracks) continue;
    const RealBox rb = RealBox::from(proposals[j].box);
    KfTrack t;
    t.id = next_id_++;
    t.state << rb.cx(), rb.cy(), 0.0, 0.0;
    t.covariance = Eigen::Matrix4d::Zero();
    t.covariance(0, 0) = t.covariance(1, 1) = params_.measurement_noise;
    t.covariance(2, 2) = t.covariance(3, 3) = params_.initial_velocity_variance;
    t.box_w = rb.w;
    t.box_h = rb.h;
    t.age_frames = 1;
    tracks_.push_back(t);
  }

  std::vector<TrackOutput> out;
  for (const auto& t : tracks_) {
    if (t.age_frames < params_.lock_in) continue;
    const auto box = clip(clip(kf_box(t), cfg_).rounded(), cfg_);
    if (box.empty()) continue;
    out.push_back({t.id, box, false});
  }
  return out;
}

}  // namespace ebbiot
