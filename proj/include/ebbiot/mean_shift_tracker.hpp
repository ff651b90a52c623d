#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ebbiot/counters.hpp"
#include "ebbiot/overlap_tracker.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

struct CenterSample {
  std::uint64_t t = 0;
  double x = 0;
  double y = 0;
};

struct EbmsCluster {
  int id = 0;
  double x = 0;
  double y = 0;
  std::uint64_t event_count = 0;
  std::uint64_t last_event_t = 0;
  std::deque<CenterSample> history;  // at most EbmsParams::history entries
  Velocity velocity;                 // px/frame
  bool visible = false;
  bool touched = false;              // absorbed an event in the current frame
};

struct EbmsParams {
  double radius = 30.0;
  double learning_rate = 0.2;
  std::uint64_t seed_count = 10;
  std::uint64_t timeout_us = 100000;
  double merge_distance = 20.0;
  int box_width = 30;
  int box_height = 30;
  std::size_t max_clusters = 8;
  std::size_t history = 10;

  void validate() const;
};

/// Least-squares slope of x(t), y(t) over the samples, in px/us. Zero for
/// fewer than two distinct timestamps.
Velocity fit_velocity(const std::deque<CenterSample>& samples);

/// Event-driven mean-shift cluster tracker.
class MeanShiftTracker {
 public:
  MeanShiftTracker(const SensorConfig& cfg, const EbmsParams& params);

  /// Consumes one readout period of time-ordered events. `frame_end_us` is
  /// the end of the period, used for idle timeouts and history stamps.
  std::vector<TrackOutput> step(std::span<const Event> events, std::uint64_t frame_end_us);

  std::span<const EbmsCluster> clusters() const { return clusters_; }
  std::uint64_t merges() const { return merges_; }
  void set_counters(StageCounters* counters) { counters_ = counters; }

 private:
  void absorb(const Event& e);
  void merge_close_clusters();

  SensorConfig cfg_;
  EbmsParams params_;
  std::vector<EbmsCluster> clusters_;
  int next_id_ = 1;
  std::uint64_t merges_ = 0;
  StageCounters* counters_ = nullptr;
};

}  // namespace ebbiot
