#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ebbiot/ebbi_frame.hpp"
#include "ebbiot/event_io.hpp"
#include "ebbiot/kalman_tracker.hpp"
#include "ebbiot/mean_shift_tracker.hpp"
#include "ebbiot/overlap_tracker.hpp"
#include "ebbiot/region_proposal.hpp"
#include "ebbiot/resource_model.hpp"

namespace ebbiot {

/// Algorithm parameters shared by all three pipelines.
struct PipelineParams {
  SensorConfig sensor;
  FilterParams filter;
  RpnParams rpn;
  OtParams ot;
  KfParams kf;
  EbmsParams ebms;
  RoeMask roe;

  void validate() const;
};

struct RunOptions {
  bool instrument = false;
  bool keep_frames = false;  // retain per-frame images for rendering
  // Process at least this many frame periods, even past the last event.
  std::uint64_t min_frames = 0;
};

/// Per-frame state kept for debug rendering.
struct FrameRecord {
  std::uint64_t index = 0;
  FramePair frames;                       // empty for the event-driven path
  std::vector<RegionProposal> proposals;  // empty for the event-driven path
  std::vector<TrackOutput> tracks;
};

struct PipelineResult {
  PipelineKind kind = PipelineKind::Ebbiot;
  BoxTable tracks;
  std::uint64_t frames = 0;
  int occlusion_events = 0;  // overlap tracker only
  int fragment_merges = 0;   // overlap tracker only
  PipelineMeasurement measurement;  // filled when instrumented
  std::vector<FrameRecord> records;
};

/// Runs one pipeline over a time-ordered stream.
///
/// ebbiot:  accumulate -> median -> ROE -> proposals -> overlap tracker
/// ebbi-kf: accumulate -> median -> ROE -> proposals -> Kalman tracker
/// ebms:    NN filter over the whole stream -> per-frame mean-shift steps
PipelineResult run_pipeline(PipelineKind kind, std::span<const Event> events,
                            const PipelineParams& params, const RunOptions& options = {});

}  // namespace ebbiot
