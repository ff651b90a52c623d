#include "ebbiot/pipeline.hpp"

#include <optional>

namespace ebbiot {

void PipelineParams::validate() const {
  sensor.validate();
  filter.validate();
  rpn.validate();
  ot.validate();
  kf.validate();
  ebms.validate();
  for (const auto& r : roe.regions) {
    if (r.w <= 0 || r.h <= 0) throw ValidationError("roe: regions must have positive size");
  }
}

namespace {

std::vector<FrameSlice> frames_for(std::span<const Event> events, const SensorConfig& cfg,
                                   std::uint64_t min_frames) {
  auto slices = partition_frames(events, cfg);
  for (auto k = static_cast<std::uint64_t>(slices.size()); k < min_frames; ++k) {
    slices.push_back({k, {}});
  }
  return slices;
}

void store(PipelineResult& result, std::uint64_t frame, const std::vector<TrackOutput>& out) {
  if (out.empty()) return;
  auto& row = result.tracks[frame];
  for (const auto& t : out) row.push_back({t.track_id, t.box});
}

PipelineResult run_frame_based(PipelineKind kind, std::span<const Event> events,
                               const PipelineParams& params, const RunOptions& options) {
  const auto& cfg = params.sensor;
  const RoeMask roe = params.roe.clipped(cfg);
  StageCounters ebbi_c, rpn_c, track_c;
  const bool inst = options.instrument;

  std::optional<OverlapTracker> ot;
  std::optional<KalmanTracker> kf;
  if (kind == PipelineKind::Ebbiot) {
    ot.emplace(cfg, params.ot);
    if (inst) ot->set_counters(&track_c);
  } else {
    kf.emplace(cfg, params.kf);
    if (inst) kf->set_counters(&track_c);
  }

  PipelineResult result;
  result.kind = kind;
  RunStatistics stats;
  for (const auto& slice : frames_for(events, cfg, options.min_frames)) {
    FramePair fp;
    fp.raw = accumulate(slice.events, cfg, inst ? &ebbi_c : nullptr);
    fp.filtered = apply_roe(median_filter(fp.raw, params.filter, inst ? &ebbi_c : nullptr), roe);
    auto proposals = propose(fp.filtered, params.rpn, inst ? &rpn_c : nullptr);
    std::vector<TrackOutput> out;
    if (ot) {
      out = ot->step(proposals);
      result.occlusion_events += ot->last_step().occlusion_events;
      result.fragment_merges += ot->last_step().fragment_merges;
      stats.live_tracker_frames += ot->live_count();
    } else {
      out = kf->step(proposals);
      stats.live_tracker_frames += kf->tracks().size();
    }
    store(result, slice.index, out);

    ++stats.frames;
    stats.events += slice.events.size();
    stats.raw_set_bits += fp.raw.count();
    if (options.keep_frames) {
      result.records.push_back({slice.index, std::move(fp), std::move(proposals), std::move(out)});
    }
  }
  result.frames = stats.frames;
  if (inst) {
    result.measurement = {kind, stats,
                          {{"ebbi", ebbi_c},
                           {"rpn", rpn_c},
                           {kind == PipelineKind::Ebbiot ? "ot" : "kf", track_c}}};
  }
  return result;
}

PipelineResult run_event_based(std::span<const Event> events, const PipelineParams& params,
                               const RunOptions& options) {
  const auto& cfg = params.sensor;
  StageCounters nn_c, ebms_c;
  const bool inst = options.instrument;

  // Partition before filtering so the frame count follows the raw stream.
  const auto raw_slices = frames_for(events, cfg, options.min_frames);
  const auto filtered = nn_filter(events, params.filter, cfg, inst ? &nn_c : nullptr);
  MeanShiftTracker ms(cfg, params.ebms);
  if (inst) ms.set_counters(&ebms_c);

  PipelineResult result;
  result.kind = PipelineKind::Ebms;
  RunStatistics stats;
  std::size_t pos = 0;
  for (const auto& slice : raw_slices) {
    const std::uint64_t end = (slice.index + 1) * cfg.frame_us;
    const std::size_t begin = pos;
    while (pos < filtered.size() && filtered[pos].t < end) ++pos;
    const std::span<const Event> chunk(filtered.data() + begin, pos - begin);
    auto out = ms.step(chunk, end);
    store(result, slice.index, out);

    ++stats.frames;
    stats.events += slice.events.size();
    stats.filtered_events += chunk.size();
    stats.live_cluster_frames += ms.clusters().size();
    if (options.keep_frames) {
      FrameRecord rec;
      rec.index = slice.index;
      rec.tracks = std::move(out);
      result.records.push_back(std::move(rec));
    }
  }
  stats.cluster_merges = ms.merges();
  result.frames = stats.frames;
  if (inst) result.measurement = {PipelineKind::Ebms, stats, {{"nn-filt", nn_c}, {"ebms", ebms_c}}};
  return result;
}

}  // namespace

PipelineResult run_pipeline(PipelineKind kind, std::span<const Event> events,
                            const PipelineParams& params, const RunOptions& options) {
  params.validate();
  if (kind == PipelineKind::Ebms) return run_event_based(events, params, options);
  return run_frame_based(kind, events, params, options);
}

}  // namespace ebbiot
