#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ebbiot/eval_metrics.hpp"
#include "ebbiot/pipeline.hpp"
#include "ebbiot/resource_model.hpp"
#include "ebbiot/run_config.hpp"

namespace ebbiot {

struct PipelineOutcome {
  PipelineKind kind = PipelineKind::Ebbiot;
  std::uint64_t frames = 0;
  std::size_t emitted_boxes = 0;
  std::size_t track_ids = 0;
  int occlusion_events = 0;
  int fragment_merges = 0;
  std::optional<EvalResult> eval;  // when ground truth is available
};

struct RunOutcome {
  std::string recording;
  std::uint64_t events = 0;
  std::vector<PipelineOutcome> pipelines;
  ResourceReport resources;
  std::vector<std::filesystem::path> files;  // relative to the output directory
};

/// Loaded input of a run: the stream, its ground truth if any, and the
/// number of frames the recording spans.
struct RunInput {
  std::string recording;
  std::vector<Event> events;
  std::optional<BoxTable> ground_truth;
  std::uint64_t frames = 0;
};

RunInput load_input(const RunConfig& cfg);

/// Executes every configured pipeline and writes into cfg.output_dir:
/// tracks_<pipeline>.csv, metrics.csv (with ground truth), resources.csv,
/// resources.txt, summary.json, manifest.cfg and, when requested,
/// frames/<pipeline>/ debug images.
RunOutcome execute_run(const RunConfig& cfg);

/// metrics.csv rows for one pipeline.
void write_metrics_rows(std::ostream& out, const std::string& pipeline,
                        const std::string& recording, const EvalResult& eval);
inline constexpr const char* kMetricsHeader =
    "pipeline,recording,iou_threshold,precision,recall,tp,proposals,ground_truths,"
    "precision_undefined,recall_undefined";

}  // namespace ebbiot
