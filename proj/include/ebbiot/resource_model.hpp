#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebbiot/counters.hpp"

namespace ebbiot {

/// Inputs of the analytic compute/memory model. Defaults are the operating
/// point of a DAVIS240 traffic deployment: 10% active pixels firing twice
/// per frame on average, two live trackers, two EBMS clusters.
struct ResourceParams {
  int width = 240;
  int height = 180;
  int patch = 3;
  int timestamp_bits = 16;
  int s1 = 6;
  int s2 = 3;
  double alpha = 0.1;
  double beta = 2.0;
  double mean_trackers = 2.0;
  // Probabilities and costs of tracker steps 3, 4 and 5. Assumed values;
  // these are back-solved so that the step terms add up to 28 ops.
  std::array<double, 3> step_probability{0.1, 0.2, 0.1};
  std::array<double, 3> step_cost{40.0, 60.0, 120.0};
  int kf_state_size = 4;
  int kf_measurement_size = 4;
  double mean_filtered_events = 650.0;
  double mean_clusters = 2.0;
  double gamma_merge = 0.1;
  int max_clusters = 8;
  int max_trackers = 8;

  double mean_events() const { return beta * alpha * width * height; }
  void validate() const;
};

/// ops per frame and memory in bits.
struct Cost {
  double ops = 0;
  double memory_bits = 0;
};

inline double bits_to_kb(double bits) { return bits / 8.0 / 1000.0; }

Cost ebbi_cost(const ResourceParams& p);
Cost nn_filt_cost(const ResourceParams& p);

/// Downsampling plus histogram cost with the histogram term weighted 2.
Cost rpn_cost(const ResourceParams& p);
/// Same expression with the histogram term weighted 1, which is the reading
/// that yields 45.6 kop/frame.
double rpn_ops_unit_histogram(const ResourceParams& p);

Cost ot_cost(const ResourceParams& p);
Cost kf_cost(const ResourceParams& p);

/// EBMS memory is 408*CL_max + 56 units. `memory_bits` reads the unit as a
/// byte (3.32 kB at CL_max = 8); ebms_memory_units() returns the raw count.
Cost ebms_cost(const ResourceParams& p);
double ebms_memory_units(const ResourceParams& p);

// Fixed memory figures that are stated rather than derived.
inline constexpr double kOtMemoryBitsPerSlot = 128;  // box, velocity, id, status, counters
inline constexpr double kKfMemoryBits = 1.1 * 1000 * 8;

enum class PipelineKind { Ebbiot, EbbiKf, Ebms };

std::string to_string(PipelineKind kind);
PipelineKind parse_pipeline(const std::string& name);
const std::vector<PipelineKind>& all_pipelines();

/// Stage costs grouped per pipeline: the frame-based pipelines pay for EBBI,
/// proposals and their tracker, the event-based one for NN-filt and EBMS.
struct StageCost {
  std::string stage;
  Cost cost;
};
std::vector<StageCost> pipeline_stages(PipelineKind kind, const ResourceParams& p);
Cost pipeline_total(PipelineKind kind, const ResourceParams& p);

/// Measured quantities of an instrumented run.
struct RunStatistics {
  std::uint64_t frames = 0;
  std::uint64_t events = 0;
  std::uint64_t raw_set_bits = 0;
  std::uint64_t filtered_events = 0;   // NN-filt output
  std::uint64_t live_tracker_frames = 0;
  std::uint64_t live_cluster_frames = 0;
  std::uint64_t cluster_merges = 0;
};

struct MeasuredStage {
  std::string stage;
  StageCounters counters;
};

struct ReportRow {
  std::string pipeline;
  std::string stage;
  Cost analytic;           // under the configured parameters
  Cost analytic_measured;  // with alpha, beta, N_T, N_F, CL taken from the run
  double measured_ops = -1;  // negative when the stage was not instrumented
};

/// Counters and statistics of one instrumented pipeline run.
struct PipelineMeasurement {
  PipelineKind kind = PipelineKind::Ebbiot;
  RunStatistics stats;
  std::vector<MeasuredStage> stages;
};

struct ResourceReport {
  ResourceParams params;
  // Parameters re-estimated from each measured run, keyed by pipeline name.
  std::vector<std::pair<std::string, ResourceParams>> measured_params;
  bool has_measurements = false;
  std::vector<ReportRow> rows;
  double rpn_ops_unit_histogram = 0;
  double ebms_memory_units = 0;

  Cost total(PipelineKind kind) const;
};

/// Analytic-only report for the given parameters.
ResourceReport analytic_report(const ResourceParams& p);

/// Parameters re-estimated from a run: alpha from the raw set-bit fraction,
/// beta from events per set bit, and the tracker/cluster means per frame.
ResourceParams measured_parameters(const ResourceParams& base, const RunStatistics& stats);

/// Pairs each analytic figure with the per-frame counters of instrumented
/// runs. Stage names are "ebbi", "nn-filt", "rpn", "ot", "kf" and "ebms".
ResourceReport measure(const ResourceParams& base, std::span<const PipelineMeasurement> runs);

void write_report_csv(std::ostream& out, const ResourceReport& report);
void write_report_table(std::ostream& out, const ResourceReport& report);

}  // namespace ebbiot
