#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebbiot/event_io.hpp"
#include "ebbiot/types.hpp"

namespace ebbiot {

double iou(const BoundingBox& a, const BoundingBox& b);

struct FrameMatch {
  std::size_t true_positives = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt index, track index)
};

/// Greedy one-to-one matching in descending IoU; a pair counts only when its
/// IoU is strictly above the threshold. Ties are broken by box coordinates,
/// so the count does not depend on input order.
FrameMatch match_frame(std::span<const BoundingBox> gt, std::span<const BoundingBox> tracks,
                       double iou_threshold);

struct ThresholdMetrics {
  double threshold = 0;
  double precision = 1;
  double recall = 1;
  std::uint64_t true_positives = 0;
  std::uint64_t proposals = 0;
  std::uint64_t ground_truths = 0;
  bool precision_undefined = false;  // no proposals at all
  bool recall_undefined = false;     // no ground truth at all
};

struct EvalResult {
  std::vector<ThresholdMetrics> per_threshold;
  std::size_t gt_tracks = 0;  // distinct ground-truth ids, the recording weight
};

inline const std::vector<double>& default_iou_thresholds() {
  static const std::vector<double> t{0.3, 0.4, 0.5, 0.6, 0.7};
  return t;
}

/// Counts every frame present in either table. Frames before `first_frame`
/// are skipped (used to discount tracker lock-in).
EvalResult evaluate(const BoxTable& gt, const BoxTable& tracks, std::span<const double> thresholds,
                    std::uint64_t first_frame = 0);

std::size_t count_track_ids(const BoxTable& table);

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
};

/// Averages per-recording metrics with the given weights (ground-truth track
/// counts). Throws ValidationError when all weights are zero.
PrecisionRecall weighted_average(std::span<const PrecisionRecall> metrics,
                                 std::span<const double> weights);

}  // namespace ebbiot
