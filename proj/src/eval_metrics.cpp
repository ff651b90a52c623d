#include "ebbiot/eval_metrics.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace ebbiot {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

FrameMatch match_frame(std::span<const BoundingBox> gt, std::span<const BoundingBox> tracks,
                       double iou_threshold) {
  struct Candidate {
    double iou;
    std::size_t g;
    std::size_t t;
  };
  std::vector<Candidate> cands;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      const double v = iou(gt[g], tracks[t]);
      if (v > iou_threshold) cands.push_back({v, g, t});
    }
  }
  const auto key = [](const BoundingBox& b) { return std::make_tuple(b.x, b.y, b.w, b.h); };
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (key(gt[a.g]) != key(gt[b.g])) return key(gt[a.g]) < key(gt[b.g]);
    return key(tracks[a.t]) < key(tracks[b.t]);
  });

  FrameMatch m;
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<bool> tr_used(tracks.size(), false);
  for (const auto& c : cands) {
    if (gt_used[c.g] || tr_used[c.t]) continue;
    gt_used[c.g] = tr_used[c.t] = true;
    m.pairs.emplace_back(c.g, c.t);
  }
  m.true_positives = m.pairs.size();
  return m;
}

std::size_t count_track_ids(const BoxTable& table) {
  std::set<int> ids;
  for (const auto& [frame, boxes] : table) {
    for (const auto& b : boxes) ids.insert(b.track_id);
  }
  return ids.size();
}

EvalResult evaluate(const BoxTable& gt, const BoxTable& tracks, std::span<const double> thresholds,
                    std::uint64_t first_frame) {
  std::set<std::uint64_t> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : tracks) frames.insert(f);

  EvalResult result;
  result.gt_tracks = count_track_ids(gt);
  for (const double th : thresholds) {
    ThresholdMetrics m;
    m.threshold = th;
    for (const auto f : frames) {
      if (f < first_frame) continue;
      std::vector<BoundingBox> g, t;
      if (auto it = gt.find(f); it != gt.end()) {
        for (const auto& b : it->second) g.push_back(b.box);
      }
      if (auto it = tracks.find(f); it != tracks.end()) {
        for (const auto& b : it->second) t.push_back(b.box);
      }
      m.true_positives += match_frame(g, t, th).true_positives;
      m.proposals += t.size();
      m.ground_truths += g.size();
    }
    m.precision_undefined = m.proposals == 0;
    m.recall_undefined = m.ground_truths == 0;
    m.precision = m.precision_undefined ? 1.0 : double(m.true_positives) / double(m.proposals);
    m.recall = m.recall_undefined ? 1.0 : double(m.true_positives) / double(m.ground_truths);
    result.per_threshold.push_back(m);
  }
  return result;
}

PrecisionRecall weighted_average(std::span<const PrecisionRecall> metrics,
                                 std::span<const double> weights) {
  if (metrics.empty()) throw ValidationError("weighted average needs at least one recording");
  if (metrics.size() != weights.size()) {
    throw ValidationError("weighted average needs one weight per recording");
  }
  double wsum = 0, p = 0, r = 0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (weights[i] < 0) throw ValidationError("weights must be non-negative");
    wsum += weights[i];
    p += weights[i] * metrics[i].precision;
    r += weights[i] * metrics[i].recall;
  }
  if (wsum <= 0) throw ValidationError("all recording weights are zero");
  return {p / wsum, r / wsum};
}

}  // namespace ebbiot
