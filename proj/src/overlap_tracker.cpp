#include "ebbiot/overlap_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ebbiot {

void OtParams::validate() const {
  if (max_trackers < 1) throw ValidationError("ot.max_trackers must be >= 1");
  if (overlap_fraction < 0 || overlap_fraction > 1) {
    throw ValidationError("ot.overlap_fraction must lie in [0,1]");
  }
  if (proposal_weight < 0 || proposal_weight > 1) {
    throw ValidationError("ot.proposal_weight must lie in [0,1]");
  }
  if (velocity_smoothing < 0 || velocity_smoothing > 1) {
    throw ValidationError("ot.velocity_smoothing must lie in [0,1]");
  }
  if (occlusion_lookahead < 1) throw ValidationError("ot.occlusion_lookahead must be >= 1");
  if (max_unmatched < 1) throw ValidationError("ot.max_unmatched must be >= 1");
  if (max_unmatched_occluded < 1) throw ValidationError("ot.max_unmatched_occluded must be >= 1");
  if (growth_limit < 0) throw ValidationError("ot.growth_limit must be >= 0");
  if (min_relative_speed < 0) throw ValidationError("ot.min_relative_speed must be >= 0");
  if (lock_in < 1) throw ValidationError("ot.lock_in must be >= 1");
}

RealBox predict(const TrackerState& t, const SensorConfig& cfg) {
  RealBox b = t.box;
  b.x += t.velocity.vx;
  b.y += t.velocity.vy;
  return clip(b, cfg);
}

bool overlap_match(const RealBox& a, const RealBox& b, double frac) {
  const double inter = intersection_area(a, b);
  return inter > 0 && inter > frac * std::min(a.area(), b.area());
}

bool overlap_match(const BoundingBox& a, const BoundingBox& b, double frac) {
  return overlap_match(RealBox::from(a), RealBox::from(b), frac);
}

namespace {

// Small union-find over trackers [0, nt) followed by proposals [nt, nt+np).
struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Shrinks one axis of the union to at most `limit`, keeping the window inside
// the union and as close as possible to the predicted centre.
void clamp_axis(double& lo, double& len, double limit, double predicted_centre) {
  if (len <= limit) return;
  const double start = std::clamp(predicted_centre - 0.5 * limit, lo, lo + len - limit);
  lo = start;
  len = limit;
}

}  // namespace

OverlapTracker::OverlapTracker(const SensorConfig& cfg, const OtParams& params)
    : cfg_(cfg), params_(params), slots_(params.max_trackers) {
  cfg_.validate();
  params_.validate();
}

std::size_t OverlapTracker::live_count() const {
  return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](const auto& s) {
    return s.status != SlotStatus::Free;
  }));
}

void OverlapTracker::seed(TrackerState& slot, const BoundingBox& box) {
  slot = TrackerState{};
  slot.id = next_id_++;
  slot.box = RealBox::from(box);
  slot.status = SlotStatus::Active;
  slot.age_frames = 1;
  ++diag_.seeded;
  count(4);
}

void OverlapTracker::correct(TrackerState& slot, const RealBox& predicted,
                             std::span<const BoundingBox> boxes) {
  RealBox u = RealBox::from(boxes.front());
  for (std::size_t i = 1; i < boxes.size(); ++i) u = bounding_union(u, RealBox::from(boxes[i]));
  count(4 * (boxes.size() - 1));

  const RealBox previous = slot.box;
  const double grow = 1.0 + params_.growth_limit;
  clamp_axis(u.x, u.w, grow * previous.w, predicted.cx());
  clamp_axis(u.y, u.h, grow * previous.h, predicted.cy());

  const double a = params_.proposal_weight;
  RealBox next{a * u.x + (1 - a) * predicted.x, a * u.y + (1 - a) * predicted.y,
               a * u.w + (1 - a) * predicted.w, a * u.h + (1 - a) * predicted.h};
  next = clip(next, cfg_);

  const double s = params_.velocity_smoothing;
  slot.velocity.vx = s * slot.velocity.vx + (1 - s) * (next.cx() - previous.cx());
  slot.velocity.vy = s * slot.velocity.vy + (1 - s) * (next.cy() - previous.cy());
  slot.box = next;
  slot.status = SlotStatus::Active;
  slot.unmatched_frames = 0;
  count(12 + 16 + 10);
}

void OverlapTracker::coast(TrackerState& slot, const RealBox& predicted) {
  slot.box = predicted;
}

void OverlapTracker::free_slot(TrackerState& slot) {
  slot = TrackerState{};
  ++diag_.freed;
}

bool OverlapTracker::is_occlusion(std::span<const std::size_t> idx,
                                  std::span<const RealBox> predicted) const {
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const auto& ta = slots_[idx[a]];
      const auto& tb = slots_[idx[b]];
      const double dvx = ta.velocity.vx - tb.velocity.vx;
      const double dvy = ta.velocity.vy - tb.velocity.vy;
      count(4);
      if (std::hypot(dvx, dvy) < params_.min_relative_speed) continue;
      // An occlusion already in progress persists while the pair shares a
      // proposal.
      if (ta.status == SlotStatus::Occluded && tb.status == SlotStatus::Occluded) return true;
      for (int j = 1; j <= params_.occlusion_lookahead; ++j) {
        RealBox pa = predicted[idx[a]];
        RealBox pb = predicted[idx[b]];
        pa.x += j * ta.velocity.vx;
        pa.y += j * ta.velocity.vy;
        pb.x += j * tb.velocity.vx;
        pb.y += j * tb.velocity.vy;
        count(8 + 8);
        if (intersection_area(clip(pa, cfg_), clip(pb, cfg_)) > 0) return true;
      }
    }
  }
  return false;
}

std::vector<TrackOutput> OverlapTracker::step(std::span<const RegionProposal> proposals) {
  diag_ = {};
  const std::size_t nslots = slots_.size();
  const std::size_t np = proposals.size();

  // (a) predictions for live slots, visited in ascending id.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < nslots; ++i) {
    if (slots_[i].status != SlotStatus::Free) live.push_back(i);
  }
  std::sort(live.begin(), live.end(),
            [&](std::size_t a, std::size_t b) { return slots_[a].id < slots_[b].id; });
  std::vector<RealBox> predicted(nslots);
  for (auto i : live) {
    predicted[i] = predict(slots_[i], cfg_);
    count(2);
  }

  // (b) overlap relation between predictions and proposals.
  std::vector<std::vector<bool>> related(nslots, std::vector<bool>(np, false));
  std::vector<bool> proposal_matched(np, false);
  std::vector<bool> slot_matched(nslots, false);
  Components comp(nslots + np);
  for (auto i : live) {
    for (std::size_t j = 0; j < np; ++j) {
      count(12);
      if (overlap_match(predicted[i], RealBox::from(proposals[j].box), params_.overlap_fraction)) {
        related[i][j] = true;
        proposal_matched[j] = true;
        slot_matched[i] = true;
        comp.join(i, nslots + j);
      }
    }
  }

  // (c) seed free slots from unmatched proposals.
  std::vector<bool> seeded_now(nslots, false);
  for (std::size_t j = 0; j < np; ++j) {
    if (proposal_matched[j]) continue;
    for (std::size_t i = 0; i < nslots; ++i) {
      if (slots_[i].status == SlotStatus::Free && !seeded_now[i]) {
        seed(slots_[i], proposals[j].box);
        seeded_now[i] = true;
        break;
      }
    }
  }

  // Group matched trackers and proposals into connected components.
  std::vector<std::size_t> roots;
  for (auto i : live) {
    if (!slot_matched[i]) continue;
    const auto r = comp.find(i);
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }

  std::vector<bool> handled(nslots, false);
  for (const auto root : roots) {
    std::vector<std::size_t> ts;
    std::vector<std::size_t> ps;
    for (auto i : live) {
      if (slot_matched[i] && comp.find(i) == root) ts.push_back(i);
    }
    for (std::size_t j = 0; j < np; ++j) {
      if (proposal_matched[j] && comp.find(nslots + j) == root) ps.push_back(j);
    }

    if (ts.size() == 1) {
      // (d) one tracker, one or more proposals: fold fragments into it.
      std::vector<BoundingBox> boxes;
      for (auto j : ps) boxes.push_back(proposals[j].box);
      correct(slots_[ts[0]], predicted[ts[0]], boxes);
      handled[ts[0]] = true;
    } else if (ps.size() == 1) {
      // (e) one proposal, several trackers.
      if (is_occlusion(ts, predicted)) {
        for (auto i : ts) {
          coast(slots_[i], predicted[i]);
          slots_[i].status = SlotStatus::Occluded;
          slots_[i].unmatched_frames = 0;
          handled[i] = true;
        }
        ++diag_.occlusion_events;
      } else {
        const BoundingBox box = proposals[ps[0]].box;
        correct(slots_[ts[0]], predicted[ts[0]], std::span(&box, 1));
        handled[ts[0]] = true;
        for (std::size_t k = 1; k < ts.size(); ++k) {
          free_slot(slots_[ts[k]]);
          handled[ts[k]] = true;
        }
        ++diag_.fragment_merges;
      }
    } else {
      // Several trackers and several proposals: one-to-one by largest
      // overlap first, then leftover proposals join their best tracker.
      struct Pair {
        double area;
        std::size_t t;
        std::size_t p;
      };
      std::vector<Pair> pairs;
      for (auto i : ts) {
        for (auto j : ps) {
          if (related[i][j]) {
            pairs.push_back({intersection_area(predicted[i], RealBox::from(proposals[j].box)), i, j});
          }
        }
      }
      std::stable_sort(pairs.begin(), pairs.end(),
                       [](const Pair& a, const Pair& b) { return a.area > b.area; });
      std::vector<std::vector<BoundingBox>> assigned(nslots);
      std::vector<bool> p_used(np, false);
      for (const auto& pr : pairs) {
        if (!assigned[pr.t].empty() || p_used[pr.p]) continue;
        assigned[pr.t].push_back(proposals[pr.p].box);
        p_used[pr.p] = true;
      }
      for (const auto& pr : pairs) {
        if (p_used[pr.p]) continue;
        assigned[pr.t].push_back(proposals[pr.p].box);
        p_used[pr.p] = true;
      }
      for (auto i : ts) {
        if (!assigned[i].empty()) {
          correct(slots_[i], predicted[i], assigned[i]);
          handled[i] = true;
        }
      }
    }
  }

  // (f) trackers without a proposal coast; stale or vanished ones are freed.
  for (auto i : live) {
    auto& slot = slots_[i];
    if (slot.status == SlotStatus::Free) continue;
    if (!handled[i]) {
      coast(slot, predicted[i]);
      ++slot.unmatched_frames;
      const int limit = slot.status == SlotStatus::Occluded ? params_.max_unmatched_occluded
                                                            : params_.max_unmatched;
      if (slot.unmatched_frames > limit) {
        free_slot(slot);
        continue;
      }
    }
    if (slot.box.area() < 1.0) {
      free_slot(slot);
      continue;
    }
    ++slot.age_frames;
  }

  // (g) emit locked-in trackers, ascending id.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < nslots; ++i) {
    if (slots_[i].status != SlotStatus::Free) order.push_back(i);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return slots_[a].id < slots_[b].id; });
  std::vector<TrackOutput> out;
  for (auto i : order) {
    const auto& s = slots_[i];
    if (s.age_frames < params_.lock_in) continue;
    const auto box = clip(s.box.rounded(), cfg_);
    if (box.empty()) continue;
    out.push_back({s.id, box, s.status == SlotStatus::Occluded});
  }
  return out;
}

}  // namespace ebbiot
