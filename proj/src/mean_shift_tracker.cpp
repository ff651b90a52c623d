#include "ebbiot/mean_shift_tracker.hpp"

#include <algorithm>
#include <cmath>

namespace ebbiot {

void EbmsParams::validate() const {
  if (radius <= 0) throw ValidationError("ebms.radius must be > 0");
  if (learning_rate <= 0 || learning_rate > 1) throw ValidationError("ebms.learning_rate must lie in (0,1]");
  if (seed_count < 1) throw ValidationError("ebms.seed_count must be >= 1");
  if (timeout_us < 1) throw ValidationError("ebms.timeout_us must be >= 1");
  if (merge_distance < 0) throw ValidationError("ebms.merge_distance must be >= 0");
  if (box_width < 1 || box_height < 1) throw ValidationError("ebms.box_width and ebms.box_height must be >= 1");
  if (max_clusters < 1) throw ValidationError("ebms.max_clusters must be >= 1");
  if (history < 2) throw ValidationError("ebms.history must be >= 2");
}

Velocity fit_velocity(const std::deque<CenterSample>& samples) {
  if (samples.size() < 2) return {};
  const double n = static_cast<double>(samples.size());
  const double t0 = static_cast<double>(samples.front().t);
  double mt = 0, mx = 0, my = 0;
  for (const auto& s : samples) {
    mt += static_cast<double>(s.t) - t0;
    mx += s.x;
    my += s.y;
  }
  mt /= n;
  mx /= n;
  my /= n;
  double stt = 0, stx = 0, sty = 0;
  for (const auto& s : samples) {
    const double dt = static_cast<double>(s.t) - t0 - mt;
    stt += dt * dt;
    stx += dt * (s.x - mx);
    sty += dt * (s.y - my);
  }
  if (stt <= 0) return {};
  return {stx / stt, sty / stt};
}

MeanShiftTracker::MeanShiftTracker(const SensorConfig& cfg, const EbmsParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  params_.validate();
}

void MeanShiftTracker::absorb(const Event& e) {
  EbmsCluster* nearest = nullptr;
  double best = params_.radius;
  for (auto& c : clusters_) {
    const double d = std::hypot(e.x - c.x, e.y - c.y);
    if (d < best) {
      best = d;
      nearest = &c;
    }
  }
  // Distance (2 subs, 2 muls, add, sqrt) and a compare per cluster.
  if (counters_) {
    counters_->arithmetic += 6 * clusters_.size();
    counters_->comparisons += clusters_.size();
  }

  if (nearest) {
    nearest->x += params_.learning_rate * (e.x - nearest->x);
    nearest->y += params_.learning_rate * (e.y - nearest->y);
    ++nearest->event_count;
    nearest->last_event_t = e.t;
    nearest->touched = true;
    if (nearest->event_count >= params_.seed_count) nearest->visible = true;
    if (counters_) {
      counters_->arithmetic += 6;
      counters_->increments += 1;
      counters_->writes += 3;
    }
  } else if (clusters_.size() < params_.max_clusters) {
    EbmsCluster c;
    c.id = next_id_++;
    c.x = e.x;
    c.y = e.y;
    c.event_count = 1;
    c.last_event_t = e.t;
    c.touched = true;
    c.visible = params_.seed_count <= 1;
    clusters_.push_back(std::move(c));
    if (counters_) counters_->writes += 4;
  }
}

void MeanShiftTracker::merge_close_clusters() {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < clusters_.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < clusters_.size() && !merged; ++b) {
        auto& ca = clusters_[a];
        auto& cb = clusters_[b];
        if (counters_) counters_->arithmetic += 6;
        if (std::hypot(ca.x - cb.x, ca.y - cb.y) >= params_.merge_distance) continue;
        // Clusters are kept in ascending id, so `ca` is the survivor.
        const double wa = static_cast<double>(ca.event_count);
        const double wb = static_cast<double>(cb.event_count);
        ca.x = (wa * ca.x + wb * cb.x) / (wa + wb);
        ca.y = (wa * ca.y + wb * cb.y) / (wa + wb);
        ca.event_count += cb.event_count;
        ca.last_event_t = std::max(ca.last_event_t, cb.last_event_t);
        ca.visible = ca.visible || cb.visible;
        ca.touched = ca.touched || cb.touched;
        clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(b));
        ++merges_;
        if (counters_) counters_->arithmetic += 16;
        merged = true;
      }
    }
  }
}

std::vector<TrackOutput> MeanShiftTracker::step(std::span<const Event> events,
                                                std::uint64_t frame_end_us) {
  for (auto& c : clusters_) c.touched = false;
  for (const auto& e : events) absorb(e);

  std::erase_if(clusters_, [&](const EbmsCluster& c) {
    return frame_end_us > c.last_event_t && frame_end_us - c.last_event_t > params_.timeout_us;
  });
  merge_close_clusters();

  // One history sample per frame for each cluster that saw events; the
  // velocity is the least-squares slope over the stored samples.
  const double frame = static_cast<double>(cfg_.frame_us);
  for (auto& c : clusters_) {
    if (!c.touched) continue;
    c.history.push_back({frame_end_us, c.x, c.y});
    while (c.history.size() > params_.history) c.history.pop_front();
    const auto v = fit_velocity(c.history);
    c.velocity = {v.vx * frame, v.vy * frame};
    if (counters_) counters_->arithmetic += 10 * c.history.size() + 6;
  }

  std::vector<TrackOutput> out;
  for (const auto& c : clusters_) {
    if (!c.visible) continue;
    const RealBox b{c.x - 0.5 * params_.box_width, c.y - 0.5 * params_.box_height,
                    double(params_.box_width), double(params_.box_height)};
    const auto box = clip(b.rounded(), cfg_);
    if (box.empty()) continue;
    out.push_back({c.id, box, false});
  }
  return out;
}

}  // namespace ebbiot
