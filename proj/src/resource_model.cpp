#include "ebbiot/resource_model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "ebbiot/types.hpp"

namespace ebbiot {

void ResourceParams::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("model.width and model.height must be > 0");
  if (patch < 1) throw ValidationError("model.patch must be >= 1");
  if (s1 < 1 || s2 < 1) throw ValidationError("model.s1 and model.s2 must be >= 1");
  if (alpha < 0 || alpha > 1) throw ValidationError("model.alpha must lie in [0,1]");
  if (beta < 1) throw ValidationError("model.beta must be >= 1");
  if (mean_trackers < 0 || mean_filtered_events < 0 || mean_clusters < 0) {
    throw ValidationError("model.mean_trackers, model.mean_filtered_events and model.mean_clusters must be non-negative");
  }
  if (kf_state_size < 0 || kf_measurement_size < 0) {
    throw ValidationError("model.kf_state_size and model.kf_measurement_size must be non-negative");
  }
}

namespace {

double ceil_log2(double v) { return v <= 1 ? 0.0 : std::ceil(std::log2(v)); }

double pixels(const ResourceParams& p) { return double(p.width) * double(p.height); }

std::string fmt(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

Cost ebbi_cost(const ResourceParams& p) {
  const double ab = pixels(p);
  return {(p.alpha * p.patch * p.patch + 2.0) * ab, 2.0 * ab};
}

Cost nn_filt_cost(const ResourceParams& p) {
  const double per_event = 2.0 * (p.patch * p.patch - 1) + p.timestamp_bits;
  return {per_event * p.mean_events(), double(p.timestamp_bits) * pixels(p)};
}

Cost rpn_cost(const ResourceParams& p) {
  const double ab = pixels(p);
  const double cells = ab / (double(p.s1) * p.s2);
  const double ops = ab + 2.0 * cells;
  const double mem = cells * ceil_log2(double(p.s1) * p.s2) +
                     (double(p.width) / p.s1) * ceil_log2(double(p.height) * p.s1) +
                     (double(p.height) / p.s2) * ceil_log2(double(p.width) * p.s2);
  return {ops, mem};
}

double rpn_ops_unit_histogram(const ResourceParams& p) {
  const double ab = pixels(p);
  return ab + ab / (double(p.s1) * p.s2);
}

Cost ot_cost(const ResourceParams& p) {
  double ops = 134.0 * p.mean_trackers * p.mean_trackers;
  for (std::size_t i = 0; i < p.step_probability.size(); ++i) {
    ops += p.step_probability[i] * p.step_cost[i];
  }
  return {ops, kOtMemoryBitsPerSlot * p.max_trackers};
}

Cost kf_cost(const ResourceParams& p) {
  const double n = p.kf_state_size;
  const double m = p.kf_measurement_size;
  return {4 * m * m * m + 6 * m * m * n + 4 * m * n * n + 4 * n * n * n + 3 * n * n, kKfMemoryBits};
}

double ebms_memory_units(const ResourceParams& p) { return 408.0 * p.max_clusters + 56.0; }

Cost ebms_cost(const ResourceParams& p) {
  const double cl = p.mean_clusters;
  const double ops =
      p.mean_filtered_events * (9.0 * cl * cl + (169.0 + 16.0 * p.gamma_merge) * cl + 11.0);
  return {ops, 8.0 * ebms_memory_units(p)};
}

std::string to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::Ebbiot: return "ebbiot";
    case PipelineKind::EbbiKf: return "ebbi-kf";
    case PipelineKind::Ebms: return "ebms";
  }
  return "?";
}

PipelineKind parse_pipeline(const std::string& name) {
  for (auto k : all_pipelines()) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown pipeline '" + name + "' (expected ebbiot, ebbi-kf or ebms)");
}

const std::vector<PipelineKind>& all_pipelines() {
  static const std::vector<PipelineKind> k{PipelineKind::Ebbiot, PipelineKind::EbbiKf,
                                           PipelineKind::Ebms};
  return k;
}

std::vector<StageCost> pipeline_stages(PipelineKind kind, const ResourceParams& p) {
  switch (kind) {
    case PipelineKind::Ebbiot:
      return {{"ebbi", ebbi_cost(p)}, {"rpn", rpn_cost(p)}, {"ot", ot_cost(p)}};
    case PipelineKind::EbbiKf:
      return {{"ebbi", ebbi_cost(p)}, {"rpn", rpn_cost(p)}, {"kf", kf_cost(p)}};
    case PipelineKind::Ebms:
      return {{"nn-filt", nn_filt_cost(p)}, {"ebms", ebms_cost(p)}};
  }
  return {};
}

Cost pipeline_total(PipelineKind kind, const ResourceParams& p) {
  Cost total;
  for (const auto& s : pipeline_stages(kind, p)) {
    total.ops += s.cost.ops;
    total.memory_bits += s.cost.memory_bits;
  }
  return total;
}

Cost ResourceReport::total(PipelineKind kind) const {
  Cost t;
  const auto name = to_string(kind);
  for (const auto& r : rows) {
    if (r.pipeline != name) continue;
    t.ops += r.analytic.ops;
    t.memory_bits += r.analytic.memory_bits;
  }
  return t;
}

ResourceReport analytic_report(const ResourceParams& p) {
  p.validate();
  ResourceReport report;
  report.params = p;
  report.rpn_ops_unit_histogram = rpn_ops_unit_histogram(p);
  report.ebms_memory_units = ebms_memory_units(p);
  for (auto kind : all_pipelines()) {
    for (const auto& s : pipeline_stages(kind, p)) {
      report.rows.push_back({to_string(kind), s.stage, s.cost, s.cost, -1});
    }
  }
  return report;
}

ResourceParams measured_parameters(const ResourceParams& base, const RunStatistics& stats) {
  ResourceParams m = base;
  if (stats.frames == 0) return m;
  const double frames = double(stats.frames);
  const double ab = double(base.width) * base.height;
  m.alpha = double(stats.raw_set_bits) / (frames * ab);
  m.beta = stats.raw_set_bits > 0 ? std::max(1.0, double(stats.events) / double(stats.raw_set_bits))
                                  : 1.0;
  m.mean_trackers = double(stats.live_tracker_frames) / frames;
  m.kf_state_size = m.kf_measurement_size = static_cast<int>(std::lround(2.0 * m.mean_trackers));
  m.mean_filtered_events = double(stats.filtered_events) / frames;
  m.mean_clusters = double(stats.live_cluster_frames) / frames;
  m.gamma_merge = double(stats.cluster_merges) / frames;
  return m;
}

ResourceReport measure(const ResourceParams& base, std::span<const PipelineMeasurement> runs) {
  ResourceReport report = analytic_report(base);
  report.has_measurements = true;
  for (const auto& run : runs) {
    const auto name = to_string(run.kind);
    const auto mp = measured_parameters(base, run.stats);
    report.measured_params.emplace_back(name, mp);
    const double frames = run.stats.frames > 0 ? double(run.stats.frames) : 1.0;
    for (auto& row : report.rows) {
      if (row.pipeline != name) continue;
      for (const auto& s : pipeline_stages(run.kind, mp)) {
        if (s.stage == row.stage) row.analytic_measured = s.cost;
      }
      for (const auto& m : run.stages) {
        if (m.stage == row.stage) row.measured_ops = double(m.counters.total()) / frames;
      }
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const ResourceReport& report) {
  out << "pipeline,stage,analytic_ops,analytic_memory_bits,analytic_memory_kB,"
         "analytic_ops_measured_params,measured_ops\n";
  for (const auto& r : report.rows) {
    out << r.pipeline << ',' << r.stage << ',' << fmt(r.analytic.ops) << ','
        << fmt(r.analytic.memory_bits) << ',' << fmt(bits_to_kb(r.analytic.memory_bits), 4) << ','
        << (r.measured_ops >= 0 ? fmt(r.analytic_measured.ops) : "") << ','
        << (r.measured_ops >= 0 ? fmt(r.measured_ops) : "") << '\n';
  }
  const Cost base = report.total(PipelineKind::Ebbiot);
  for (auto kind : all_pipelines()) {
    const Cost t = report.total(kind);
    out << to_string(kind) << ",total," << fmt(t.ops) << ',' << fmt(t.memory_bits) << ','
        << fmt(bits_to_kb(t.memory_bits), 4) << ",,\n";
    out << to_string(kind) << ",ratio_vs_ebbiot," << fmt(t.ops / base.ops, 4) << ','
        << fmt(t.memory_bits / base.memory_bits, 4) << ",,,\n";
  }
}

void write_report_table(std::ostream& out, const ResourceReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-9s %-8s %14s %14s %12s\n", "pipeline", "stage", "kops/frame",
                "memory bits", "memory kB");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-9s %-8s %14.3f %14.0f %12.3f", r.pipeline.c_str(),
                  r.stage.c_str(), r.analytic.ops / 1000.0, r.analytic.memory_bits,
                  bits_to_kb(r.analytic.memory_bits));
    out << line;
    if (r.measured_ops >= 0) {
      std::snprintf(line, sizeof line, "   measured %.3f kops/frame (model %.3f)",
                    r.measured_ops / 1000.0, r.analytic_measured.ops / 1000.0);
      out << line;
    }
    out << '\n';
  }
  out << '\n';
  const Cost base = report.total(PipelineKind::Ebbiot);
  for (auto kind : all_pipelines()) {
    const Cost t = report.total(kind);
    std::snprintf(line, sizeof line, "%-9s total %10.3f kops/frame %10.3f kB   x%.2f ops  x%.2f memory\n",
                  to_string(kind).c_str(), t.ops / 1000.0, bits_to_kb(t.memory_bits),
                  t.ops / base.ops, t.memory_bits / base.memory_bits);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "\nrpn ops with unit histogram weight: %.0f; ebms memory: %.0f units\n",
                report.rpn_ops_unit_histogram, report.ebms_memory_units);
  out << line;
}

}  // namespace ebbiot
