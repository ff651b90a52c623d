#include "ebbiot/run.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <ostream>

#include "ebbiot/render.hpp"
#include "ebbiot/synth_scene.hpp"

namespace ebbiot {
namespace {

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

RunInput load_input(const RunConfig& cfg) {
  RunInput in;
  const auto& sensor = cfg.params.sensor;
  if (!cfg.input_preset.empty()) {
    SceneSpec spec = preset(cfg.input_preset);
    spec.cfg = sensor;
    if (cfg.seed) spec.rng_seed = *cfg.seed;
    Scene scene = generate(spec);
    in.recording = spec.name;
    in.events = std::move(scene.events);
    in.ground_truth = std::move(scene.ground_truth);
    in.frames = spec.duration_frames;
  } else {
    in.recording = std::filesystem::path(cfg.input_events).stem().string();
    in.events = read_events(cfg.input_events, sensor);
    if (!cfg.ground_truth.empty()) in.ground_truth = read_boxes_csv(cfg.ground_truth);
    if (!in.events.empty()) in.frames = in.events.back().t / sensor.frame_us + 1;
  }
  if (in.ground_truth && !in.ground_truth->empty()) {
    in.frames = std::max(in.frames, in.ground_truth->rbegin()->first + 1);
  }
  return in;
}

void write_metrics_rows(std::ostream& out, const std::string& pipeline,
                        const std::string& recording, const EvalResult& eval) {
  for (const auto& m : eval.per_threshold) {
    out << pipeline << ',' << recording << ',' << fixed(m.threshold, 2) << ','
        << fixed(m.precision) << ',' << fixed(m.recall) << ',' << m.true_positives << ','
        << m.proposals << ',' << m.ground_truths << ',' << (m.precision_undefined ? 1 : 0) << ','
        << (m.recall_undefined ? 1 : 0) << '\n';
  }
}

RunOutcome execute_run(const RunConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());

  const RunInput input = load_input(cfg);
  RunOutcome outcome;
  outcome.recording = input.recording;
  outcome.events = input.events.size();

  RunOptions options;
  options.instrument = cfg.instrument;
  options.keep_frames = cfg.debug_frames;
  options.min_frames = input.frames;

  std::ostringstream metrics;
  metrics << kMetricsHeader << '\n';
  std::vector<PipelineMeasurement> measurements;
  nlohmann::ordered_json summary;
  summary["recording"] = input.recording;
  summary["events"] = input.events.size();
  summary["frames"] = input.frames;
  summary["ground_truth"] = input.ground_truth.has_value();
  if (input.ground_truth) summary["ground_truth_tracks"] = count_track_ids(*input.ground_truth);
  auto& pipes = summary["pipelines"] = nlohmann::ordered_json::array();

  for (const auto kind : cfg.pipelines) {
    const auto name = to_string(kind);
    PipelineResult result = run_pipeline(kind, input.events, cfg.params, options);
    const auto tracks_file = "tracks_" + name + ".csv";
    write_boxes_csv(dir / tracks_file, result.tracks);
    outcome.files.emplace_back(tracks_file);

    PipelineOutcome po;
    po.kind = kind;
    po.frames = result.frames;
    for (const auto& [f, boxes] : result.tracks) po.emitted_boxes += boxes.size();
    po.track_ids = count_track_ids(result.tracks);
    po.occlusion_events = result.occlusion_events;
    po.fragment_merges = result.fragment_merges;

    nlohmann::ordered_json pj;
    pj["pipeline"] = name;
    pj["frames"] = po.frames;
    pj["emitted_boxes"] = po.emitted_boxes;
    pj["track_ids"] = po.track_ids;
    if (kind == PipelineKind::Ebbiot) {
      pj["occlusion_events"] = po.occlusion_events;
      pj["fragment_merges"] = po.fragment_merges;
    }
    if (input.ground_truth) {
      po.eval = evaluate(*input.ground_truth, result.tracks, cfg.iou_thresholds, cfg.eval_skip_frames);
      write_metrics_rows(metrics, name, input.recording, *po.eval);
      auto& mj = pj["metrics"] = nlohmann::ordered_json::array();
      for (const auto& m : po.eval->per_threshold) {
        mj.push_back({{"iou_threshold", m.threshold},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"tp", m.true_positives},
                      {"proposals", m.proposals},
                      {"ground_truths", m.ground_truths}});
      }
    }
    pipes.push_back(pj);

    if (cfg.instrument) measurements.push_back(result.measurement);
    if (cfg.debug_frames) {
      const auto sub = std::filesystem::path("frames") / name;
      render_debug(result.records, cfg.params.roe, cfg.params.sensor, dir / sub);
      if (kind != PipelineKind::Ebms) {
        std::ostringstream rows;
        rows << kProposalCsvHeader << '\n';
        for (const auto& rec : result.records) write_proposals_csv(rows, rec.index, rec.proposals);
        write_text(dir / sub / "proposals.csv", rows.str());
      }
      outcome.files.push_back(sub);
    }
    outcome.pipelines.push_back(std::move(po));
  }

  if (input.ground_truth) {
    write_text(dir / "metrics.csv", metrics.str());
    outcome.files.emplace_back("metrics.csv");
  }

  outcome.resources = cfg.instrument ? measure(cfg.resource_params(), measurements)
                                     : analytic_report(cfg.resource_params());
  std::ostringstream csv, table;
  write_report_csv(csv, outcome.resources);
  write_report_table(table, outcome.resources);
  write_text(dir / "resources.csv", csv.str());
  write_text(dir / "resources.txt", table.str());
  outcome.files.emplace_back("resources.csv");
  outcome.files.emplace_back("resources.txt");

  std::ostringstream manifest;
  write_manifest(manifest, cfg);
  write_text(dir / "manifest.cfg", manifest.str());
  outcome.files.emplace_back("manifest.cfg");

  outcome.files.emplace_back("summary.json");
  auto& files = summary["files"] = nlohmann::ordered_json::array();
  for (const auto& f : outcome.files) files.push_back(f.generic_string());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

}  // namespace ebbiot
