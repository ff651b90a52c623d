#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ebbiot/eval_metrics.hpp"
#include "ebbiot/render.hpp"
#include "ebbiot/resource_model.hpp"
#include "ebbiot/run.hpp"
#include "ebbiot/run_config.hpp"
#include "ebbiot/synth_scene.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

// Config file first, then --set pairs, then dedicated flags.
struct ConfigSources {
  std::string file;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigSources& src) {
  cmd->add_option("-c,--config", src.file, "key=value configuration file");
  cmd->add_option("--set", src.overrides, "override one key, e.g. --set rpn.s1=6")
      ->type_name("KEY=VALUE");
}

ebbiot::RunConfig resolve(const ConfigSources& src) {
  ebbiot::RunConfig cfg;
  if (!src.file.empty()) cfg = ebbiot::load_config(src.file);
  for (const auto& kv : src.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ebbiot::ConfigError(kv, "--set expects KEY=VALUE");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int run_cmd(const ConfigSources& src, const std::vector<std::pair<std::string, std::string>>& flags) {
  ebbiot::RunConfig cfg;
  try {
    cfg = resolve(src);
    for (const auto& [key, value] : flags) cfg.set(key, value);
    cfg.validate();
  } catch (const ebbiot::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  const auto outcome = ebbiot::execute_run(cfg);
  std::cout << outcome.recording << ": " << outcome.events << " events\n";
  for (const auto& p : outcome.pipelines) {
    std::cout << "  " << ebbiot::to_string(p.kind) << ": " << p.frames << " frames, "
              << p.track_ids << " track ids, " << p.emitted_boxes << " boxes";
    if (p.eval) {
      for (const auto& m : p.eval->per_threshold) {
        if (std::abs(m.threshold - 0.5) < 1e-9) {
          std::cout << ", P=" << m.precision << " R=" << m.recall << " @IoU 0.5";
        }
      }
    }
    std::cout << '\n';
  }
  std::cout << "wrote " << outcome.files.size() << " artifacts to " << cfg.output_dir << '\n';
  return kOk;
}

int generate_cmd(const std::string& name, const std::optional<std::uint64_t>& seed,
                 const std::string& events_path, const std::string& gt_path) {
  ebbiot::SceneSpec spec;
  try {
    spec = ebbiot::preset(name);
  } catch (const ebbiot::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  if (seed) spec.rng_seed = *seed;
  const auto scene = ebbiot::generate(spec);
  ebbiot::write_events(events_path, scene.events);
  if (!gt_path.empty()) ebbiot::write_boxes_csv(std::filesystem::path(gt_path), scene.ground_truth);
  std::cout << spec.name << ": " << spec.duration_frames << " frames (" << spec.duration_s()
            << " s), " << scene.events.size() << " events, "
            << ebbiot::count_track_ids(scene.ground_truth) << " objects\n";
  if (spec.time_scale != 1.0) {
    std::cout << "scaled by " << spec.time_scale << " from " << spec.source_duration_s << " s / "
              << spec.source_events << " events\n";
  }
  return kOk;
}

int evaluate_cmd(const std::string& gt_path, const std::string& tracks_path,
                 std::vector<double> thresholds, std::uint64_t skip, const std::string& label) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 0 || thresholds[i] >= 1 || (i > 0 && thresholds[i] <= thresholds[i - 1])) {
      std::cerr << "config error: --thresholds must be ascending values in [0,1)\n";
      return kUsageError;
    }
  }
  const auto gt = ebbiot::read_boxes_csv(std::filesystem::path(gt_path));
  const auto tracks = ebbiot::read_boxes_csv(std::filesystem::path(tracks_path));
  const auto result = ebbiot::evaluate(gt, tracks, thresholds, skip);
  std::cout << ebbiot::kMetricsHeader << '\n';
  ebbiot::write_metrics_rows(std::cout, label, std::filesystem::path(gt_path).stem().string(), result);
  return kOk;
}

int resources_cmd(const ConfigSources& src, bool csv) {
  ebbiot::RunConfig cfg;
  try {
    cfg = resolve(src);
    cfg.validate_params();
  } catch (const ebbiot::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  const auto report = ebbiot::analytic_report(cfg.resource_params());
  if (csv) {
    ebbiot::write_report_csv(std::cout, report);
  } else {
    ebbiot::write_report_table(std::cout, report);
  }
  return kOk;
}

int render_cmd(const ConfigSources& src, const std::string& events_path,
               const std::string& tracks_path, const std::string& out_dir) {
  ebbiot::RunConfig cfg;
  try {
    cfg = resolve(src);
    cfg.validate_params();
    if (!std::filesystem::is_regular_file(events_path)) {
      throw ebbiot::ConfigError("--events", "file '" + events_path + "' does not exist");
    }
    if (!tracks_path.empty() && !std::filesystem::is_regular_file(tracks_path)) {
      throw ebbiot::ConfigError("--tracks", "file '" + tracks_path + "' does not exist");
    }
  } catch (const ebbiot::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  }
  const auto& p = cfg.params;
  const auto events = ebbiot::read_events(events_path, p.sensor);
  ebbiot::BoxTable tracks;
  if (!tracks_path.empty()) tracks = ebbiot::read_boxes_csv(std::filesystem::path(tracks_path));
  const auto roe = p.roe.clipped(p.sensor);

  std::vector<ebbiot::FrameRecord> records;
  for (const auto& slice : ebbiot::partition_frames(events, p.sensor)) {
    ebbiot::FrameRecord rec;
    rec.index = slice.index;
    rec.frames.raw = ebbiot::accumulate(slice.events, p.sensor);
    rec.frames.filtered = ebbiot::apply_roe(ebbiot::median_filter(rec.frames.raw, p.filter), roe);
    rec.proposals = ebbiot::propose(rec.frames.filtered, p.rpn);
    if (auto it = tracks.find(slice.index); it != tracks.end()) {
      for (const auto& b : it->second) rec.tracks.push_back({b.track_id, b.box, false});
    }
    records.push_back(std::move(rec));
  }
  const auto n = ebbiot::render_debug(records, roe, p.sensor, out_dir);
  std::cout << "wrote " << n << " images to " << out_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based binary image tracking pipelines"};
  app.require_subcommand(1);

  ConfigSources run_src;
  std::string preset, events, gt, pipelines, out_dir, seed;
  bool instrument = false, debug_frames = false;
  auto* run = app.add_subcommand("run", "run pipelines on a recording or preset");
  add_config_options(run, run_src);
  run->add_option("--preset", preset, "synthetic preset name");
  run->add_option("--events", events, "event file (.csv or .bin)");
  run->add_option("--ground-truth", gt, "ground-truth box CSV for an event file");
  run->add_option("--pipelines", pipelines, "comma list of ebbiot, ebbi-kf, ebms");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "preset RNG seed");
  run->add_flag("--instrument", instrument, "count operations per stage");
  run->add_flag("--debug-frames", debug_frames, "write annotated PPM/PBM frames");

  std::string gen_preset, gen_events, gen_gt;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("generate", "write a synthetic scene to disk");
  gen->add_option("--preset", gen_preset, "preset name")->required();
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--events", gen_events, "output event file (.csv or .bin)")->required();
  gen->add_option("--ground-truth", gen_gt, "output ground-truth CSV");

  std::string ev_gt, ev_tracks, ev_label = "tracks";
  std::vector<double> ev_thresholds = ebbiot::default_iou_thresholds();
  std::uint64_t ev_skip = 0;
  auto* eval = app.add_subcommand("evaluate", "score a track file against ground truth");
  eval->add_option("--ground-truth", ev_gt, "ground-truth box CSV")->required();
  eval->add_option("--tracks", ev_tracks, "tracker box CSV")->required();
  eval->add_option("--thresholds", ev_thresholds, "IoU thresholds")->delimiter(',');
  eval->add_option("--skip-frames", ev_skip, "ignore frames before this index");
  eval->add_option("--label", ev_label, "pipeline column value");

  ConfigSources res_src;
  bool res_csv = false;
  auto* res = app.add_subcommand("resources", "print the analytic compute/memory model");
  add_config_options(res, res_src);
  res->add_flag("--csv", res_csv, "CSV instead of a table");

  ConfigSources ren_src;
  std::string ren_events, ren_tracks, ren_out = "frames";
  auto* ren = app.add_subcommand("render", "write annotated frames for an event file");
  add_config_options(ren, ren_src);
  ren->add_option("--events", ren_events, "event file")->required();
  ren->add_option("--tracks", ren_tracks, "box CSV drawn as trackers");
  ren->add_option("--out", ren_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*run) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (!preset.empty()) flags.emplace_back("input.preset", preset);
      if (!events.empty()) flags.emplace_back("input.events", events);
      if (!gt.empty()) flags.emplace_back("input.ground_truth", gt);
      if (!pipelines.empty()) flags.emplace_back("pipelines", pipelines);
      if (!out_dir.empty()) flags.emplace_back("output.dir", out_dir);
      if (!seed.empty()) flags.emplace_back("input.seed", seed);
      if (instrument) flags.emplace_back("output.instrument", "true");
      if (debug_frames) flags.emplace_back("output.debug_frames", "true");
      return run_cmd(run_src, flags);
    }
    if (*gen) return generate_cmd(gen_preset, gen_seed, gen_events, gen_gt);
    if (*eval) return evaluate_cmd(ev_gt, ev_tracks, ev_thresholds, ev_skip, ev_label);
    if (*res) return resources_cmd(res_src, res_csv);
    if (*ren) return render_cmd(ren_src, ren_events, ren_tracks, ren_out);
  } catch (const ebbiot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
