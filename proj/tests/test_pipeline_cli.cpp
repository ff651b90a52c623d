#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ebbiot/render.hpp"
#include "ebbiot/run.hpp"
#include "ebbiot/synth_scene.hpp"

using namespace ebbiot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ebbiot_test_pipeline_cli") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig crossing_config(const fs::path& out) {
  RunConfig cfg;
  cfg.set("input.preset", "crossing");
  cfg.set("output.dir", out.string());
  return cfg;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(EBBIOT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config: every key has a default and the manifest round-trips") {
  RunConfig cfg;
  cfg.set("rpn.s1", "8");
  cfg.set("ot.overlap_fraction", "0.35");
  cfg.set("kf.process_noise", "0.7");
  cfg.set("ebms.radius", "25.5");
  cfg.set("roe", "0,0,20,180;200,150,40,30");
  cfg.set("pipelines", "ebbiot,ebms");
  cfg.set("input.preset", "lt4-like");
  cfg.set("input.seed", "77");
  cfg.set("eval.iou_thresholds", "0.25,0.5");
  cfg.set("model.alpha", "0.125");
  std::stringstream manifest;
  write_manifest(manifest, cfg);
  const auto back = parse_config(manifest);
  for (const auto& key : config_keys()) {
    CAPTURE(key);
    CHECK(config_value(back, key) == config_value(cfg, key));
  }
  CHECK(back.params.rpn.s1 == 8);
  CHECK(back.params.roe.regions.size() == 2);
  CHECK(back.pipelines == std::vector{PipelineKind::Ebbiot, PipelineKind::Ebms});
  CHECK(back.seed == 77u);

  std::istringstream empty("# nothing\n\n");
  const auto defaults = parse_config(empty);
  CHECK(config_value(defaults, "rpn.s1") == "6");
  CHECK(config_value(defaults, "sensor.frame_us") == "66000");
}

TEST_CASE("config: unknown keys and malformed values name the field") {
  RunConfig cfg;
  try {
    cfg.set("rpn.s9", "3");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "rpn.s9");
  }
  try {
    cfg.set("rpn.s1", "six");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "rpn.s1");
  }
  try {
    cfg.set("pipelines", "ebbiot,yolo");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "pipelines");
  }
  std::istringstream bad("rpn.s1=6\nnot a pair\n");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  cfg = RunConfig{};
  cfg.set("input.preset", "crossing");
  cfg.set("ot.overlap_fraction", "1.5");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("ot.overlap_fraction"), ValidationError);
}

TEST_CASE("config: exactly one existing input") {
  RunConfig cfg;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field().rfind("input", 0) == 0);
  }
  cfg.set("input.preset", "crossing");
  cfg.set("input.events", "/nonexistent/events.csv");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.set("input.events", "/nonexistent/events.csv");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("input.events"), ConfigError);
  cfg = RunConfig{};
  cfg.set("input.preset", "nope");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("input.preset"), ConfigError);
}

TEST_CASE("run: crossing preset writes tracks and metrics; reruns are byte-identical") {
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto out_a = execute_run(crossing_config(a));
  execute_run(crossing_config(b));
  for (const char* f : {"tracks_ebbiot.csv", "metrics.csv", "resources.csv", "resources.txt",
                        "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(fs::exists(a / "manifest.cfg"));
  REQUIRE(out_a.pipelines.size() == 1);
  REQUIRE(out_a.pipelines[0].eval.has_value());
  CHECK(slurp(a / "metrics.csv").rfind(kMetricsHeader, 0) == 0);
}

TEST_CASE("run: all three pipelines give three track files and one metrics table") {
  const auto dir = scratch("three");
  auto cfg = crossing_config(dir);
  cfg.set("pipelines", "ebbiot,ebbi-kf,ebms");
  const auto out = execute_run(cfg);
  CHECK(out.pipelines.size() == 3);
  for (auto k : all_pipelines()) CHECK(fs::exists(dir / ("tracks_" + to_string(k) + ".csv")));
  std::istringstream metrics(slurp(dir / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  std::map<std::string, int> rows;
  while (std::getline(metrics, line)) ++rows[line.substr(0, line.find(','))];
  CHECK(rows.size() == 3);
  for (const auto& [name, n] : rows) CHECK(n == 5);
}

TEST_CASE("run: the manifest reproduces the run") {
  const auto a = scratch("manifest_a"), b = scratch("manifest_b");
  auto cfg = crossing_config(a);
  cfg.set("pipelines", "ebbiot,ebbi-kf");
  cfg.set("rpn.min_pixels", "7");
  cfg.set("input.seed", "99");
  execute_run(cfg);
  auto again = load_config(a / "manifest.cfg");
  again.set("output.dir", b.string());
  execute_run(again);
  for (const char* f : {"tracks_ebbiot.csv", "tracks_ebbi-kf.csv", "metrics.csv", "resources.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("run: instrumentation adds measured columns") {
  const auto dir = scratch("instrumented");
  auto cfg = crossing_config(dir);
  cfg.set("output.instrument", "true");
  cfg.set("pipelines", "ebbiot,ebms");
  const auto out = execute_run(cfg);
  CHECK(out.resources.has_measurements);
  std::istringstream csv(slurp(dir / "resources.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.find("measured_ops") != std::string::npos);
  int measured = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("ebbiot,ebbi,", 0) == 0 || line.rfind("ebms,ebms,", 0) == 0) {
      CHECK(line.back() != ',');
      ++measured;
    }
  }
  CHECK(measured == 2);
}

TEST_CASE("run: debug frames are written per pipeline") {
  const auto dir = scratch("debug");
  auto cfg = crossing_config(dir);
  cfg.set("output.debug_frames", "true");
  execute_run(cfg);
  CHECK(fs::exists(dir / "frames" / "ebbiot" / "frame_000000.ppm"));
  CHECK(fs::exists(dir / "frames" / "ebbiot" / "frame_000000.pbm"));
  CHECK(fs::exists(dir / "frames" / "ebbiot" / "frame_000059.ppm"));
  CHECK(fs::exists(dir / "frames" / "ebbiot" / "proposals.csv"));
}

TEST_CASE("run: event file input with ground truth") {
  const auto dir = scratch("files");
  const auto scene = generate(preset("crossing"));
  write_events(dir / "events.bin", scene.events);
  write_boxes_csv(dir / "gt.csv", scene.ground_truth);
  RunConfig cfg;
  cfg.set("input.events", (dir / "events.bin").string());
  cfg.set("input.ground_truth", (dir / "gt.csv").string());
  cfg.set("output.dir", (dir / "out").string());
  cfg.validate();
  const auto from_file = execute_run(cfg);
  const auto from_preset = execute_run(crossing_config(scratch("files_preset")));
  CHECK(slurp(dir / "out" / "tracks_ebbiot.csv") ==
        slurp(fs::temp_directory_path() / "ebbiot_test_pipeline_cli" / "files_preset" /
              "tracks_ebbiot.csv"));
  REQUIRE(from_file.pipelines[0].eval.has_value());
  CHECK(from_file.pipelines[0].eval->per_threshold[2].precision ==
        from_preset.pipelines[0].eval->per_threshold[2].precision);
}

TEST_CASE("render: empty frame is blank") {
  const SensorConfig cfg;
  const auto img = render_frame(BinaryFrame(cfg), {}, {}, {}, cfg);
  CHECK(img.width() == 240);
  CHECK(img.height() == 180);
  bool blank = true;
  for (const auto& px : img.pixels()) blank = blank && px == kBackground;
  CHECK(blank);
}

TEST_CASE("render: a tracker box is outlined at exactly its coordinates") {
  const SensorConfig cfg;
  const BoundingBox box{30, 40, 12, 7};
  const std::vector<TrackOutput> tracks{{1, box, false}};
  const auto img = render_frame(BinaryFrame(cfg), {}, tracks, {}, cfg);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const bool inside = x >= box.x && x < box.right() && y >= box.y && y < box.top();
      const bool edge =
          inside && (x == box.x || x == box.right() - 1 || y == box.y || y == box.top() - 1);
      if (img.at(x, y) != (edge ? kTrackColor : kBackground)) {
        FAIL("pixel (" << x << "," << y << ") has the wrong colour");
      }
    }
  }
}

TEST_CASE("render: ROE is shaded, set pixels are white, tracks draw over proposals") {
  const SensorConfig cfg;
  BinaryFrame f(cfg);
  f.set(5, 5);
  f.set(100, 100);
  RoeMask roe;
  roe.regions = {{0, 0, 20, 20}};
  const std::vector<RegionProposal> props{{{90, 90, 20, 20}, 1}};
  const std::vector<TrackOutput> tracks{{1, {90, 90, 10, 10}, false}};
  const auto img = render_frame(f, props, tracks, roe, cfg);
  CHECK(img.at(10, 10) == kExcluded);
  CHECK(img.at(5, 5) == kExcludedSet);
  CHECK(img.at(100, 100) == kSetPixel);
  CHECK(img.at(109, 95) == kProposalColor);
  CHECK(img.at(90, 90) == kTrackColor);
  CHECK(img.at(50, 50) == kBackground);
}

TEST_CASE("render: PPM and PBM files have the expected layout") {
  const auto dir = scratch("images");
  const SensorConfig cfg;
  BinaryFrame f(cfg);
  f.set(0, 0);
  f.set(9, 0);
  write_pbm(dir / "f.pbm", f);
  const auto pbm = slurp(dir / "f.pbm");
  const std::string header = "P4\n240 180\n";
  REQUIRE(pbm.size() == header.size() + 30 * 180);
  CHECK(pbm.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(pbm[header.size()]) == 0x80);
  CHECK(static_cast<unsigned char>(pbm[header.size() + 1]) == 0x40);

  write_ppm(dir / "f.ppm", render_frame(f, {}, {}, {}, cfg));
  const auto ppm = slurp(dir / "f.ppm");
  const std::string ph = "P6\n240 180\n255\n";
  REQUIRE(ppm.size() == ph.size() + 3 * 240 * 180);
  CHECK(static_cast<unsigned char>(ppm[ph.size()]) == 255);
}

TEST_CASE("cli: exit codes") {
  const auto dir = scratch("cli");
  CHECK(cli("--help") == 0);
  CHECK(cli("resources") == 0);
  CHECK(cli("resources --csv --set model.alpha=0.2") == 0);
  CHECK(cli("run") == 2);                                   // no input
  CHECK(cli("run --preset crossing --set rpn.s9=3") == 2);  // unknown key
  CHECK(cli("run --preset crossing --set rpn.s1=0") == 2);  // invalid value
  CHECK(cli("run --bogus-flag") == 2);
  CHECK(cli("run --preset nope") == 2);
  CHECK(cli("generate --preset foo --events " + (dir / "e.csv").string()) == 2);
  CHECK(cli("run --preset crossing --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "tracks_ebbiot.csv"));
  CHECK(cli("generate --preset crossing --events " + (dir / "e.csv").string() +
            " --ground-truth " + (dir / "gt.csv").string()) == 0);
  CHECK(cli("evaluate --ground-truth " + (dir / "gt.csv").string() + " --tracks " +
            (dir / "run" / "tracks_ebbiot.csv").string()) == 0);
  CHECK(cli("render --events " + (dir / "e.csv").string() + " --out " +
            (dir / "frames").string()) == 0);
  CHECK(fs::exists(dir / "frames" / "frame_000000.ppm"));

  std::ofstream(dir / "broken.csv") << "frame,track_id,x,y,w,h\n0,1,2\n";
  CHECK(cli("evaluate --ground-truth " + (dir / "gt.csv").string() + " --tracks " +
            (dir / "broken.csv").string()) == 1);
}
