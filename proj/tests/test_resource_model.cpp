#include <doctest.h>

#include <sstream>

#include "ebbiot/pipeline.hpp"
#include "ebbiot/resource_model.hpp"
#include "ebbiot/synth_scene.hpp"

using namespace ebbiot;

namespace {

const ResourceParams kDefaults;

const ReportRow* row(const ResourceReport& r, const std::string& pipeline, const std::string& stage) {
  for (const auto& x : r.rows) {
    if (x.pipeline == pipeline && x.stage == stage) return &x;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("EBBI cost") {
  const auto c = ebbi_cost(kDefaults);
  CHECK(c.ops == doctest::Approx(125280.0).epsilon(1e-12));  // alpha = 0.1 is inexact in binary
  CHECK(c.memory_bits == 86400.0);
  CHECK(bits_to_kb(c.memory_bits) == doctest::Approx(10.8));
  auto p = kDefaults;
  p.alpha = 0;
  CHECK(ebbi_cost(p).ops == 2.0 * 240 * 180);
}

TEST_CASE("NN-filter cost") {
  CHECK(kDefaults.mean_events() == 8640.0);
  const auto c = nn_filt_cost(kDefaults);
  CHECK(c.ops == 276480.0);
  CHECK(c.memory_bits == 691200.0);
  CHECK(c.memory_bits / ebbi_cost(kDefaults).memory_bits == 8.0);
  auto p = kDefaults;
  p.alpha = 0;
  CHECK(nn_filt_cost(p).ops == 0.0);
}

TEST_CASE("region proposal cost") {
  const auto c = rpn_cost(kDefaults);
  CHECK(c.ops == 48000.0);
  CHECK(rpn_ops_unit_histogram(kDefaults) == 45600.0);
  CHECK(c.memory_bits == 13040.0);
  CHECK(bits_to_kb(c.memory_bits) == doctest::Approx(1.63));
  auto p = kDefaults;
  p.s1 = p.s2 = 1;
  CHECK(rpn_cost(p).ops == 3.0 * 240 * 180);
}

TEST_CASE("overlap tracker cost") {
  CHECK(ot_cost(kDefaults).ops == 564.0);
  auto p = kDefaults;
  p.mean_trackers = 0;
  p.step_probability = {0, 0, 0};
  CHECK(ot_cost(p).ops == 0.0);
  p.mean_trackers = 1;
  CHECK(ot_cost(p).ops == 134.0);
}

TEST_CASE("Kalman cost") {
  CHECK(kf_cost(kDefaults).ops == 1200.0);
  auto p = kDefaults;
  p.kf_state_size = p.kf_measurement_size = 1;
  CHECK(kf_cost(p).ops == 21.0);
  p.kf_state_size = p.kf_measurement_size = 0;
  CHECK(kf_cost(p).ops == 0.0);
}

TEST_CASE("EBMS cost") {
  CHECK(ebms_cost(kDefaults).ops == doctest::Approx(252330.0).epsilon(1e-12));
  CHECK(ebms_memory_units(kDefaults) == 3320.0);
  CHECK(bits_to_kb(ebms_cost(kDefaults).memory_bits) == doctest::Approx(3.32));
  auto p = kDefaults;
  p.mean_filtered_events = 0;
  CHECK(ebms_cost(p).ops == 0.0);
}

TEST_CASE("pipeline totals and ratios") {
  const auto ebbiot = pipeline_total(PipelineKind::Ebbiot, kDefaults);
  const auto ebms = pipeline_total(PipelineKind::Ebms, kDefaults);
  CHECK(ebbiot.ops == doctest::Approx(125280.0 + 48000.0 + 564.0).epsilon(1e-12));
  CHECK(ebbiot.memory_bits == 86400.0 + 13040.0 + 128.0 * 8);
  const double mem_ratio = ebms.memory_bits / ebbiot.memory_bits;
  const double ops_ratio = ebms.ops / ebbiot.ops;
  INFO("memory ratio " << mem_ratio << ", compute ratio " << ops_ratio);
  CHECK(mem_ratio == doctest::Approx(7.0).epsilon(0.3));
  CHECK(ops_ratio == doctest::Approx(3.0).epsilon(0.3));
  const auto report = analytic_report(kDefaults);
  CHECK(report.total(PipelineKind::Ebms).ops == ebms.ops);
  CHECK(report.total(PipelineKind::EbbiKf).ops == doctest::Approx(125280.0 + 48000.0 + 1200.0).epsilon(1e-12));
}

TEST_CASE("property: analytic functions are pure") {
  std::ostringstream a, b;
  write_report_csv(a, analytic_report(kDefaults));
  write_report_csv(b, analytic_report(kDefaults));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("pipeline,stage,", 0) == 0);
}

TEST_CASE("parameter validation") {
  auto p = kDefaults;
  p.alpha = 1.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.alpha"), ValidationError);
  p = kDefaults;
  p.beta = 0.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.beta"), ValidationError);
}

TEST_CASE("pipeline names round-trip") {
  for (auto k : all_pipelines()) CHECK(parse_pipeline(to_string(k)) == k);
  CHECK_THROWS_AS(parse_pipeline("yolo"), ValidationError);
}

TEST_CASE("measurement on all-zero frames") {
  PipelineParams params;
  RunOptions opt;
  opt.instrument = true;
  opt.min_frames = 10;
  const auto r = run_pipeline(PipelineKind::Ebbiot, {}, params, opt);
  REQUIRE(r.measurement.stats.frames == 10);
  const PipelineMeasurement runs[] = {r.measurement};
  const auto report = measure(kDefaults, runs);
  REQUIRE(report.has_measurements);
  for (const auto& s : r.measurement.stages) {
    if (s.stage == "ebbi") CHECK(s.counters.increments == 0);
  }
  const auto* ebbi = row(report, "ebbiot", "ebbi");
  REQUIRE(ebbi);
  CHECK(ebbi->analytic_measured.ops == 2.0 * 240 * 180);
  CHECK(ebbi->measured_ops >= 0);
}

TEST_CASE("measured EBBI operations agree with the model under the measured activity") {
  const auto scene = generate(preset("eng-like"));
  PipelineParams params;
  RunOptions opt;
  opt.instrument = true;
  const auto r = run_pipeline(PipelineKind::Ebbiot, scene.events, params, opt);
  const PipelineMeasurement runs[] = {r.measurement};
  const auto report = measure(kDefaults, runs);
  const auto* ebbi = row(report, "ebbiot", "ebbi");
  REQUIRE(ebbi);
  const double ratio = ebbi->measured_ops / ebbi->analytic_measured.ops;
  INFO("measured alpha " << report.measured_params[0].second.alpha << ", measured/model "
                            << ratio);
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 2.0);

  // Every instrumented stage recorded work.
  for (const auto& s : r.measurement.stages) CHECK(s.counters.total() > 0);
}
