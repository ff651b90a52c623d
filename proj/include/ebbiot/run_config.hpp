#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebbiot/pipeline.hpp"
#include "ebbiot/resource_model.hpp"

namespace ebbiot {

/// Invalid configuration; field() is the dotted key at fault.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& what)
      : ValidationError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Resolved configuration of one `run`.
///
/// Text form is one `key=value` per line with dotted keys ("rpn.s1=6");
/// blank lines and lines starting with '#' are ignored. Every key has a
/// default, so an empty file is a valid configuration apart from the input.
struct RunConfig {
  PipelineParams params;
  std::vector<PipelineKind> pipelines{PipelineKind::Ebbiot};

  std::string input_events;
  std::string input_preset;
  std::string ground_truth;
  std::optional<std::uint64_t> seed;  // overrides the preset seed

  std::string output_dir = "out";
  bool instrument = false;
  bool debug_frames = false;

  std::vector<double> iou_thresholds{0.3, 0.4, 0.5, 0.6, 0.7};
  std::uint64_t eval_skip_frames = 0;

  // Operating point of the analytic resource model. Geometry, patch size,
  // downsampling factors and slot counts are taken from the fields above.
  ResourceParams model;

  /// Assigns one key. Throws ConfigError naming the key on an unknown key or
  /// a malformed value.
  void set(std::string_view key, std::string_view value);

  /// Parameter checks plus the input rules: exactly one of input.events and
  /// input.preset, and every referenced file exists.
  void validate() const;
  void validate_params() const;

  ResourceParams resource_params() const;
};

/// Every recognised key, in manifest order.
const std::vector<std::string>& config_keys();

/// Parses `key=value` lines onto `base`.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Value of `key` in canonical text form.
std::string config_value(const RunConfig& cfg, std::string_view key);

/// Writes every key; parsing the result yields an identical configuration.
void write_manifest(std::ostream& out, const RunConfig& cfg);

}  // namespace ebbiot
