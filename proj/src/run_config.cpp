#include "ebbiot/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "ebbiot/synth_scene.hpp"

namespace ebbiot {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
  text = trim(text);
  T value{};
  const char* end = text.data() + text.size();
  if constexpr (std::is_unsigned_v<T>) {
    if (!text.empty() && text.front() == '-') throw ConfigError(key, "expected a non-negative integer");
  }
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "malformed value '" + std::string(text) + "'");
  }
  return value;
}

template <class T>
std::string format_number(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(text) + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, std::string_view text) {
  std::vector<T> out;
  for (auto part : split(text, ',')) out.push_back(parse_number<T>(key, part));
  return out;
}

template <class T>
std::string format_list(const T& values) {
  std::string s;
  for (const auto& v : values) s += (s.empty() ? "" : ",") + format_number(v);
  return s;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Access>
Field number(std::string key, Access access) {
  return {key,
          [key, access](RunConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = parse_number<T>(key, v);
          },
          [access](const RunConfig& c) { return format_number(access(c)); }};
}

template <class Access>
Field flag(std::string key, Access access) {
  return {key, [key, access](RunConfig& c, std::string_view v) { access(c) = parse_bool(key, v); },
          [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); }};
}

template <class Access>
Field text(std::string key, Access access) {
  return {key, [access](RunConfig& c, std::string_view v) { access(c) = std::string(trim(v)); },
          [access](const RunConfig& c) { return access(c); }};
}

template <class Access>
Field triple(std::string key, Access access) {
  return {key,
          [key, access](RunConfig& c, std::string_view v) {
            const auto values = parse_list<double>(key, v);
            if (values.size() != 3) throw ConfigError(key, "expected three comma-separated values");
            std::copy(values.begin(), values.end(), access(c).begin());
          },
          [access](const RunConfig& c) { return format_list(access(c)); }};
}

#define EBBIOT_ACCESS(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(number("sensor.width", EBBIOT_ACCESS(params.sensor.width)));
    f.push_back(number("sensor.height", EBBIOT_ACCESS(params.sensor.height)));
    f.push_back(number("sensor.frame_us", EBBIOT_ACCESS(params.sensor.frame_us)));
    f.push_back(number("sensor.timestamp_bits", EBBIOT_ACCESS(params.sensor.timestamp_bits)));
    f.push_back(number("filter.p", EBBIOT_ACCESS(params.filter.patch)));
    f.push_back(number("filter.nn_window_us", EBBIOT_ACCESS(params.filter.nn_window_us)));
    f.push_back(number("rpn.s1", EBBIOT_ACCESS(params.rpn.s1)));
    f.push_back(number("rpn.s2", EBBIOT_ACCESS(params.rpn.s2)));
    f.push_back(number("rpn.threshold", EBBIOT_ACCESS(params.rpn.threshold)));
    f.push_back(number("rpn.min_pixels", EBBIOT_ACCESS(params.rpn.min_pixels)));
    f.push_back(number("rpn.max_proposals", EBBIOT_ACCESS(params.rpn.max_proposals)));
    f.push_back(number("ot.max_trackers", EBBIOT_ACCESS(params.ot.max_trackers)));
    f.push_back(number("ot.overlap_fraction", EBBIOT_ACCESS(params.ot.overlap_fraction)));
    f.push_back(number("ot.proposal_weight", EBBIOT_ACCESS(params.ot.proposal_weight)));
    f.push_back(number("ot.velocity_smoothing", EBBIOT_ACCESS(params.ot.velocity_smoothing)));
    f.push_back(number("ot.occlusion_lookahead", EBBIOT_ACCESS(params.ot.occlusion_lookahead)));
    f.push_back(number("ot.max_unmatched", EBBIOT_ACCESS(params.ot.max_unmatched)));
    f.push_back(number("ot.max_unmatched_occluded", EBBIOT_ACCESS(params.ot.max_unmatched_occluded)));
    f.push_back(number("ot.growth_limit", EBBIOT_ACCESS(params.ot.growth_limit)));
    f.push_back(number("ot.min_relative_speed", EBBIOT_ACCESS(params.ot.min_relative_speed)));
    f.push_back(number("ot.lock_in", EBBIOT_ACCESS(params.ot.lock_in)));
    f.push_back(number("kf.process_noise", EBBIOT_ACCESS(params.kf.process_noise)));
    f.push_back(number("kf.measurement_noise", EBBIOT_ACCESS(params.kf.measurement_noise)));
    f.push_back(number("kf.initial_velocity_variance", EBBIOT_ACCESS(params.kf.initial_velocity_variance)));
    f.push_back(number("kf.overlap_fraction", EBBIOT_ACCESS(params.kf.overlap_fraction)));
    f.push_back(number("kf.max_unmatched", EBBIOT_ACCESS(params.kf.max_unmatched)));
    f.push_back(number("kf.max_tracks", EBBIOT_ACCESS(params.kf.max_tracks)));
    f.push_back(number("kf.lock_in", EBBIOT_ACCESS(params.kf.lock_in)));
    f.push_back(number("ebms.radius", EBBIOT_ACCESS(params.ebms.radius)));
    f.push_back(number("ebms.learning_rate", EBBIOT_ACCESS(params.ebms.learning_rate)));
    f.push_back(number("ebms.seed_count", EBBIOT_ACCESS(params.ebms.seed_count)));
    f.push_back(number("ebms.timeout_us", EBBIOT_ACCESS(params.ebms.timeout_us)));
    f.push_back(number("ebms.merge_distance", EBBIOT_ACCESS(params.ebms.merge_distance)));
    f.push_back(number("ebms.box_width", EBBIOT_ACCESS(params.ebms.box_width)));
    f.push_back(number("ebms.box_height", EBBIOT_ACCESS(params.ebms.box_height)));
    f.push_back(number("ebms.max_clusters", EBBIOT_ACCESS(params.ebms.max_clusters)));
    f.push_back(number("ebms.history", EBBIOT_ACCESS(params.ebms.history)));

    f.push_back({"roe",
                 [](RunConfig& c, std::string_view v) {
                   c.params.roe.regions.clear();
                   for (auto part : split(v, ';')) {
                     const auto xs = parse_list<int>("roe", part);
                     if (xs.size() != 4) throw ConfigError("roe", "each region needs x,y,w,h");
                     c.params.roe.regions.push_back({xs[0], xs[1], xs[2], xs[3]});
                   }
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (const auto& r : c.params.roe.regions) {
                     s += (s.empty() ? "" : ";") + format_list(std::vector<int>{r.x, r.y, r.w, r.h});
                   }
                   return s;
                 }});
    f.push_back({"pipelines",
                 [](RunConfig& c, std::string_view v) {
                   c.pipelines.clear();
                   for (auto part : split(v, ',')) {
                     try {
                       c.pipelines.push_back(parse_pipeline(std::string(part)));
                     } catch (const ValidationError& e) {
                       throw ConfigError("pipelines", e.what());
                     }
                   }
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (auto k : c.pipelines) s += (s.empty() ? "" : ",") + to_string(k);
                   return s;
                 }});

    f.push_back(text("input.events", EBBIOT_ACCESS(input_events)));
    f.push_back(text("input.preset", EBBIOT_ACCESS(input_preset)));
    f.push_back(text("input.ground_truth", EBBIOT_ACCESS(ground_truth)));
    f.push_back({"input.seed",
                 [](RunConfig& c, std::string_view v) {
                   if (trim(v).empty()) {
                     c.seed.reset();
                   } else {
                     c.seed = parse_number<std::uint64_t>("input.seed", v);
                   }
                 },
                 [](const RunConfig& c) { return c.seed ? format_number(*c.seed) : std::string(); }});
    f.push_back(text("output.dir", EBBIOT_ACCESS(output_dir)));
    f.push_back(flag("output.instrument", EBBIOT_ACCESS(instrument)));
    f.push_back(flag("output.debug_frames", EBBIOT_ACCESS(debug_frames)));
    f.push_back({"eval.iou_thresholds",
                 [](RunConfig& c, std::string_view v) {
                   c.iou_thresholds = parse_list<double>("eval.iou_thresholds", v);
                 },
                 [](const RunConfig& c) { return format_list(c.iou_thresholds); }});
    f.push_back(number("eval.skip_frames", EBBIOT_ACCESS(eval_skip_frames)));

    f.push_back(number("model.alpha", EBBIOT_ACCESS(model.alpha)));
    f.push_back(number("model.beta", EBBIOT_ACCESS(model.beta)));
    f.push_back(number("model.mean_trackers", EBBIOT_ACCESS(model.mean_trackers)));
    f.push_back(triple("model.step_probability", EBBIOT_ACCESS(model.step_probability)));
    f.push_back(triple("model.step_cost", EBBIOT_ACCESS(model.step_cost)));
    f.push_back(number("model.kf_state_size", EBBIOT_ACCESS(model.kf_state_size)));
    f.push_back(number("model.kf_measurement_size", EBBIOT_ACCESS(model.kf_measurement_size)));
    f.push_back(number("model.mean_filtered_events", EBBIOT_ACCESS(model.mean_filtered_events)));
    f.push_back(number("model.mean_clusters", EBBIOT_ACCESS(model.mean_clusters)));
    f.push_back(number("model.gamma_merge", EBBIOT_ACCESS(model.gamma_merge)));
    return f;
  }();
  return table;
}

#undef EBBIOT_ACCESS

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(std::string(key), "unknown configuration key");
}

void require_file(const std::string& key, const std::string& path) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    throw ConfigError(key, "file '" + path + "' does not exist");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  field(trim(key)).set(*this, value);
}

std::string config_value(const RunConfig& cfg, std::string_view key) { return field(key).get(cfg); }

ResourceParams RunConfig::resource_params() const {
  ResourceParams r = model;
  r.width = params.sensor.width;
  r.height = params.sensor.height;
  r.patch = params.filter.patch;
  r.timestamp_bits = params.sensor.timestamp_bits;
  r.s1 = params.rpn.s1;
  r.s2 = params.rpn.s2;
  r.max_trackers = static_cast<int>(params.ot.max_trackers);
  r.max_clusters = static_cast<int>(params.ebms.max_clusters);
  return r;
}

void RunConfig::validate_params() const {
  params.validate();
  if (params.rpn.s1 > params.sensor.width) throw ConfigError("rpn.s1", "exceeds sensor.width");
  if (params.rpn.s2 > params.sensor.height) throw ConfigError("rpn.s2", "exceeds sensor.height");
  if (pipelines.empty()) throw ConfigError("pipelines", "at least one pipeline is required");
  if (iou_thresholds.empty()) throw ConfigError("eval.iou_thresholds", "at least one threshold is required");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    if (!(iou_thresholds[i] >= 0.0 && iou_thresholds[i] < 1.0)) {
      throw ConfigError("eval.iou_thresholds", "thresholds must lie in [0,1)");
    }
    if (i > 0 && iou_thresholds[i] <= iou_thresholds[i - 1]) {
      throw ConfigError("eval.iou_thresholds", "thresholds must be strictly ascending");
    }
  }
  resource_params().validate();
}

void RunConfig::validate() const {
  validate_params();
  if (input_events.empty() == input_preset.empty()) {
    throw ConfigError("input", input_events.empty()
                                   ? "missing input: set input.events or input.preset"
                                   : "input.events and input.preset are mutually exclusive");
  }
  if (!input_preset.empty() && !ground_truth.empty()) {
    throw ConfigError("input.ground_truth", "presets carry their own ground truth");
  }
  if (!input_preset.empty()) {
    try {
      preset(input_preset);
    } catch (const ValidationError& e) {
      throw ConfigError("input.preset", e.what());
    }
  }
  require_file("input.events", input_events);
  require_file("input.ground_truth", ground_truth);
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key=value");
    }
    base.set(body.substr(0, eq), body.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

void write_manifest(std::ostream& out, const RunConfig& cfg) {
  for (const auto& f : fields()) out << f.key << '=' << f.get(cfg) << '\n';
}

}  // namespace ebbiot
