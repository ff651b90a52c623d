#include "ebbiot/event_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace ebbiot {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <std::size_t N>
std::array<std::string_view, N> split_fields(std::string_view line, std::string_view what) {
  std::array<std::string_view, N> out{};
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto piece = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start);
    if (n == N) throw ParseError(std::string(what) + ": too many fields");
    out[n++] = trim(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != N) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(N) + " fields, got " +
                     std::to_string(n));
  }
  return out;
}

template <typename T>
T parse_int(std::string_view text, std::string_view field) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("malformed field '" + std::string(field) + "': '" + std::string(text) + "'");
  }
  return value;
}

bool is_skippable(std::string_view line, std::string_view header) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#' || t == header;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

Event parse_event_csv(std::string_view line, const SensorConfig& cfg) {
  const auto f = split_fields<4>(trim(line), "event row");
  const auto t = parse_int<std::uint64_t>(f[0], "t");
  const auto x = parse_int<long long>(f[1], "x");
  const auto y = parse_int<long long>(f[2], "y");
  const auto p = parse_int<int>(f[3], "p");
  if (p != 1 && p != -1) throw ParseError("malformed field 'p': polarity must be 1 or -1");
  if (x < 0 || x >= cfg.width) {
    throw BoundsError("x=" + std::to_string(x) + " outside [0," + std::to_string(cfg.width) + ")");
  }
  if (y < 0 || y >= cfg.height) {
    throw BoundsError("y=" + std::to_string(y) + " outside [0," + std::to_string(cfg.height) + ")");
  }
  return Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
               static_cast<std::int8_t>(p)};
}

std::vector<Event> read_events_csv(std::istream& in, const SensorConfig& cfg) {
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line, kEventCsvHeader)) continue;
    try {
      events.push_back(parse_event_csv(line, cfg));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const BoundsError& e) {
      throw BoundsError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

void write_events_csv(std::ostream& out, std::span<const Event> events) {
  out << kEventCsvHeader << '\n';
  for (const auto& e : events) {
    out << e.t << ',' << e.x << ',' << e.y << ',' << int(e.p) << '\n';
  }
}

std::vector<Event> read_events_binary(std::istream& in, const SensorConfig& cfg) {
  std::vector<Event> events;
  std::array<unsigned char, kBinaryEventSize> rec{};
  std::size_t index = 0;
  while (in.read(reinterpret_cast<char*>(rec.data()), rec.size())) {
    Event e;
    e.t = std::uint64_t(rec[0]) | std::uint64_t(rec[1]) << 8 | std::uint64_t(rec[2]) << 16 |
          std::uint64_t(rec[3]) << 24;
    e.x = static_cast<std::uint16_t>(rec[4] | rec[5] << 8);
    e.y = static_cast<std::uint16_t>(rec[6] | rec[7] << 8);
    e.p = static_cast<std::int8_t>(rec[8]);
    if (e.p != 1 && e.p != -1) {
      throw ParseError("record " + std::to_string(index) + ": polarity must be 1 or -1");
    }
    if (!cfg.contains(e.x, e.y)) {
      throw BoundsError("record " + std::to_string(index) + ": address outside sensor");
    }
    events.push_back(e);
    ++index;
  }
  if (in.gcount() != 0) {
    throw ParseError("truncated binary record at index " + std::to_string(index));
  }
  return events;
}

void write_events_binary(std::ostream& out, std::span<const Event> events) {
  std::array<unsigned char, kBinaryEventSize> rec{};
  for (const auto& e : events) {
    if (e.t > 0xFFFFFFFFull) throw ValidationError("timestamp does not fit the 32-bit record");
    rec[0] = e.t & 0xFF;
    rec[1] = (e.t >> 8) & 0xFF;
    rec[2] = (e.t >> 16) & 0xFF;
    rec[3] = (e.t >> 24) & 0xFF;
    rec[4] = e.x & 0xFF;
    rec[5] = (e.x >> 8) & 0xFF;
    rec[6] = e.y & 0xFF;
    rec[7] = (e.y >> 8) & 0xFF;
    rec[8] = static_cast<unsigned char>(e.p);
    rec[9] = 0;
    out.write(reinterpret_cast<const char*>(rec.data()), rec.size());
  }
}

std::vector<Event> read_events(const std::filesystem::path& path, const SensorConfig& cfg) {
  if (path.extension() == ".bin") {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    return read_events_binary(in, cfg);
  }
  auto in = open_in(path);
  return read_events_csv(in, cfg);
}

void write_events(const std::filesystem::path& path, std::span<const Event> events) {
  if (path.extension() == ".bin") {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    write_events_binary(out, events);
  } else {
    auto out = open_out(path);
    write_events_csv(out, events);
  }
}

std::vector<FrameSlice> partition_frames(std::span<const Event> stream, const SensorConfig& cfg) {
  std::vector<FrameSlice> frames;
  if (stream.empty()) return frames;
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].t < stream[i - 1].t) {
      throw OrderingError("timestamp decreases at event " + std::to_string(i), i);
    }
  }
  const std::uint64_t last = stream.back().t / cfg.frame_us;
  frames.reserve(last + 1);
  std::size_t begin = 0;
  for (std::uint64_t k = 0; k <= last; ++k) {
    const std::uint64_t end_t = (k + 1) * cfg.frame_us;
    std::size_t end = begin;
    while (end < stream.size() && stream[end].t < end_t) ++end;
    frames.push_back({k, stream.subspan(begin, end - begin)});
    begin = end;
  }
  return frames;
}

BoxTable read_boxes_csv(std::istream& in) {
  BoxTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line, kBoxCsvHeader)) continue;
    const auto where = "line " + std::to_string(line_no);
    try {
      const auto f = split_fields<6>(trim(line), "box row");
      const auto frame = parse_int<std::uint64_t>(f[0], "frame");
      LabeledBox lb;
      lb.track_id = parse_int<int>(f[1], "track_id");
      lb.box = {parse_int<int>(f[2], "x"), parse_int<int>(f[3], "y"), parse_int<int>(f[4], "w"),
                parse_int<int>(f[5], "h")};
      if (lb.box.w <= 0 || lb.box.h <= 0) {
        throw ValidationError(where + ": box width and height must be positive");
      }
      table[frame].push_back(lb);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return table;
}

BoxTable read_boxes_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_boxes_csv(in);
}

void write_boxes_csv(std::ostream& out, const BoxTable& table) {
  out << kBoxCsvHeader << '\n';
  for (const auto& [frame, boxes] : table) {
    for (const auto& lb : boxes) {
      out << frame << ',' << lb.track_id << ',' << lb.box.x << ',' << lb.box.y << ','
          << lb.box.w << ',' << lb.box.h << '\n';
    }
  }
}

void write_boxes_csv(const std::filesystem::path& path, const BoxTable& table) {
  auto out = open_out(path);
  write_boxes_csv(out, table);
}

}  // namespace ebbiot
