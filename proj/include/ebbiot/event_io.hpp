#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "ebbiot/types.hpp"

namespace ebbiot {

/// Events of one readout period, viewing into the caller's stream.
struct FrameSlice {
  std::uint64_t index = 0;
  std::span<const Event> events;
};

/// Boxes keyed by frame index. Shared by ground truth and tracker output.
using BoxTable = std::map<std::uint64_t, std::vector<LabeledBox>>;

inline constexpr std::string_view kEventCsvHeader = "t,x,y,p";
inline constexpr std::string_view kBoxCsvHeader = "frame,track_id,x,y,w,h";
inline constexpr std::size_t kBinaryEventSize = 10;

// Parses one "t,x,y,p" row. Throws ParseError naming the offending field,
// BoundsError when the address falls outside the sensor.
Event parse_event_csv(std::string_view line, const SensorConfig& cfg);

std::vector<Event> read_events_csv(std::istream& in, const SensorConfig& cfg);
void write_events_csv(std::ostream& out, std::span<const Event> events);

// Packed little-endian records: u32 t, u16 x, u16 y, i8 p, u8 pad.
std::vector<Event> read_events_binary(std::istream& in, const SensorConfig& cfg);
void write_events_binary(std::ostream& out, std::span<const Event> events);

/// Dispatches on extension: ".bin" is the packed format, anything else CSV.
std::vector<Event> read_events(const std::filesystem::path& path, const SensorConfig& cfg);
void write_events(const std::filesystem::path& path, std::span<const Event> events);

/// Splits a time-ordered stream into half-open periods [k*t_F, (k+1)*t_F).
/// Empty periods up to the last event are emitted too.
std::vector<FrameSlice> partition_frames(std::span<const Event> stream, const SensorConfig& cfg);

BoxTable read_boxes_csv(std::istream& in);
BoxTable read_boxes_csv(const std::filesystem::path& path);
void write_boxes_csv(std::ostream& out, const BoxTable& table);
void write_boxes_csv(const std::filesystem::path& path, const BoxTable& table);

}  // namespace ebbiot
