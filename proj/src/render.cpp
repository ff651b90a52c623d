#include "ebbiot/render.hpp"

#include <cstdio>
#include <fstream>

namespace ebbiot {

void RgbImage::outline(const BoundingBox& box, Rgb c) {
  if (box.empty()) return;
  for (int x = box.x; x < box.right(); ++x) {
    set(x, box.y, c);
    set(x, box.top() - 1, c);
  }
  for (int y = box.y; y < box.top(); ++y) {
    set(box.x, y, c);
    set(box.right() - 1, y, c);
  }
}

RgbImage render_frame(const BinaryFrame& frame, std::span<const RegionProposal> proposals,
                      std::span<const TrackOutput> tracks, const RoeMask& roe,
                      const SensorConfig& cfg) {
  RgbImage img(cfg.width, cfg.height);
  const bool has_bits = frame.width() == cfg.width && frame.height() == cfg.height;
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const bool bit = has_bits && frame.get(x, y);
      if (bit) img.set(x, y, kSetPixel);
    }
  }
  for (const auto& r : roe.clipped(cfg).regions) {
    for (int y = r.y; y < r.top(); ++y) {
      for (int x = r.x; x < r.right(); ++x) {
        img.set(x, y, img.at(x, y) == kSetPixel ? kExcludedSet : kExcluded);
      }
    }
  }
  for (const auto& p : proposals) img.outline(p.box, kProposalColor);
  for (const auto& t : tracks) img.outline(t.box, kTrackColor);
  return img;
}

namespace {

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  auto out = open_binary(path);
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (const auto& p : img.pixels()) {
    const char rgb[3] = {char(p.r), char(p.g), char(p.b)};
    out.write(rgb, 3);
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_pbm(const std::filesystem::path& path, const BinaryFrame& frame) {
  auto out = open_binary(path);
  out << "P4\n" << frame.width() << ' ' << frame.height() << '\n';
  std::vector<char> row((frame.width() + 7) / 8);
  for (int y = 0; y < frame.height(); ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < frame.width(); ++x) {
      if (frame.get(x, y)) row[x / 8] = char(row[x / 8] | (0x80 >> (x % 8)));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::size_t render_debug(std::span<const FrameRecord> records, const RoeMask& roe,
                         const SensorConfig& cfg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
  std::size_t written = 0;
  char name[32];
  for (const auto& rec : records) {
    std::snprintf(name, sizeof name, "frame_%06llu", static_cast<unsigned long long>(rec.index));
    const auto img = render_frame(rec.frames.filtered, rec.proposals, rec.tracks, roe, cfg);
    write_ppm(dir / (std::string(name) + ".ppm"), img);
    ++written;
    if (rec.frames.raw.width() > 0) {
      write_pbm(dir / (std::string(name) + ".pbm"), rec.frames.raw);
      ++written;
    }
  }
  return written;
}

}  // namespace ebbiot
