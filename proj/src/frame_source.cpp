#include "scarecrow/monitor/frame_source.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace fs = std::filesystem;

namespace scarecrow {

std::int64_t frame_timestamp_ms(std::uint64_t index, double fps) {
  return std::llround(static_cast<double>(index) * 1000.0 / fps);
}

std::vector<std::string> list_ppm_directory(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    fs::path p = line.substr(b, e - b + 1);
    if (p.is_relative()) p = base / p;
    out.push_back(p.string());
  }
  return out;
}

FileFrameSource::FileFrameSource(std::vector<std::string> paths, double fps, WarningFn on_warning,
                                 bool load_images)
    : paths_(std::move(paths)), fps_(fps), on_warning_(std::move(on_warning)),
      load_images_(load_images) {
  if (!(fps > 0.0)) throw std::invalid_argument("frame source: fps must be positive");
}

FileFrameSource FileFrameSource::open(const std::string& path, double fps, WarningFn on_warning,
                                      bool load_images) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    return FileFrameSource(list_ppm_directory(path), fps, std::move(on_warning), load_images);
  }
  if (!fs::exists(path, ec)) throw std::runtime_error("frame source not found: " + path);
  return FileFrameSource(read_manifest(path), fps, std::move(on_warning), load_images);
}

std::optional<Frame> FileFrameSource::next() {
  while (pos_ < paths_.size()) {
    const std::size_t idx = pos_++;
    Frame f;
    f.index = idx;
    f.timestamp_ms = frame_timestamp_ms(idx, fps_);
    try {
      if (load_images_) {
        f.image = read_ppm_file(paths_[idx]);
      } else if (!fs::is_regular_file(paths_[idx])) {
        throw std::runtime_error("not a readable file");
      }
    } catch (const std::exception& e) {
      if (on_warning_) on_warning_("skipping frame " + paths_[idx] + ": " + e.what());
      continue;
    }
    return f;
  }
  return std::nullopt;
}

SyntheticFrameSource::SyntheticFrameSource(std::size_t count, int width, int height, double fps,
                                           std::uint64_t seed)
    : count_(count), width_(width), height_(height), fps_(fps), seed_(seed) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("synthetic source: bad frame size");
  if (!(fps > 0.0)) throw std::invalid_argument("synthetic source: fps must be positive");
}

std::optional<Frame> SyntheticFrameSource::next() {
  if (pos_ >= count_) return std::nullopt;
  Frame f;
  f.index = pos_;
  f.timestamp_ms = frame_timestamp_ms(pos_, fps_);
  f.image = Image(width_, height_);
  std::mt19937_64 rng(seed_ + pos_);
  for (float& v : f.image.rgb) v = static_cast<float>(rng() >> 40) / static_cast<float>(1 << 24);
  ++pos_;
  return f;
}

}  // namespace scarecrow
