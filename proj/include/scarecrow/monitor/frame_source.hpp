#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scarecrow/image.hpp"

namespace scarecrow {

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Next frame, or nullopt at end of stream.
  virtual std::optional<Frame> next() = 0;
};

/// PPM files from a directory (sorted by name) or a manifest listing paths.
/// Frame index is the position in the list, so a skipped file leaves a gap.
class FileFrameSource : public FrameSource {
 public:
  using WarningFn = std::function<void(const std::string&)>;

  FileFrameSource(std::vector<std::string> paths, double fps, WarningFn on_warning = {},
                  bool load_images = true);

  /// `path` may be a directory of `*.ppm` or a manifest file. Blank lines and
  /// lines starting with `#` are skipped; relative entries resolve against the
  /// manifest's directory.
  static FileFrameSource open(const std::string& path, double fps, WarningFn on_warning = {},
                              bool load_images = true);

  std::optional<Frame> next() override;

  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
  double fps_;
  WarningFn on_warning_;
  bool load_images_;
  std::size_t pos_ = 0;
};

/// Deterministic noise frames, used by `bench`.
class SyntheticFrameSource : public FrameSource {
 public:
  SyntheticFrameSource(std::size_t count, int width, int height, double fps, std::uint64_t seed = 1);

  std::optional<Frame> next() override;

 private:
  std::size_t count_;
  int width_;
  int height_;
  double fps_;
  std::uint64_t seed_;
  std::size_t pos_ = 0;
};

std::int64_t frame_timestamp_ms(std::uint64_t index, double fps);

std::vector<std::string> list_ppm_directory(const std::string& dir);
std::vector<std::string> read_manifest(const std::string& path);

}  // namespace scarecrow
