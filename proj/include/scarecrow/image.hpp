#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scarecrow/tensor.hpp"

namespace scarecrow {

/// RGB image with interleaved intensities in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(int w, int h, float fill = 0.0f);

  float& at(int x, int y, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool empty() const { return rgb.empty(); }

  bool operator==(const Image&) const = default;
};

struct Frame {
  std::uint64_t index = 0;
  std::int64_t timestamp_ms = 0;
  Image image;
};

class PpmError : public std::runtime_error {
 public:
  enum class Code { bad_magic, bad_header, bad_maxval, truncated };

  PpmError(Code code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Parses a binary P6 image. Comments (`#` to end of line) are allowed in the header.
Image read_ppm(std::span<const std::uint8_t> bytes);
Image read_ppm_file(const std::string& path);

/// Encodes as P6 with maxval 255.
std::vector<std::uint8_t> write_ppm(const Image& img);
void write_ppm_file(const std::string& path, const Image& img);

Image resize_bilinear(const Image& img, int width, int height);
Tensor3 to_tensor(const Image& img);

}  // namespace scarecrow
