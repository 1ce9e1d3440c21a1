#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "scarecrow/image.hpp"

namespace scarecrow {

Image::Image(int w, int h, float fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw ShapeError("image dimensions must be >= 1");
  rgb.assign(static_cast<std::size_t>(w) * h * 3, fill);
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) {
      throw PpmError(PpmError::Code::truncated, std::string("ppm: header ends before ") + field);
    }
    if (!std::isdigit(bytes_[pos_])) {
      throw PpmError(PpmError::Code::bad_header, std::string("ppm: expected ") + field +
                                                     " at byte " + std::to_string(pos_));
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) {
        throw PpmError(PpmError::Code::bad_header, std::string("ppm: ") + field + " too large");
      }
      ++pos_;
    }
    return v;
  }

  std::size_t pos_ = 0;

 private:
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

Image read_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw PpmError(PpmError::Code::bad_magic, "ppm: expected magic P6");
  }
  HeaderReader rd(bytes);
  rd.pos_ = 2;
  const long width = rd.number("width");
  const long height = rd.number("height");
  const long maxval = rd.number("maxval");
  if (width < 1 || height < 1) {
    throw PpmError(PpmError::Code::bad_header, "ppm: width and height must be >= 1");
  }
  if (maxval < 1 || maxval > 65535) {
    throw PpmError(PpmError::Code::bad_maxval,
                   "ppm: maxval " + std::to_string(maxval) + " outside [1,65535]");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (rd.pos_ >= bytes.size() || !std::isspace(bytes[rd.pos_])) {
    throw PpmError(PpmError::Code::truncated, "ppm: missing raster");
  }
  ++rd.pos_;

  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t samples = static_cast<std::size_t>(width) * height * 3;
  const std::size_t need = samples * sample_bytes;
  if (bytes.size() - rd.pos_ < need) {
    throw PpmError(PpmError::Code::truncated,
                   "ppm: raster has " + std::to_string(bytes.size() - rd.pos_) +
                       " bytes, expected " + std::to_string(need));
  }
  Image img(static_cast<int>(width), static_cast<int>(height));
  const auto* p = bytes.data() + rd.pos_;
  const float denom = static_cast<float>(maxval);
  for (std::size_t i = 0; i < samples; ++i) {
    unsigned v = sample_bytes == 1 ? p[i] : (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
    img.rgb[i] = std::min(1.0f, static_cast<float>(v) / denom);
  }
  return img;
}

Image read_ppm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_ppm(bytes);
}

std::vector<std::uint8_t> write_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.rgb.size());
  for (float v : img.rgb) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  return out;
}

void write_ppm_file(const std::string& path, const Image& img) {
  const auto bytes = write_ppm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (img.width == width && img.height == height) return img;
  Image out(width, height);
  const float sx = static_cast<float>(img.width) / width;
  const float sy = static_cast<float>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const float fy = std::clamp((y + 0.5f) * sy - 0.5f, 0.0f, static_cast<float>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const float fx = std::clamp((x + 0.5f) * sx - 0.5f, 0.0f, static_cast<float>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const float wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const float top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
        const float bot = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Tensor3 to_tensor(const Image& img) {
  Tensor3 t(img.height, img.width, 3);
  t.data = img.rgb;
  return t;
}

}  // namespace scarecrow
