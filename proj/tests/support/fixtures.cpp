#include "fixtures.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace fixture {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          ("scarecrow-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++) + "-" + std::to_string(stamp));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::str(const std::string& child) const {
  return child.empty() ? path_.string() : (path_ / child).string();
}

std::string data_path(const std::string& name) {
  return (fs::path(SCARECROW_TEST_DATA_DIR) / name).string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const std::string s = read_text(path);
  return {s.begin(), s.end()};
}

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

scarecrow::Image pattern_image(int width, int height) {
  scarecrow::Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int q = ((x * 7 + y * 3) % 256);
      img.at(x, y, 0) = static_cast<float>(x * 255 / std::max(1, width - 1)) / 255.0f;
      img.at(x, y, 1) = static_cast<float>(y * 255 / std::max(1, height - 1)) / 255.0f;
      img.at(x, y, 2) = static_cast<float>(q) / 255.0f;
      if (x > width / 4 && x < width / 2 && y > height / 3 && y < 2 * height / 3) {
        img.at(x, y, 0) = img.at(x, y, 1) = 1.0f;
      }
    }
  }
  return img;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

scarecrow::BoundingBox random_box(std::mt19937_64& rng, double min_side) {
  const double w = uniform(rng, min_side, 1.0);
  const double h = uniform(rng, min_side, 1.0);
  const double x = uniform(rng, 0.0, 1.0 - w);
  const double y = uniform(rng, 0.0, 1.0 - h);
  return {x, y, x + w, y + h};
}

scarecrow::BoundingBox random_lattice_box(std::mt19937_64& rng, int grid) {
  std::uniform_int_distribution<int> pick(0, grid);
  auto axis = [&] {
    int a = pick(rng), b = pick(rng);
    while (a == b) b = pick(rng);
    return std::pair{std::min(a, b), std::max(a, b)};
  };
  const auto [x0, x1] = axis();
  const auto [y0, y1] = axis();
  const double g = grid;
  return {x0 / g, y0 / g, x1 / g, y1 / g};
}

std::string voc_document(const std::string& filename, int width, int height,
                         const std::vector<scarecrow::AnnotatedObject>& objects) {
  std::ostringstream x;
  x << "<annotation>\n"
    << "\t<folder>images</folder>\n"
    << "\t<filename>" << filename << "</filename>\n"
    << "\t<size>\n\t\t<width>" << width << "</width>\n\t\t<height>" << height
    << "</height>\n\t\t<depth>3</depth>\n\t</size>\n"
    << "\t<segmented>0</segmented>\n";
  for (const auto& o : objects) {
    x << "\t<object>\n\t\t<name>" << o.label << "</name>\n\t\t<pose>Unspecified</pose>\n"
      << "\t\t<truncated>0</truncated>\n\t\t<difficult>0</difficult>\n\t\t<bndbox>\n"
      << "\t\t\t<xmin>" << o.box.xmin << "</xmin>\n\t\t\t<ymin>" << o.box.ymin << "</ymin>\n"
      << "\t\t\t<xmax>" << o.box.xmax << "</xmax>\n\t\t\t<ymax>" << o.box.ymax << "</ymax>\n"
      << "\t\t</bndbox>\n\t</object>\n";
  }
  x << "</annotation>\n";
  return x.str();
}

void write_dataset(const fs::path& root, const std::vector<scarecrow::AnnotatedImage>& images,
                   bool with_images) {
  fs::create_directories(root / "annotations");
  fs::create_directories(root / "images");
  for (const auto& img : images) {
    const std::string stem = fs::path(img.filename).stem().string();
    write_text((root / "annotations" / (stem + ".xml")).string(), scarecrow::serialize_voc(img));
    if (with_images) {
      scarecrow::write_ppm_file((root / "images" / (stem + ".ppm")).string(),
                                pattern_image(16, 16));
    }
  }
}

std::vector<scarecrow::AnnotatedImage> single_object_images(std::size_t n,
                                                            const std::vector<std::string>& labels) {
  std::vector<scarecrow::AnnotatedImage> out;
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04zu.ppm", i);
    scarecrow::AnnotatedImage a;
    a.filename = name;
    a.width = 400;
    a.height = 400;
    a.objects.push_back({labels[i % labels.size()], {48, 24, 280, 360}});
    out.push_back(a);
  }
  return out;
}

void write_frames(const fs::path& dir, std::size_t count, int size) {
  fs::create_directories(dir);
  const scarecrow::Image img = pattern_image(size, size);
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%03zu.ppm", i);
    scarecrow::write_ppm_file((dir / name).string(), img);
  }
}

}  // namespace fixture
