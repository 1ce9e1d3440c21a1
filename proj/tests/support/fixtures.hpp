#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scarecrow/dataset.hpp"
#include "scarecrow/geometry.hpp"
#include "scarecrow/image.hpp"
#include "scarecrow/multibox.hpp"

namespace fixture {

namespace fs = std::filesystem;

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str(const std::string& child = "") const;

 private:
  fs::path path_;
};

std::string data_path(const std::string& name);
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::vector<std::uint8_t> read_bytes(const std::string& path);

std::uint64_t fnv1a(const void* data, std::size_t n);

/// Smooth colour gradient with a bright square, deterministic.
scarecrow::Image pattern_image(int width, int height);

/// Random valid box in the unit square with sides at least min_side.
scarecrow::BoundingBox random_box(std::mt19937_64& rng, double min_side = 1e-3);
/// Random box whose corners lie on the 1/grid lattice.
scarecrow::BoundingBox random_lattice_box(std::mt19937_64& rng, int grid = 1000);

double uniform(std::mt19937_64& rng, double lo, double hi);

/// Pascal-VOC document for one image.
std::string voc_document(const std::string& filename, int width, int height,
                         const std::vector<scarecrow::AnnotatedObject>& objects);

/// `root/annotations/*.xml` and matching `root/images/*.ppm` (tiny images).
void write_dataset(const fs::path& root, const std::vector<scarecrow::AnnotatedImage>& images,
                   bool with_images = true);

/// n images, one centred object each, labels cycling over `labels`.
std::vector<scarecrow::AnnotatedImage> single_object_images(std::size_t n,
                                                            const std::vector<std::string>& labels);

/// `count` tiny PPM frames named f000.ppm, f001.ppm, ...
void write_frames(const fs::path& dir, std::size_t count, int size = 8);

}  // namespace fixture
