#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scarecrow/geometry.hpp"
#include "scarecrow/multibox.hpp"
#include "scarecrow/xml.hpp"

namespace scarecrow {

struct AnnotatedObject {
  std::string label;
  BoundingBox box;  // pixels

  bool operator==(const AnnotatedObject&) const = default;
};

/// One LabelImg Pascal-VOC annotation.
struct AnnotatedImage {
  std::string filename;
  int width = 0;
  int height = 0;
  int depth = 3;
  std::vector<AnnotatedObject> objects;

  bool operator==(const AnnotatedImage&) const = default;
};

class VocError : public std::runtime_error {
 public:
  enum class Code {
    malformed_xml,
    wrong_root,
    missing_size,
    missing_element,
    bad_number,
    bad_size,
    empty_label,
    degenerate_box,
    box_out_of_bounds,
  };

  VocError(Code code, const std::string& msg, xml::Position pos)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + msg),
        code_(code),
        pos_(pos) {}
  Code code() const { return code_; }
  xml::Position position() const { return pos_; }

 private:
  Code code_;
  xml::Position pos_;
};

AnnotatedImage parse_voc_xml(std::string_view text);
/// Coordinates are written as integers when integral, else with 3 decimals.
std::string serialize_voc(const AnnotatedImage& a);

struct Dataset {
  std::vector<AnnotatedImage> images;
  /// Sorted unique labels; position is the class id.
  std::vector<std::string> labels;

  /// Builds the label index from the images' objects.
  static Dataset from_images(std::vector<AnnotatedImage> images);
  /// Class id of `label`, or -1.
  int class_id(std::string_view label) const;
  std::size_t size() const { return images.size(); }

  /// Ground truths of one image in normalized coordinates.
  std::vector<GroundTruth> ground_truths(std::size_t i) const;
};

struct Finding {
  enum class Level { warning, error };

  Level level = Level::warning;
  std::string code;
  std::string message;

  /// `LEVEL\tcode\tmessage`
  std::string to_line() const;
  bool operator==(const Finding&) const = default;
};

struct LoadedDataset {
  Dataset dataset;
  std::vector<Finding> findings;  // unparseable annotation files
  std::string root;

  /// Path of the image file matching annotation `i` by stem, or empty.
  std::vector<std::string> image_paths;
};

/// Reads `root/annotations/*.xml`, pairing each with `root/images/<stem>.*`.
LoadedDataset load_dataset(const std::string& root);

inline constexpr std::size_t kDefaultMinPerClass = 50;

std::vector<Finding> validate_dataset(const Dataset& d,
                                      std::size_t min_per_class = kDefaultMinPerClass);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle then prefix split, stratified by each image's first label
/// when every class has at least two images.
SplitResult split(const Dataset& d, const SplitSpec& spec);

struct DatasetStats {
  std::map<std::string, std::size_t> class_counts;
  /// sqrt(box area / image area) in 10 equal bins over [0,1].
  std::array<std::size_t, 10> size_histogram{};
};

DatasetStats stats(const Dataset& d);

}  // namespace scarecrow
