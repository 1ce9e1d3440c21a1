#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace scarecrow {

/// Raised when a box or anchor configuration violates its invariants.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corner-form box. Normalized coordinates are fractions of the image side.
struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

/// Center-size box.
struct CenterBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const;

  bool operator==(const CenterBox&) const = default;
};

/// Regression offsets of a box relative to an anchor.
struct BoxOffsets {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;

  bool operator==(const BoxOffsets&) const = default;
};

struct Variances {
  double center = 0.1;
  double size = 0.2;
};

struct AnchorConfig {
  int image_size = 160;
  std::vector<int> feature_map_sizes{10, 5};
  std::vector<double> aspect_ratios{1.0, 2.0, 0.5};
  double s_min = 0.2;
  double s_max = 0.9;
  bool add_extra_scale_box = true;

  /// Anchors emitted per grid cell.
  std::size_t boxes_per_cell() const {
    return aspect_ratios.size() + (add_extra_scale_box ? 1 : 0);
  }
  /// Closed-form anchor count, sum over layers of f_k^2 * b.
  std::size_t expected_count() const;
  /// Every violated invariant; empty when valid.
  std::vector<std::string> problems() const;
  /// Throws GeometryError describing the first violated invariant.
  void validate() const;
};

/// Where an anchor came from in the layer/grid/ratio tiling.
struct AnchorSlot {
  int layer = 0;
  int row = 0;
  int col = 0;
  int ratio_index = 0;  // == aspect_ratios.size() for the extra box
};

/// Ordered anchors, layer-major then row-major then ratio-minor.
struct AnchorSet {
  std::vector<CenterBox> boxes;
  std::vector<AnchorSlot> slots;

  std::size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }
};

double iou(const BoundingBox& a, const BoundingBox& b);

CenterBox to_center(const BoundingBox& b);
BoundingBox to_corner(const CenterBox& c);

AnchorSet generate_anchors(const AnchorConfig& cfg);

BoxOffsets encode(const CenterBox& gt, const CenterBox& anchor,
                  const Variances& var = {});
BoundingBox decode(const BoxOffsets& off, const CenterBox& anchor,
                   const Variances& var = {});

/// Clamps to [0,1]; throws GeometryError if the clamped box has no extent.
BoundingBox clip_to_unit(const BoundingBox& b);

std::string to_string(const BoundingBox& b);

}  // namespace scarecrow
