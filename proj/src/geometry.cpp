#include "scarecrow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scarecrow {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require_valid(const BoundingBox& b, const char* what) {
  if (!b.valid()) {
    throw GeometryError(std::string(what) + ": degenerate or non-finite box " +
                        to_string(b));
  }
}

// Largest log-scale whose exponential still fits in single precision.
const double kMaxLogScale = std::log(static_cast<double>(std::numeric_limits<float>::max()));

}  // namespace

bool BoundingBox::valid() const {
  return finite(xmin) && finite(ymin) && finite(xmax) && finite(ymax) &&
         xmin < xmax && ymin < ymax;
}

bool CenterBox::valid() const {
  return finite(cx) && finite(cy) && finite(w) && finite(h) && w > 0.0 && h > 0.0;
}

std::size_t AnchorConfig::expected_count() const {
  std::size_t n = 0;
  for (int f : feature_map_sizes) {
    n += static_cast<std::size_t>(f) * static_cast<std::size_t>(f) * boxes_per_cell();
  }
  return n;
}

std::vector<std::string> AnchorConfig::problems() const {
  std::vector<std::string> out;
  if (image_size < 1) out.push_back("anchor config: image_size must be >= 1");
  if (feature_map_sizes.empty()) out.push_back("anchor config: no feature maps");
  for (int f : feature_map_sizes) {
    if (f < 1) {
      out.push_back("anchor config: feature map sizes must be positive");
      break;
    }
  }
  if (aspect_ratios.empty() && !add_extra_scale_box) {
    out.push_back("anchor config: no boxes per cell");
  }
  for (double r : aspect_ratios) {
    if (!(r > 0.0) || !finite(r)) {
      out.push_back("anchor config: aspect ratios must be > 0");
      break;
    }
  }
  if (!(s_min > 0.0 && s_min <= s_max && s_max <= 1.0)) {
    out.push_back("anchor config: require 0 < s_min <= s_max <= 1");
  }
  return out;
}

void AnchorConfig::validate() const {
  const auto p = problems();
  if (!p.empty()) throw GeometryError(p.front());
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  require_valid(a, "iou");
  require_valid(b, "iou");
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

CenterBox to_center(const BoundingBox& b) {
  require_valid(b, "to_center");
  return {(b.xmin + b.xmax) * 0.5, (b.ymin + b.ymax) * 0.5, b.xmax - b.xmin, b.ymax - b.ymin};
}

BoundingBox to_corner(const CenterBox& c) {
  if (!c.valid()) throw GeometryError("to_corner: non-positive or non-finite extent");
  return {c.cx - c.w * 0.5, c.cy - c.h * 0.5, c.cx + c.w * 0.5, c.cy + c.h * 0.5};
}

AnchorSet generate_anchors(const AnchorConfig& cfg) {
  cfg.validate();
  const int layers = static_cast<int>(cfg.feature_map_sizes.size());
  auto scale = [&](int k) {  // k is 0-based; scale(layers) == 1
    if (k >= layers) return 1.0;
    return cfg.s_min + (cfg.s_max - cfg.s_min) * k / std::max(layers - 1, 1);
  };

  AnchorSet set;
  set.boxes.reserve(cfg.expected_count());
  set.slots.reserve(cfg.expected_count());
  const int n_ratios = static_cast<int>(cfg.aspect_ratios.size());
  for (int k = 0; k < layers; ++k) {
    const int f = cfg.feature_map_sizes[k];
    const double s = scale(k);
    const double s_extra = std::sqrt(s * scale(k + 1));
    for (int i = 0; i < f; ++i) {
      for (int j = 0; j < f; ++j) {
        const double cx = (j + 0.5) / f;
        const double cy = (i + 0.5) / f;
        for (int r = 0; r < n_ratios; ++r) {
          const double root = std::sqrt(cfg.aspect_ratios[r]);
          set.boxes.push_back({cx, cy, s * root, s / root});
          set.slots.push_back({k, i, j, r});
        }
        if (cfg.add_extra_scale_box) {
          set.boxes.push_back({cx, cy, s_extra, s_extra});
          set.slots.push_back({k, i, j, n_ratios});
        }
      }
    }
  }
  return set;
}

BoxOffsets encode(const CenterBox& gt, const CenterBox& anchor, const Variances& var) {
  if (!gt.valid()) throw GeometryError("encode: ground truth has non-positive extent");
  if (!anchor.valid()) throw GeometryError("encode: anchor has non-positive extent");
  if (!(var.center > 0.0 && var.size > 0.0)) throw GeometryError("encode: variances must be > 0");
  return {(gt.cx - anchor.cx) / (anchor.w * var.center),
          (gt.cy - anchor.cy) / (anchor.h * var.center),
          std::log(gt.w / anchor.w) / var.size,
          std::log(gt.h / anchor.h) / var.size};
}

BoundingBox decode(const BoxOffsets& off, const CenterBox& anchor, const Variances& var) {
  if (!finite(off.tx) || !finite(off.ty) || !finite(off.tw) || !finite(off.th)) {
    throw GeometryError("decode: non-finite offsets");
  }
  if (!anchor.valid()) throw GeometryError("decode: anchor has non-positive extent");
  const double lw = off.tw * var.size;
  const double lh = off.th * var.size;
  if (lw > kMaxLogScale || lh > kMaxLogScale) {
    throw GeometryError("decode: size offset overflows (tw=" + std::to_string(off.tw) +
                        ", th=" + std::to_string(off.th) + ")");
  }
  CenterBox c{anchor.cx + off.tx * var.center * anchor.w,
              anchor.cy + off.ty * var.center * anchor.h,
              anchor.w * std::exp(lw),
              anchor.h * std::exp(lh)};
  if (!c.valid()) throw GeometryError("decode: size offset underflows to an empty box");
  return to_corner(c);
}

BoundingBox clip_to_unit(const BoundingBox& b) {
  if (!finite(b.xmin) || !finite(b.ymin) || !finite(b.xmax) || !finite(b.ymax)) {
    throw GeometryError("clip_to_unit: non-finite box");
  }
  BoundingBox c{std::clamp(b.xmin, 0.0, 1.0), std::clamp(b.ymin, 0.0, 1.0),
                std::clamp(b.xmax, 0.0, 1.0), std::clamp(b.ymax, 0.0, 1.0)};
  if (!(c.xmin < c.xmax && c.ymin < c.ymax)) {
    throw GeometryError("clip_to_unit: box " + to_string(b) + " is empty inside the unit square");
  }
  return c;
}

std::string to_string(const BoundingBox& b) {
  std::ostringstream os;
  os << '(' << b.xmin << ',' << b.ymin << ',' << b.xmax << ',' << b.ymax << ')';
  return os.str();
}

}  // namespace scarecrow
