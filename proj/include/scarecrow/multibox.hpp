#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scarecrow/geometry.hpp"

namespace scarecrow {

class MultiboxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A labeled ground-truth box in normalized coordinates. class_id is the
/// foreground class index (0-based, background excluded).
struct GroundTruth {
  int class_id = 0;
  BoundingBox box;
};

/// A scored, labeled box in normalized coordinates.
struct Detection {
  int class_id = 0;
  double score = 0.0;
  BoundingBox box;

  bool operator==(const Detection&) const = default;
};

struct AnchorMatch {
  int gt_index = -1;  // -1 means background
  int class_id = -1;
  double iou = 0.0;

  bool matched() const { return gt_index >= 0; }
};

struct MatchResult {
  std::vector<AnchorMatch> anchors;
  std::size_t n_matched = 0;
};

/// Per-anchor network outputs. scores is row-major [N][num_classes + 1] with
/// the background logit in column 0.
struct RawPredictions {
  std::vector<BoxOffsets> offsets;
  std::vector<double> scores;
  int num_classes = 0;  // foreground classes

  std::size_t size() const { return offsets.size(); }
  std::size_t stride() const { return static_cast<std::size_t>(num_classes) + 1; }
  std::span<const double> logits(std::size_t anchor) const {
    return std::span<const double>(scores).subspan(anchor * stride(), stride());
  }
  std::span<double> logits(std::size_t anchor) {
    return std::span<double>(scores).subspan(anchor * stride(), stride());
  }
  /// Zero-filled predictions for n anchors.
  static RawPredictions zeros(std::size_t n, int num_classes);
};

struct LossReport {
  double loc_loss = 0.0;
  double conf_loss = 0.0;
  double total = 0.0;
  std::size_t n_matched = 0;

  /// `loc_loss=… conf_loss=… total=… n_matched=…`
  std::string to_text() const;
};

struct LossOptions {
  Variances variances;
  double match_iou = 0.5;
  double neg_pos_ratio = 3.0;
};

double smooth_l1(double d);

MatchResult match_anchors(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                          double iou_threshold = 0.5);

double localization_loss(const RawPredictions& preds, std::span<const GroundTruth> gts,
                         const MatchResult& match, const AnchorSet& anchors,
                         const Variances& var = {});

double confidence_loss(const RawPredictions& preds, const MatchResult& match,
                       double neg_pos_ratio = 3.0);

LossReport total_loss(const RawPredictions& preds, std::span<const GroundTruth> gts,
                      const AnchorSet& anchors, const LossOptions& opts = {});

/// Numerically stable softmax over one anchor's logits.
std::vector<double> softmax(std::span<const double> logits);

std::vector<Detection> decode_detections(const RawPredictions& raw, const AnchorSet& anchors,
                                         const Variances& var, double score_threshold);

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold = 0.45,
                           std::size_t top_k = 100);

}  // namespace scarecrow
