#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scarecrow/multibox.hpp"

namespace scarecrow {

struct TruePositive {
  std::size_t detection = 0;  // index into ImageOutcome::detections
  std::size_t gt = 0;         // index into ImageOutcome::gts
  double iou = 0.0;
};

/// Matching of one image's detections against its ground truth. The inputs
/// are retained so metrics can be recomputed and confusion re-matched.
struct ImageOutcome {
  std::vector<Detection> detections;
  std::vector<GroundTruth> gts;
  std::vector<TruePositive> tp;
  std::vector<std::size_t> fp;  // detection indices
  std::vector<std::size_t> fn;  // gt indices
};

/// Greedy same-class matching in descending score order (ties by input order).
ImageOutcome match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                              double iou_threshold = 0.5);

/// Square (C+1) matrix; index C is background. Row = ground-truth class,
/// column = detected class.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::size_t> cells;

  explicit ConfusionMatrix(int c = 0)
      : num_classes(c), cells(static_cast<std::size_t>(c + 1) * (c + 1), 0) {}
  std::size_t& at(int gt_class, int det_class) {
    return cells[static_cast<std::size_t>(gt_class) * (num_classes + 1) + det_class];
  }
  std::size_t at(int gt_class, int det_class) const {
    return cells[static_cast<std::size_t>(gt_class) * (num_classes + 1) + det_class];
  }
  int background() const { return num_classes; }
};

/// Class-agnostic greedy matching; cells count (gt class, detected class).
ConfusionMatrix confusion(std::span<const ImageOutcome> outcomes, int num_classes,
                          double iou_threshold = 0.5);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t images = 0;
  double precision = 1.0;
  double recall = 1.0;
  /// TP / (TP + FP + FN).
  double accuracy = 1.0;
  /// Share of images with every gt found and no false positive.
  double frame_hit_rate = 1.0;
  /// Share of class-agnostic matches whose detected class is right.
  double classification_accuracy = 1.0;
  std::vector<double> ap;        // per class; NaN-free, 0 for classes without gts
  std::vector<bool> ap_defined;  // class has at least one gt
  double map = 1.0;
  ConfusionMatrix confusion;
  std::vector<std::vector<PrPoint>> pr_curves;  // per class

  std::string to_text(const std::vector<std::string>& labels) const;
  /// `class,threshold,precision,recall`
  std::string pr_csv(const std::vector<std::string>& labels) const;
};

Metrics compute_metrics(std::span<const ImageOutcome> outcomes, int num_classes,
                        double iou_threshold = 0.5);

struct ScoredHit {
  double score = 0.0;
  bool tp = false;
};

/// All-point interpolated area under the precision-recall curve.
double average_precision(std::span<const ScoredHit> ranked, std::size_t n_gt,
                         std::vector<PrPoint>* curve = nullptr);

}  // namespace scarecrow
