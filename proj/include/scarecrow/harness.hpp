#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scarecrow/dataset.hpp"
#include "scarecrow/detector.hpp"
#include "scarecrow/evaluation.hpp"

namespace scarecrow {

struct HarnessConfig {
  std::size_t steps = 10'000;
  double iou_threshold = 0.5;
  double score_threshold = 0.5;
  std::string dataset_path;
  bool keep_log = false;
};

struct HarnessResult {
  Metrics metrics;
  std::vector<std::string> log;  // filled when keep_log is set
  std::vector<std::string> labels;
};

/// Evaluates `steps` frames, cycling over the dataset. Frame index equals the
/// step number, so scripted detectors can address steps directly.
HarnessResult run_harness(const Dataset& dataset, const std::vector<std::string>& image_paths,
                          Detector& detector, const HarnessConfig& cfg,
                          const std::function<void(const std::string&)>& on_step = {});

/// Loads the dataset at cfg.dataset_path and evaluates it.
HarnessResult run_harness(const HarnessConfig& cfg, Detector& detector,
                          const std::function<void(const std::string&)>& on_step = {});

/// Test double that is right on each frame with probability p: it either
/// echoes the frame's ground truth exactly or reports nothing.
class PlantedDetector : public Detector {
 public:
  PlantedDetector(Dataset dataset, double p, std::uint64_t seed, double score = 0.9);

  std::vector<Detection> detect(const Frame& frame) override;
  const std::vector<std::string>& labels() const override { return dataset_.labels; }
  bool needs_image() const override { return false; }

 private:
  Dataset dataset_;
  double p_;
  std::uint64_t seed_;
  double score_;
};

}  // namespace scarecrow
