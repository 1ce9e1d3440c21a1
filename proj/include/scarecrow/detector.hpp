#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scarecrow/image.hpp"
#include "scarecrow/multibox.hpp"
#include "scarecrow/network.hpp"

namespace scarecrow {

/// Backend-agnostic detection source used by the pipeline and the harness.
class Detector {
 public:
  virtual ~Detector() = default;

  /// Detections for one frame; class ids index labels().
  virtual std::vector<Detection> detect(const Frame& frame) = 0;
  virtual const std::vector<std::string>& labels() const = 0;
  /// False when the detector ignores pixels and frames may carry no image.
  virtual bool needs_image() const { return true; }
};

/// Frame index -> detections the stub emits.
struct DetectorScript {
  std::vector<std::string> labels;
  std::map<std::uint64_t, std::vector<Detection>> frames;

  /// Index of `label`, appending it when new.
  int label_id(const std::string& label);

  /// Accepts {"labels": [...], "frames": {"3": [det...]}, "tracks": [...]}
  /// where det is {"class","score","box":[xmin,ymin,xmax,ymax]} and a track
  /// is a det plus inclusive "from"/"to" frame indices.
  static DetectorScript from_json(const std::string& text);
  static DetectorScript load(const std::string& path);
};

std::vector<Detection> stub_detect(const DetectorScript& script, std::uint64_t frame_index);

class StubDetector : public Detector {
 public:
  explicit StubDetector(DetectorScript script) : script_(std::move(script)) {}

  std::vector<Detection> detect(const Frame& frame) override {
    return stub_detect(script_, frame.index);
  }
  const std::vector<std::string>& labels() const override { return script_.labels; }
  bool needs_image() const override { return false; }

 private:
  DetectorScript script_;
};

struct PostprocessOptions {
  Variances variances;
  double score_threshold = 0.5;
  double nms_iou = 0.45;
  std::size_t top_k = 100;
};

/// Tiny convolutional detector: resize, forward, decode, per-class NMS.
class NetDetector : public Detector {
 public:
  NetDetector(TinyDetectorNet net, std::vector<std::string> labels, PostprocessOptions opts = {});

  std::vector<Detection> detect(const Frame& frame) override;
  const std::vector<std::string>& labels() const override { return labels_; }

  const TinyDetectorNet& net() const { return net_; }

 private:
  TinyDetectorNet net_;
  std::vector<std::string> labels_;
  PostprocessOptions opts_;
};

/// Wraps another detector and sleeps before every call.
class SlowDetector : public Detector {
 public:
  SlowDetector(std::unique_ptr<Detector> inner, std::chrono::milliseconds delay)
      : inner_(std::move(inner)), delay_(delay) {}

  std::vector<Detection> detect(const Frame& frame) override;
  const std::vector<std::string>& labels() const override { return inner_->labels(); }
  bool needs_image() const override { return inner_->needs_image(); }

 private:
  std::unique_ptr<Detector> inner_;
  std::chrono::milliseconds delay_;
};

/// Labels for the default tiny net, in class-id order.
std::vector<std::string> default_labels();

}  // namespace scarecrow
