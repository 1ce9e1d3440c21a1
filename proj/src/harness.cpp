#include "scarecrow/harness.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace scarecrow {

HarnessResult run_harness(const Dataset& dataset, const std::vector<std::string>& image_paths,
                          Detector& detector, const HarnessConfig& cfg,
                          const std::function<void(const std::string&)>& on_step) {
  if (cfg.steps < 1) throw std::invalid_argument("harness: steps must be >= 1");
  if (dataset.images.empty()) throw std::runtime_error("harness: dataset is empty");

  // Detector class ids -> dataset class ids, extending with labels the
  // dataset never uses so their detections still count as false positives.
  HarnessResult result;
  result.labels = dataset.labels;
  std::vector<int> remap;
  for (const std::string& l : detector.labels()) {
    const int id = dataset.class_id(l);
    if (id >= 0) {
      remap.push_back(id);
    } else {
      remap.push_back(static_cast<int>(result.labels.size()));
      result.labels.push_back(l);
    }
  }
  const int num_classes = static_cast<int>(result.labels.size());

  std::vector<std::vector<GroundTruth>> gts(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) gts[i] = dataset.ground_truths(i);
  std::map<std::size_t, Image> image_cache;

  std::vector<ImageOutcome> outcomes;
  outcomes.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::size_t i = step % dataset.size();
    Frame frame;
    frame.index = step;
    if (detector.needs_image()) {
      auto it = image_cache.find(i);
      if (it == image_cache.end()) {
        if (i >= image_paths.size() || image_paths[i].empty()) {
          throw std::runtime_error("harness: no image file for " + dataset.images[i].filename);
        }
        it = image_cache.emplace(i, read_ppm_file(image_paths[i])).first;
      }
      frame.image = it->second;
    }

    std::vector<Detection> dets = detector.detect(frame);
    std::erase_if(dets, [&](const Detection& d) { return d.score < cfg.score_threshold; });
    for (Detection& d : dets) {
      d.class_id = (d.class_id >= 0 && static_cast<std::size_t>(d.class_id) < remap.size())
                       ? remap[d.class_id]
                       : d.class_id;
    }
    outcomes.push_back(match_detections(dets, gts[i], cfg.iou_threshold));

    if (cfg.keep_log || on_step) {
      const ImageOutcome& o = outcomes.back();
      std::ostringstream line;
      line << "step=" << step << " image=" << dataset.images[i].filename << " tp=" << o.tp.size()
           << " fp=" << o.fp.size() << " fn=" << o.fn.size();
      if (on_step) on_step(line.str());
      if (cfg.keep_log) result.log.push_back(line.str());
    }
  }
  result.metrics = compute_metrics(outcomes, num_classes, cfg.iou_threshold);
  return result;
}

HarnessResult run_harness(const HarnessConfig& cfg, Detector& detector,
                          const std::function<void(const std::string&)>& on_step) {
  const LoadedDataset loaded = load_dataset(cfg.dataset_path);
  for (const Finding& f : loaded.findings) {
    if (f.level == Finding::Level::error) {
      throw std::runtime_error("harness: dataset error: " + f.message);
    }
  }
  return run_harness(loaded.dataset, loaded.image_paths, detector, cfg, on_step);
}

PlantedDetector::PlantedDetector(Dataset dataset, double p, std::uint64_t seed, double score)
    : dataset_(std::move(dataset)), p_(p), seed_(seed), score_(score) {
  if (dataset_.images.empty()) throw std::invalid_argument("planted detector: empty dataset");
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw std::invalid_argument("planted detector: p outside [0,1]");
}

std::vector<Detection> PlantedDetector::detect(const Frame& frame) {
  std::mt19937_64 gen(seed_ * 0x9E3779B97F4A7C15ULL + frame.index);
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  if (u >= p_) return {};
  std::vector<Detection> out;
  for (const GroundTruth& g : dataset_.ground_truths(frame.index % dataset_.size())) {
    out.push_back({g.class_id, score_, g.box});
  }
  return out;
}

}  // namespace scarecrow
