#include "scarecrow/detector.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace scarecrow {

using nlohmann::json;

int DetectorScript::label_id(const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it != labels.end()) return static_cast<int>(it - labels.begin());
  labels.push_back(label);
  return static_cast<int>(labels.size()) - 1;
}

namespace {

Detection parse_detection(DetectorScript& script, const json& j) {
  const auto& box = j.at("box");
  if (!box.is_array() || box.size() != 4) {
    throw std::runtime_error("detector script: box must be [xmin, ymin, xmax, ymax]");
  }
  Detection d;
  d.class_id = script.label_id(j.at("class").get<std::string>());
  d.score = j.at("score").get<double>();
  d.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
           box[3].get<double>()};
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw std::runtime_error("detector script: score must lie in [0,1]");
  }
  if (!d.box.valid() || d.box.xmin < 0.0 || d.box.ymin < 0.0 || d.box.xmax > 1.0 ||
      d.box.ymax > 1.0) {
    throw std::runtime_error("detector script: box must be a valid normalized box");
  }
  return d;
}

}  // namespace

DetectorScript DetectorScript::from_json(const std::string& text) {
  DetectorScript script;
  const json doc = json::parse(text);
  if (doc.contains("labels")) {
    for (const auto& l : doc.at("labels")) script.label_id(l.get<std::string>());
  }
  if (doc.contains("frames")) {
    for (const auto& [key, dets] : doc.at("frames").items()) {
      const std::uint64_t idx = std::stoull(key);
      auto& slot = script.frames[idx];
      for (const auto& d : dets) slot.push_back(parse_detection(script, d));
    }
  }
  if (doc.contains("tracks")) {
    for (const auto& t : doc.at("tracks")) {
      const Detection d = parse_detection(script, t);
      const auto from = t.at("from").get<std::uint64_t>();
      const auto to = t.at("to").get<std::uint64_t>();
      for (std::uint64_t i = from; i <= to; ++i) script.frames[i].push_back(d);
    }
  }
  return script;
}

DetectorScript DetectorScript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open detector script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::vector<Detection> stub_detect(const DetectorScript& script, std::uint64_t frame_index) {
  auto it = script.frames.find(frame_index);
  if (it == script.frames.end()) return {};
  return it->second;
}

NetDetector::NetDetector(TinyDetectorNet net, std::vector<std::string> labels,
                         PostprocessOptions opts)
    : net_(std::move(net)), labels_(std::move(labels)), opts_(opts) {
  if (static_cast<int>(labels_.size()) != net_.num_classes()) {
    throw std::runtime_error("detector: " + std::to_string(labels_.size()) +
                             " labels for a network with " +
                             std::to_string(net_.num_classes()) + " classes");
  }
}

std::vector<Detection> NetDetector::detect(const Frame& frame) {
  const int side = net_.input_size();
  const Image input = resize_bilinear(frame.image, side, side);
  const RawPredictions raw = net_.forward(input);
  const auto dets = decode_detections(raw, net_.anchors(), opts_.variances, opts_.score_threshold);
  return nms(dets, opts_.nms_iou, opts_.top_k);
}

std::vector<Detection> SlowDetector::detect(const Frame& frame) {
  std::this_thread::sleep_for(delay_);
  return inner_->detect(frame);
}

std::vector<std::string> default_labels() { return {"cat", "cheetah", "lion"}; }

}  // namespace scarecrow
