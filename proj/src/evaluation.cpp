#include "scarecrow/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace scarecrow {

namespace {

std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

double ratio_or_one(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string label_of(const std::vector<std::string>& labels, int c) {
  if (c >= 0 && static_cast<std::size_t>(c) < labels.size()) return labels[c];
  return "class" + std::to_string(c);
}

}  // namespace

ImageOutcome match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                              double iou_threshold) {
  ImageOutcome out;
  out.detections.assign(dets.begin(), dets.end());
  out.gts.assign(gts.begin(), gts.end());
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : score_order(dets)) {
    double best = -1.0;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != dets[d].class_id) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best >= 0.0) {
      taken[best_g] = true;
      out.tp.push_back({d, best_g, best});
    } else {
      out.fp.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!taken[g]) out.fn.push_back(g);
  }
  return out;
}

ConfusionMatrix confusion(std::span<const ImageOutcome> outcomes, int num_classes,
                          double iou_threshold) {
  ConfusionMatrix m(num_classes);
  const int bg = m.background();
  for (const ImageOutcome& o : outcomes) {
    std::vector<bool> taken(o.gts.size(), false);
    for (std::size_t d : score_order(o.detections)) {
      double best = -1.0;
      std::size_t best_g = 0;
      for (std::size_t g = 0; g < o.gts.size(); ++g) {
        if (taken[g]) continue;
        const double v = iou(o.detections[d].box, o.gts[g].box);
        if (v >= iou_threshold && v > best) {
          best = v;
          best_g = g;
        }
      }
      if (best >= 0.0) {
        taken[best_g] = true;
        ++m.at(o.gts[best_g].class_id, o.detections[d].class_id);
      } else {
        ++m.at(bg, o.detections[d].class_id);
      }
    }
    for (std::size_t g = 0; g < o.gts.size(); ++g) {
      if (!taken[g]) ++m.at(o.gts[g].class_id, bg);
    }
  }
  return m;
}

double average_precision(std::span<const ScoredHit> ranked, std::size_t n_gt,
                         std::vector<PrPoint>* curve) {
  if (n_gt == 0) return 0.0;
  std::vector<std::size_t> order(ranked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranked[a].score > ranked[b].score;
  });

  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    tp += ranked[order[rank]].tp ? 1 : 0;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    if (curve != nullptr) {
      curve->push_back({ranked[order[rank]].score, precision.back(), recall.back()});
    }
  }
  // Precision envelope, then sum over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

Metrics compute_metrics(std::span<const ImageOutcome> outcomes, int num_classes,
                        double iou_threshold) {
  Metrics m;
  m.images = outcomes.size();
  std::size_t clean_frames = 0;

  std::vector<std::vector<ScoredHit>> hits(num_classes);
  std::vector<std::size_t> n_gt(num_classes, 0);

  for (const ImageOutcome& o : outcomes) {
    m.tp += o.tp.size();
    m.fp += o.fp.size();
    m.fn += o.fn.size();
    if (o.fp.empty() && o.fn.empty()) ++clean_frames;
    for (const auto& g : o.gts) {
      if (g.class_id >= 0 && g.class_id < num_classes) ++n_gt[g.class_id];
    }
    std::vector<bool> is_tp(o.detections.size(), false);
    for (const auto& t : o.tp) is_tp[t.detection] = true;
    for (std::size_t d = 0; d < o.detections.size(); ++d) {
      const int c = o.detections[d].class_id;
      if (c < 0 || c >= num_classes) continue;
      hits[c].push_back({o.detections[d].score, is_tp[d]});
    }
  }

  m.precision = ratio_or_one(m.tp, m.tp + m.fp);
  m.recall = ratio_or_one(m.tp, m.tp + m.fn);
  m.accuracy = ratio_or_one(m.tp, m.tp + m.fp + m.fn);
  m.frame_hit_rate = ratio_or_one(clean_frames, m.images);

  m.ap.assign(num_classes, 0.0);
  m.ap_defined.assign(num_classes, false);
  m.pr_curves.assign(num_classes, {});
  double ap_sum = 0.0;
  int ap_classes = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (n_gt[c] == 0) continue;
    m.ap[c] = average_precision(hits[c], n_gt[c], &m.pr_curves[c]);
    m.ap_defined[c] = true;
    ap_sum += m.ap[c];
    ++ap_classes;
  }
  m.map = ap_classes == 0 ? 1.0 : ap_sum / ap_classes;

  m.confusion = confusion(outcomes, num_classes, iou_threshold);
  std::size_t matched = 0, correct = 0;
  for (int i = 0; i < num_classes; ++i) {
    for (int j = 0; j < num_classes; ++j) {
      matched += m.confusion.at(i, j);
      if (i == j) correct += m.confusion.at(i, j);
    }
  }
  m.classification_accuracy = ratio_or_one(correct, matched);
  return m;
}

std::string Metrics::to_text(const std::vector<std::string>& labels) const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "images=" << images << "\n"
     << "tp=" << tp << "\n"
     << "fp=" << fp << "\n"
     << "fn=" << fn << "\n"
     << "precision=" << precision << "\n"
     << "recall=" << recall << "\n"
     << "accuracy=" << accuracy << "\n"
     << "frame_hit_rate=" << frame_hit_rate << "\n"
     << "classification_accuracy=" << classification_accuracy << "\n"
     << "mAP=" << map << "\n";
  for (std::size_t c = 0; c < ap.size(); ++c) {
    if (ap_defined[c]) os << "ap[" << label_of(labels, static_cast<int>(c)) << "]=" << ap[c] << "\n";
  }
  const int n = confusion.num_classes;
  for (int i = 0; i <= n; ++i) {
    os << "confusion[" << (i == n ? std::string("background") : label_of(labels, i)) << "]=";
    for (int j = 0; j <= n; ++j) os << (j ? "," : "") << confusion.at(i, j);
    os << "\n";
  }
  return os.str();
}

std::string Metrics::pr_csv(const std::vector<std::string>& labels) const {
  std::ostringstream os;
  os.precision(9);
  os << "class,threshold,precision,recall\n";
  for (std::size_t c = 0; c < pr_curves.size(); ++c) {
    for (const PrPoint& p : pr_curves[c]) {
      os << label_of(labels, static_cast<int>(c)) << ',' << p.threshold << ',' << p.precision
         << ',' << p.recall << "\n";
    }
  }
  return os.str();
}

}  // namespace scarecrow
