#include "scarecrow/multibox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace scarecrow {

RawPredictions RawPredictions::zeros(std::size_t n, int num_classes) {
  RawPredictions p;
  p.num_classes = num_classes;
  p.offsets.assign(n, BoxOffsets{});
  p.scores.assign(n * p.stride(), 0.0);
  return p;
}

std::string LossReport::to_text() const {
  std::ostringstream os;
  os.precision(9);
  os << "loc_loss=" << loc_loss << " conf_loss=" << conf_loss << " total=" << total
     << " n_matched=" << n_matched;
  return os.str();
}

double smooth_l1(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

MatchResult match_anchors(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                          double iou_threshold) {
  if (anchors.empty()) throw MultiboxError("match_anchors: empty anchor set");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw MultiboxError("match_anchors: iou_threshold must lie in (0,1)");
  }
  if (gts.size() > anchors.size()) {
    throw MultiboxError("match_anchors: more ground truths than anchors");
  }
  const std::size_t n_anchor = anchors.size();
  const std::size_t n_gt = gts.size();

  MatchResult result;
  result.anchors.assign(n_anchor, AnchorMatch{});
  if (n_gt == 0) return result;

  std::vector<BoundingBox> corners(n_anchor);
  for (std::size_t a = 0; a < n_anchor; ++a) corners[a] = to_corner(anchors.boxes[a]);

  // overlaps[g * n_anchor + a]
  std::vector<double> overlaps(n_gt * n_anchor);
  for (std::size_t g = 0; g < n_gt; ++g) {
    for (std::size_t a = 0; a < n_anchor; ++a) {
      overlaps[g * n_anchor + a] = iou(gts[g].box, corners[a]);
    }
  }

  // Phase 1: every ground truth claims one anchor. Repeatedly take the
  // highest remaining pair; ties resolve to the lower gt, then lower anchor.
  std::vector<bool> gt_done(n_gt, false);
  std::vector<bool> anchor_taken(n_anchor, false);
  for (std::size_t round = 0; round < n_gt; ++round) {
    double best = -1.0;
    std::size_t best_g = 0, best_a = 0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (gt_done[g]) continue;
      for (std::size_t a = 0; a < n_anchor; ++a) {
        if (anchor_taken[a]) continue;
        const double v = overlaps[g * n_anchor + a];
        if (v > best) {
          best = v;
          best_g = g;
          best_a = a;
        }
      }
    }
    gt_done[best_g] = true;
    anchor_taken[best_a] = true;
    result.anchors[best_a] = {static_cast<int>(best_g), gts[best_g].class_id, best};
  }

  // Phase 2: leftover anchors join their best ground truth above threshold.
  for (std::size_t a = 0; a < n_anchor; ++a) {
    if (anchor_taken[a]) continue;
    double best = -1.0;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      const double v = overlaps[g * n_anchor + a];
      if (v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best >= iou_threshold) {
      result.anchors[a] = {static_cast<int>(best_g), gts[best_g].class_id, best};
    }
  }

  result.n_matched = static_cast<std::size_t>(
      std::count_if(result.anchors.begin(), result.anchors.end(),
                    [](const AnchorMatch& m) { return m.matched(); }));
  return result;
}

double localization_loss(const RawPredictions& preds, std::span<const GroundTruth> gts,
                         const MatchResult& match, const AnchorSet& anchors,
                         const Variances& var) {
  if (preds.size() != anchors.size() || match.anchors.size() != anchors.size()) {
    throw MultiboxError("localization_loss: predictions, match and anchors differ in length");
  }
  if (match.n_matched == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const AnchorMatch& m = match.anchors[a];
    if (!m.matched()) continue;
    if (static_cast<std::size_t>(m.gt_index) >= gts.size()) {
      throw MultiboxError("localization_loss: match refers to a missing ground truth");
    }
    const BoxOffsets target = encode(to_center(gts[m.gt_index].box), anchors.boxes[a], var);
    const BoxOffsets& l = preds.offsets[a];
    sum += smooth_l1(l.tx - target.tx) + smooth_l1(l.ty - target.ty) +
           smooth_l1(l.tw - target.tw) + smooth_l1(l.th - target.th);
  }
  return sum / static_cast<double>(match.n_matched);
}

namespace {

// -log softmax(logits)[k]
double cross_entropy(std::span<const double> logits, std::size_t k) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  return std::log(z) + mx - logits[k];
}

}  // namespace

double confidence_loss(const RawPredictions& preds, const MatchResult& match,
                       double neg_pos_ratio) {
  if (preds.size() != match.anchors.size()) {
    throw MultiboxError("confidence_loss: predictions and match differ in length");
  }
  if (preds.scores.size() != preds.size() * preds.stride()) {
    throw MultiboxError("confidence_loss: score table has the wrong shape");
  }
  if (!(neg_pos_ratio >= 0.0)) throw MultiboxError("confidence_loss: neg_pos_ratio must be >= 0");
  if (match.n_matched == 0) return 0.0;

  double sum = 0.0;
  std::vector<std::pair<double, std::size_t>> negatives;
  for (std::size_t a = 0; a < preds.size(); ++a) {
    const AnchorMatch& m = match.anchors[a];
    if (m.matched()) {
      sum += cross_entropy(preds.logits(a), static_cast<std::size_t>(m.class_id) + 1);
    } else {
      negatives.emplace_back(cross_entropy(preds.logits(a), 0), a);
    }
  }
  const auto cap = static_cast<std::size_t>(
      std::floor(neg_pos_ratio * static_cast<double>(match.n_matched)));
  const std::size_t take = std::min(cap, negatives.size());
  std::partial_sort(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(take),
                    negatives.end(), [](const auto& x, const auto& y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  for (std::size_t i = 0; i < take; ++i) sum += negatives[i].first;
  return sum / static_cast<double>(match.n_matched);
}

LossReport total_loss(const RawPredictions& preds, std::span<const GroundTruth> gts,
                      const AnchorSet& anchors, const LossOptions& opts) {
  const MatchResult match = match_anchors(anchors, gts, opts.match_iou);
  LossReport r;
  r.n_matched = match.n_matched;
  r.loc_loss = localization_loss(preds, gts, match, anchors, opts.variances);
  r.conf_loss = confidence_loss(preds, match, opts.neg_pos_ratio);
  r.total = r.loc_loss + r.conf_loss;
  return r;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<Detection> decode_detections(const RawPredictions& raw, const AnchorSet& anchors,
                                         const Variances& var, double score_threshold) {
  if (raw.size() != anchors.size()) {
    throw MultiboxError("decode_detections: predictions and anchors differ in length");
  }
  std::vector<Detection> out;
  for (std::size_t a = 0; a < raw.size(); ++a) {
    const std::vector<double> p = softmax(raw.logits(a));
    bool any = false;
    for (int c = 0; c < raw.num_classes; ++c) any |= p[c + 1] >= score_threshold;
    if (!any) continue;

    BoundingBox box;
    try {
      box = clip_to_unit(decode(raw.offsets[a], anchors.boxes[a], var));
    } catch (const GeometryError&) {
      continue;  // collapsed under clipping or overflowed
    }
    for (int c = 0; c < raw.num_classes; ++c) {
      if (p[c + 1] >= score_threshold) out.push_back({c, p[c + 1], box});
    }
  }
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold,
                           std::size_t top_k) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw MultiboxError("nms: iou_threshold must lie in (0,1]");
  }
  if (top_k < 1) throw MultiboxError("nms: top_k must be >= 1");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t cur = order[i];
    if (suppressed[cur]) continue;
    kept.push_back(dets[cur]);
    if (kept.size() == top_k) break;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t other = order[j];
      if (suppressed[other] || dets[other].class_id != dets[cur].class_id) continue;
      if (iou(dets[cur].box, dets[other].box) >= iou_threshold) suppressed[other] = true;
    }
  }
  return kept;
}

}  // namespace scarecrow
