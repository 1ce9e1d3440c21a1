#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scarecrow/evaluation.hpp"
#include "scarecrow/harness.hpp"

using namespace scarecrow;

namespace {

const BoundingBox kA{0.0, 0.0, 0.4, 0.4};
const BoundingBox kB{0.5, 0.5, 0.9, 0.9};
const BoundingBox kFar{0.0, 0.8, 0.1, 0.9};

/// One image per planted outcome: a hit, a spurious detection, or a miss.
std::vector<ImageOutcome> planted(std::size_t tp, std::size_t fp, std::size_t fn) {
  std::vector<ImageOutcome> out;
  const std::vector<GroundTruth> one_gt{{0, kA}};
  for (std::size_t i = 0; i < tp; ++i) {
    const std::vector<Detection> d{{0, 0.5 + 0.4 * i / double(tp + 1), kA}};
    out.push_back(match_detections(d, one_gt));
  }
  for (std::size_t i = 0; i < fp; ++i) {
    const std::vector<Detection> d{{0, 0.3 + 0.1 * i / double(fp + 1), kFar}};
    out.push_back(match_detections(d, {}));
  }
  for (std::size_t i = 0; i < fn; ++i) out.push_back(match_detections({}, one_gt));
  return out;
}

BoundingBox random_box_near(std::mt19937_64& rng, const BoundingBox& b) {
  auto j = [&] { return fixture::uniform(rng, -0.08, 0.08); };
  BoundingBox r{b.xmin + j(), b.ymin + j(), b.xmax + j(), b.ymax + j()};
  r.xmin = std::clamp(r.xmin, 0.0, 0.9);
  r.ymin = std::clamp(r.ymin, 0.0, 0.9);
  r.xmax = std::clamp(r.xmax, r.xmin + 0.05, 1.0);
  r.ymax = std::clamp(r.ymax, r.ymin + 0.05, 1.0);
  return r;
}

/// Random image: gts of up to 3 classes, detections that are jittered copies
/// of gts (sometimes relabeled) or free boxes, all with distinct scores.
std::pair<std::vector<Detection>, std::vector<GroundTruth>> random_image(std::mt19937_64& rng,
                                                                         double& next_score) {
  std::vector<GroundTruth> gts;
  for (int k = 0, n = rng() % 5; k < n; ++k) gts.push_back({int(rng() % 3), fixture::random_box(rng, 0.05)});
  std::vector<Detection> dets;
  for (int k = 0, n = rng() % 6; k < n; ++k) {
    next_score = std::nextafter(next_score, 0.0) - 1e-6;
    const double score = next_score;
    if (!gts.empty() && rng() % 3 != 0) {
      const GroundTruth& g = gts[rng() % gts.size()];
      dets.push_back({rng() % 4 == 0 ? int(rng() % 3) : g.class_id, score, random_box_near(rng, g.box)});
    } else {
      dets.push_back({int(rng() % 3), score, fixture::random_box(rng, 0.05)});
    }
  }
  return {dets, gts};
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("match_detections examples") {
  const std::vector<GroundTruth> gts{{0, kA}, {1, kB}};
  const std::vector<Detection> exact{{0, 0.9, kA}, {1, 0.8, kB}};
  const ImageOutcome all = match_detections(exact, gts);
  CHECK(all.tp.size() == 2);
  CHECK(all.fp.empty());
  CHECK(all.fn.empty());

  const std::vector<Detection> wrong{{1, 0.9, kA}};
  const ImageOutcome w = match_detections(wrong, std::vector<GroundTruth>{{0, kA}});
  CHECK(w.tp.empty());
  CHECK(w.fp == std::vector<std::size_t>{0});
  CHECK(w.fn == std::vector<std::size_t>{0});
}

TEST_CASE("greedy order: the higher score claims its best gt first") {
  // gt0 = [0,0.4]^2, gt1 shifted right by 0.1. The top detection sits between
  // them but closer to gt1; the second overlaps gt1 best and must fall back.
  const std::vector<GroundTruth> gts{{0, {0.0, 0.0, 0.4, 0.4}}, {0, {0.1, 0.0, 0.5, 0.4}}};
  const std::vector<Detection> dets{
      {0, 0.5, {0.1, 0.0, 0.5, 0.4}},    // IoU 1 with gt1, 0.6 with gt0
      {0, 0.9, {0.08, 0.0, 0.48, 0.4}},  // IoU 0.667 with gt0, 0.905 with gt1
      {0, 0.7, {0.6, 0.6, 0.9, 0.9}},    // overlaps nothing
  };
  const ImageOutcome o = match_detections(dets, gts);
  REQUIRE(o.tp.size() == 2);
  CHECK(o.tp[0].detection == 1);
  CHECK(o.tp[0].gt == 1);
  CHECK(o.tp[1].detection == 0);
  CHECK(o.tp[1].gt == 0);
  CHECK(o.tp[1].iou == doctest::Approx(0.6));
  CHECK(o.fp == std::vector<std::size_t>{2});
  CHECK(o.fn.empty());

  // Exhaustive check: among all injective same-class assignments, the greedy
  // result is the one that maximizes IoU in descending score order.
  double best0 = -1;
  for (int g : {0, 1}) best0 = std::max(best0, iou(dets[1].box, gts[g].box));
  CHECK(o.tp[0].iou == doctest::Approx(best0));
}

TEST_CASE("confusion examples") {
  const std::vector<GroundTruth> gts{{0, kA}, {2, kB}};
  std::vector<ImageOutcome> perfect{match_detections(std::vector<Detection>{{0, 0.9, kA}, {2, 0.8, kB}}, gts)};
  const ConfusionMatrix p = confusion(perfect, 3);
  CHECK(p.at(0, 0) == 1);
  CHECK(p.at(2, 2) == 1);
  std::size_t total = 0;
  for (auto c : p.cells) total += c;
  CHECK(total == 2);

  // lion (0) gt detected as cheetah (1); cat (2) missed
  std::vector<ImageOutcome> mixed{match_detections(std::vector<Detection>{{1, 0.9, kA}}, gts)};
  const ConfusionMatrix m = confusion(mixed, 3);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(2, m.background()) == 1);
  CHECK(m.at(0, m.background()) == 0);

  std::vector<ImageOutcome> spurious{match_detections(std::vector<Detection>{{2, 0.9, kFar}}, {})};
  CHECK(confusion(spurious, 3).at(3, 2) == 1);
}

TEST_CASE("metrics examples") {
  const Metrics m = compute_metrics(planted(91, 5, 4), 1);
  CHECK(m.tp == 91);
  CHECK(m.fp == 5);
  CHECK(m.fn == 4);
  CHECK(m.accuracy == 0.91);
  CHECK(m.precision == doctest::Approx(91.0 / 96.0));
  CHECK(m.recall == doctest::Approx(91.0 / 95.0));
  CHECK(m.frame_hit_rate == doctest::Approx(0.91));

  const Metrics empty = compute_metrics(std::vector<ImageOutcome>{}, 2);
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
  CHECK(empty.accuracy == 1.0);
  CHECK(empty.map == 1.0);
  CHECK(empty.classification_accuracy == 1.0);

  const Metrics perfect = compute_metrics(planted(10, 0, 0), 1);
  CHECK(perfect.ap[0] == 1.0);
  CHECK(perfect.map == 1.0);

  const std::string text = m.to_text({"lion"});
  CHECK(text.find("accuracy=0.910000\n") != std::string::npos);
  CHECK(text.find("ap[lion]=") != std::string::npos);
  const std::string csv = m.pr_csv({"lion"});
  CHECK(csv.rfind("class,threshold,precision,recall\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 96);
}

TEST_CASE("average precision examples") {
  const std::vector<ScoredHit> ranked{{0.9, true}, {0.8, false}, {0.7, true}};
  // recall 0.5 at precision 1, recall 1 at precision 2/3
  CHECK(average_precision(ranked, 2) == doctest::Approx(0.5 + 0.5 * 2.0 / 3.0));
  CHECK(average_precision(ranked, 4) == doctest::Approx(0.25 + 0.25 * 2.0 / 3.0));
  CHECK(average_precision(std::vector<ScoredHit>{}, 3) == 0.0);
  CHECK(average_precision(ranked, 0) == 0.0);
}

TEST_CASE("average precision agrees with the threshold-sweep oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng() % 30;
    std::vector<ScoredHit> hits;
    std::vector<std::pair<double, bool>> pairs;
    std::size_t tps = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (static_cast<double>(rng() % 1000000) + i * 1e-7) / 1e6;  // distinct
      const bool tp = rng() % 2;
      tps += tp;
      hits.push_back({s, tp});
      pairs.emplace_back(s, tp);
    }
    const std::size_t n_gt = std::max<std::size_t>(1, tps + rng() % 4);
    CHECK(average_precision(hits, n_gt) == doctest::Approx(oracle::average_precision(pairs, n_gt)).epsilon(1e-12));
  }
}

TEST_CASE("conservation and ordering properties") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    double next = 1.0;
    std::vector<ImageOutcome> outcomes;
    std::size_t total_gts = 0, total_dets = 0;
    for (int img = 0, n = 1 + rng() % 6; img < n; ++img) {
      auto [dets, gts] = random_image(rng, next);
      total_gts += gts.size();
      total_dets += dets.size();
      const ImageOutcome o = match_detections(dets, gts);
      CHECK(o.tp.size() + o.fn.size() == gts.size());
      CHECK(o.tp.size() + o.fp.size() == dets.size());
      outcomes.push_back(o);
    }
    const Metrics m = compute_metrics(outcomes, 3);
    CHECK(m.tp + m.fn == total_gts);
    CHECK(m.tp + m.fp == total_dets);
    if (m.tp + m.fp > 0 && m.tp + m.fn > 0) CHECK(m.accuracy <= std::min(m.precision, m.recall));

    std::vector<ImageOutcome> shuffled = outcomes;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Metrics s = compute_metrics(shuffled, 3);
    CHECK(s.tp == m.tp);
    CHECK(s.accuracy == m.accuracy);
    CHECK(s.map == doctest::Approx(m.map).epsilon(1e-12));
    CHECK(s.confusion.cells == m.confusion.cells);

    // a higher score threshold never adds false positives
    const double thr = fixture::uniform(rng, 0.9, 1.0);
    std::size_t fp_hi = 0;
    for (const ImageOutcome& o : outcomes) {
      std::vector<Detection> kept;
      for (const Detection& d : o.detections) {
        if (d.score >= thr) kept.push_back(d);
      }
      fp_hi += match_detections(kept, o.gts).fp.size();
    }
    CHECK(fp_hi <= m.fp);
  }
}

TEST_CASE("harness examples") {
  const Dataset d = Dataset::from_images(fixture::single_object_images(100, {"lion"}));
  const BoundingBox gt = d.ground_truths(0)[0].box;

  DetectorScript perfect;
  perfect.labels = {"lion"};
  DetectorScript planted91 = perfect;
  for (std::uint64_t i = 0; i < 100; ++i) {
    perfect.frames[i] = {{0, 0.9, gt}};
    if (i % 11 != 3) planted91.frames[i] = {{0, 0.9, gt}};
  }
  REQUIRE(planted91.frames.size() == 91);

  HarnessConfig cfg;
  cfg.steps = 100;
  StubDetector p(perfect);
  CHECK(run_harness(d, {}, p, cfg).metrics.accuracy == 1.0);

  StubDetector s(planted91);
  cfg.keep_log = true;
  const HarnessResult r = run_harness(d, {}, s, cfg);
  CHECK(r.metrics.accuracy == 0.91);
  CHECK(r.metrics.fp == 0);
  CHECK(r.log.size() == 100);
  CHECK(r.log[3] == "step=3 image=img_0003.ppm tp=0 fp=0 fn=1");

  PlantedDetector a(d, 0.91, 5), b(d, 0.91, 5);
  cfg.keep_log = false;
  cfg.steps = 100;
  const Metrics once = run_harness(d, {}, a, cfg).metrics;
  cfg.steps = 10'000;
  const Metrics cycled = run_harness(d, {}, b, cfg).metrics;
  CHECK(cycled.images == 10'000);
  CHECK(cycled.tp + cycled.fn == 10'000);
  CHECK(once.tp + once.fn == 100);

  // Deterministic detectors repeat per image, so counts scale by 100 exactly.
  DetectorScript periodic = perfect;
  periodic.frames.clear();
  for (std::uint64_t step = 0; step < 10'000; ++step) {
    if (step % 100 % 11 != 3) periodic.frames[step] = {{0, 0.9, gt}};
  }
  StubDetector small(periodic), large(periodic);
  cfg.steps = 100;
  const Metrics m100 = run_harness(d, {}, small, cfg).metrics;
  cfg.steps = 10'000;
  const Metrics m10k = run_harness(d, {}, large, cfg).metrics;
  CHECK(m10k.tp == 100 * m100.tp);
  CHECK(m10k.fn == 100 * m100.fn);
  CHECK(m10k.accuracy == m100.accuracy);
  CHECK(m10k.map == doctest::Approx(m100.map));

  cfg.steps = 0;
  CHECK_THROWS(run_harness(d, {}, small, cfg));
}

TEST_CASE("harness keeps unknown detector labels as false positives") {
  const Dataset d = Dataset::from_images(fixture::single_object_images(2, {"lion"}));
  DetectorScript script;
  script.labels = {"zebra"};
  script.frames[0] = {{0, 0.9, d.ground_truths(0)[0].box}};
  StubDetector det(script);
  HarnessConfig cfg;
  cfg.steps = 2;
  const HarnessResult r = run_harness(d, {}, det, cfg);
  CHECK(r.labels == std::vector<std::string>{"lion", "zebra"});
  CHECK(r.metrics.fp == 1);
  CHECK(r.metrics.fn == 2);
}

}  // TEST_SUITE
