#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scarecrow/cli.hpp"
#include "scarecrow/dataset.hpp"
#include "scarecrow/detector.hpp"
#include "scarecrow/evaluation.hpp"
#include "scarecrow/geometry.hpp"
#include "scarecrow/image.hpp"
#include "scarecrow/monitor/hysteresis.hpp"
#include "scarecrow/monitor/policy.hpp"
#include "scarecrow/multibox.hpp"
#include "scarecrow/network.hpp"

namespace py = pybind11;
using namespace scarecrow;

PYBIND11_MODULE(_scarecrow, m) {
  m.doc() = "SSD-style detection math, dataset tooling and the monitoring policy";
  m.attr("__version__") = SCARECROW_VERSION;

  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<MultiboxError>(m, "MultiboxError", PyExc_ValueError);
  py::register_exception<VocError>(m, "VocError", PyExc_ValueError);
  py::register_exception<WeightsError>(m, "WeightsError", PyExc_ValueError);
  py::register_exception<PolicyError>(m, "PolicyError", PyExc_ValueError);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<>())
      .def(py::init([](double x0, double y0, double x1, double y1) {
             return BoundingBox{x0, y0, x1, y1};
           }),
           py::arg("xmin"), py::arg("ymin"), py::arg("xmax"), py::arg("ymax"))
      .def_readwrite("xmin", &BoundingBox::xmin)
      .def_readwrite("ymin", &BoundingBox::ymin)
      .def_readwrite("xmax", &BoundingBox::xmax)
      .def_readwrite("ymax", &BoundingBox::ymax)
      .def("area", &BoundingBox::area)
      .def("valid", &BoundingBox::valid)
      .def(py::self == py::self)
      .def("__repr__", [](const BoundingBox& b) { return to_string(b); });

  py::class_<CenterBox>(m, "CenterBox")
      .def(py::init([](double cx, double cy, double w, double h) { return CenterBox{cx, cy, w, h}; }),
           py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"))
      .def_readwrite("cx", &CenterBox::cx)
      .def_readwrite("cy", &CenterBox::cy)
      .def_readwrite("w", &CenterBox::w)
      .def_readwrite("h", &CenterBox::h);

  py::class_<BoxOffsets>(m, "BoxOffsets")
      .def(py::init([](double tx, double ty, double tw, double th) {
             return BoxOffsets{tx, ty, tw, th};
           }),
           py::arg("tx"), py::arg("ty"), py::arg("tw"), py::arg("th"))
      .def_readwrite("tx", &BoxOffsets::tx)
      .def_readwrite("ty", &BoxOffsets::ty)
      .def_readwrite("tw", &BoxOffsets::tw)
      .def_readwrite("th", &BoxOffsets::th);

  py::class_<Variances>(m, "Variances")
      .def(py::init<>())
      .def(py::init([](double c, double s) { return Variances{c, s}; }))
      .def_readwrite("center", &Variances::center)
      .def_readwrite("size", &Variances::size);

  py::class_<AnchorConfig>(m, "AnchorConfig")
      .def(py::init<>())
      .def_readwrite("image_size", &AnchorConfig::image_size)
      .def_readwrite("feature_map_sizes", &AnchorConfig::feature_map_sizes)
      .def_readwrite("aspect_ratios", &AnchorConfig::aspect_ratios)
      .def_readwrite("s_min", &AnchorConfig::s_min)
      .def_readwrite("s_max", &AnchorConfig::s_max)
      .def_readwrite("add_extra_scale_box", &AnchorConfig::add_extra_scale_box)
      .def("expected_count", &AnchorConfig::expected_count);

  py::class_<AnchorSet>(m, "AnchorSet")
      .def_readonly("boxes", &AnchorSet::boxes)
      .def("__len__", [](const AnchorSet& s) { return s.boxes.size(); });

  m.def("iou", &iou);
  m.def("to_center", &to_center);
  m.def("to_corner", &to_corner);
  m.def("generate_anchors", &generate_anchors, py::arg("config") = AnchorConfig{});
  m.def("encode", &encode, py::arg("gt"), py::arg("anchor"), py::arg("variances") = Variances{});
  m.def("decode", &decode, py::arg("offsets"), py::arg("anchor"),
        py::arg("variances") = Variances{});

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](int c, BoundingBox b) { return GroundTruth{c, b}; }), py::arg("class_id"),
           py::arg("box"))
      .def_readwrite("class_id", &GroundTruth::class_id)
      .def_readwrite("box", &GroundTruth::box);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](int c, double s, BoundingBox b) { return Detection{c, s, b}; }),
           py::arg("class_id"), py::arg("score"), py::arg("box"))
      .def_readwrite("class_id", &Detection::class_id)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("box", &Detection::box)
      .def(py::self == py::self);

  m.def(
      "match_anchors",
      [](const AnchorSet& a, const std::vector<GroundTruth>& gts, double thr) {
        std::vector<int> out;
        for (const AnchorMatch& am : match_anchors(a, gts, thr).anchors) out.push_back(am.gt_index);
        return out;
      },
      py::arg("anchors"), py::arg("gts"), py::arg("iou_threshold") = 0.5,
      "gt index per anchor, -1 for background");

  m.def(
      "nms",
      [](const std::vector<Detection>& d, double thr, std::size_t k) { return nms(d, thr, k); },
      py::arg("detections"), py::arg("iou_threshold") = 0.45, py::arg("top_k") = 100);

  py::class_<LossReport>(m, "LossReport")
      .def_readonly("loc_loss", &LossReport::loc_loss)
      .def_readonly("conf_loss", &LossReport::conf_loss)
      .def_readonly("total", &LossReport::total)
      .def_readonly("n_matched", &LossReport::n_matched)
      .def("__repr__", &LossReport::to_text);

  m.def(
      "total_loss",
      [](const std::vector<BoxOffsets>& offsets, const std::vector<double>& scores, int num_classes,
         const std::vector<GroundTruth>& gts, const AnchorSet& anchors, double neg_pos_ratio) {
        RawPredictions p{offsets, scores, num_classes};
        if (p.scores.size() != p.offsets.size() * p.stride()) {
          throw MultiboxError("scores must hold (num_classes + 1) logits per anchor");
        }
        LossOptions opts;
        opts.neg_pos_ratio = neg_pos_ratio;
        return total_loss(p, gts, anchors, opts);
      },
      py::arg("offsets"), py::arg("scores"), py::arg("num_classes"), py::arg("gts"),
      py::arg("anchors"), py::arg("neg_pos_ratio") = 3.0);

  py::class_<AnnotatedObject>(m, "AnnotatedObject")
      .def_readonly("label", &AnnotatedObject::label)
      .def_readonly("box", &AnnotatedObject::box);
  py::class_<AnnotatedImage>(m, "AnnotatedImage")
      .def_readonly("filename", &AnnotatedImage::filename)
      .def_readonly("width", &AnnotatedImage::width)
      .def_readonly("height", &AnnotatedImage::height)
      .def_readonly("objects", &AnnotatedImage::objects);
  m.def("parse_voc_xml", [](const std::string& text) { return parse_voc_xml(text); });
  m.def("serialize_voc", &serialize_voc);

  m.def(
      "validate_dataset",
      [](const std::string& root, std::size_t min_per_class) {
        LoadedDataset loaded = load_dataset(root);
        std::vector<std::string> lines;
        for (const Finding& f : loaded.findings) lines.push_back(f.to_line());
        for (const Finding& f : validate_dataset(loaded.dataset, min_per_class)) {
          lines.push_back(f.to_line());
        }
        return lines;
      },
      py::arg("root"), py::arg("min_per_class") = kDefaultMinPerClass,
      "finding lines `LEVEL<TAB>code<TAB>message`");

  m.def("average_precision", [](const std::vector<std::pair<double, bool>>& hits, std::size_t n_gt) {
    std::vector<ScoredHit> h;
    for (const auto& [s, tp] : hits) h.push_back({s, tp});
    return average_precision(h, n_gt, nullptr);
  });

  m.def("decide_action", [](const std::string& label, const std::string& policy_json) {
    const PolicyConfig p = policy_json.empty() ? PolicyConfig::defaults()
                                               : PolicyConfig::from_json(policy_json);
    const Disposition d = decide_action(p, label);
    return std::make_pair(std::string(to_string(d.tier)), std::string(to_string(d.action)));
  }, py::arg("label"), py::arg("policy_json") = "");

  py::class_<HysteresisTracker>(m, "HysteresisTracker")
      .def(py::init([](int k, int mm, int m_clear) {
             return HysteresisTracker(HysteresisParams{k, mm, m_clear});
           }),
           py::arg("k") = 3, py::arg("m") = 5, py::arg("m_clear") = 5)
      .def(
          "update",
          [](HysteresisTracker& t, std::uint64_t frame, const std::map<std::string, double>& hits) {
            std::vector<ClassHit> h;
            for (const auto& [l, s] : hits) h.push_back({l, s});
            const HysteresisUpdate up = t.update(frame, h);
            auto conv = [](const std::vector<MonitorEvent>& evs) {
              py::list out;
              for (const MonitorEvent& e : evs) {
                out.append(py::dict(py::arg("id") = e.id, py::arg("label") = e.label,
                                    py::arg("first_frame") = e.first_frame,
                                    py::arg("last_frame") = e.last_frame,
                                    py::arg("peak_score") = e.peak_score));
              }
              return out;
            };
            return py::make_tuple(conv(up.opened), conv(up.closed));
          },
          "returns (opened, closed) lists of event dicts");

  m.def(
      "detect_ppm",
      [](const std::string& path, std::uint64_t seed, double score_threshold) {
        AnchorConfig anchors;
        const auto labels = default_labels();
        PostprocessOptions opts;
        opts.score_threshold = score_threshold;
        NetDetector det(TinyDetectorNet(synthesize_network(seed, static_cast<int>(labels.size()), anchors),
                                        anchors),
                        labels, opts);
        Frame f;
        f.image = read_ppm_file(path);
        return det.detect(f);
      },
      py::arg("path"), py::arg("seed") = 42, py::arg("score_threshold") = 0.5,
      "default tiny net with seeded weights");

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_command(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "runs a CLI subcommand; returns (exit_code, stdout, stderr)");
}
