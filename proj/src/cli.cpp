#include "scarecrow/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scarecrow/dataset.hpp"
#include "scarecrow/geometry.hpp"
#include "scarecrow/harness.hpp"
#include "scarecrow/monitor/pipeline.hpp"
#include "scarecrow/network.hpp"

namespace fs = std::filesystem;

namespace scarecrow {

namespace {

/// Operational failure with a one-line diagnostic.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::pair<int, int> parse_size(const std::string& s) {
  int w = 0;
  int h = 0;
  char x = 0;
  std::istringstream in(s);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !in.eof()) {
    throw CLI::ValidationError("--size", "expected WxH, got '" + s + "'");
  }
  return {w, h};
}

struct DetectorFlags {
  std::string weights;
  std::string stub;
  CLI::Option* weights_opt = nullptr;
  CLI::Option* stub_opt = nullptr;

  void add(CLI::App* app) {
    weights_opt = app->add_option("--weights", weights, "SCRW1 weights file");
    stub_opt = app->add_option("--stub", stub, "scripted detections (JSON)");
    weights_opt->excludes(stub_opt);
  }

  void apply(GlobalConfig& cfg) const {
    if (given(weights_opt)) {
      cfg.weights_path = weights;
      cfg.stub_path.clear();
    }
    if (given(stub_opt)) {
      cfg.stub_path = stub;
      cfg.weights_path.clear();
    }
  }
};

void write_findings(const std::vector<Finding>& findings, std::ostream& out) {
  for (const Finding& f : findings) out << f.to_line() << '\n';
}

std::string detection_json(const Detection& d, const std::vector<std::string>& labels) {
  nlohmann::ordered_json j;
  j["class"] = (d.class_id >= 0 && static_cast<std::size_t>(d.class_id) < labels.size())
                   ? labels[d.class_id]
                   : std::to_string(d.class_id);
  j["score"] = d.score;
  j["box"] = {d.box.xmin, d.box.ymin, d.box.xmax, d.box.ymax};
  return j.dump();
}

}  // namespace

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

std::string version_string() {
  return std::string("scarecrow ") + SCARECROW_VERSION + " (weights format SCRW" +
         std::to_string(kWeightsFormatVersion) + ")";
}

std::unique_ptr<Detector> make_detector(const GlobalConfig& cfg) {
  if (!cfg.stub_path.empty()) return std::make_unique<StubDetector>(DetectorScript::load(cfg.stub_path));
  Network net = cfg.weights_path.empty()
                    ? synthesize_network(cfg.weights_seed, static_cast<int>(cfg.labels.size()), cfg.anchors)
                    : load_weights(cfg.weights_path);
  TinyDetectorNet tiny(std::move(net), cfg.anchors);
  if (static_cast<std::size_t>(tiny.num_classes()) != cfg.labels.size()) {
    throw Failure("network predicts " + std::to_string(tiny.num_classes()) + " classes but " +
                  std::to_string(cfg.labels.size()) + " labels are configured");
  }
  return std::make_unique<NetDetector>(std::move(tiny), cfg.labels, cfg.postprocess);
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Animal-detection monitor: anchors, datasets, evaluation and the live loop.",
               "scarecrow"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "GlobalConfig JSON (falls back to $SCARECROW_CONFIG)");
  bool show_version = false;
  app.add_flag("--version", show_version, "print version and weights format");

  // priors
  CLI::App* priors = app.add_subcommand("priors", "dump anchors as CSV");
  int image_size = 0;
  std::vector<int> fmaps;
  std::vector<double> ratios;
  double s_min = 0;
  double s_max = 0;
  bool no_extra = false;
  auto* o_img = priors->add_option("--image-size", image_size);
  auto* o_fm = priors->add_option("--feature-maps", fmaps)->delimiter(',');
  auto* o_ratio = priors->add_option("--ratios", ratios)->delimiter(',');
  auto* o_smin = priors->add_option("--s-min", s_min);
  auto* o_smax = priors->add_option("--s-max", s_max);
  auto* o_noextra = priors->add_flag("--no-extra-box", no_extra);

  // validate
  CLI::App* validate = app.add_subcommand("validate", "check a VOC dataset");
  std::string dataset_root;
  std::size_t min_per_class = kDefaultMinPerClass;
  validate->add_option("dataset", dataset_root)->required();
  validate->add_option("--min-per-class", min_per_class);

  // split
  CLI::App* split_cmd = app.add_subcommand("split", "stratified train/test split");
  std::string split_root;
  std::string split_out;
  SplitSpec split_spec;
  split_cmd->add_option("dataset", split_root)->required();
  split_cmd->add_option("--train-frac", split_spec.train_fraction)->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", split_spec.seed);
  split_cmd->add_option("--out", split_out, "directory for train.txt and test.txt")->required();

  // detect
  CLI::App* detect = app.add_subcommand("detect", "detections for one image as JSON lines");
  std::string image_path;
  std::uint64_t frame_index = 0;
  DetectorFlags detect_flags;
  detect->add_option("image", image_path)->required();
  detect->add_option("--frame", frame_index, "frame index given to scripted detectors");
  detect_flags.add(detect);

  // eval
  CLI::App* eval = app.add_subcommand("eval", "evaluate a detector over a dataset");
  std::string eval_dataset;
  std::size_t eval_steps = 0;
  double eval_iou = 0;
  double eval_score = 0;
  std::string pr_csv;
  double planted = -1;
  std::uint64_t planted_seed = 1;
  DetectorFlags eval_flags;
  auto* o_eds = eval->add_option("--dataset", eval_dataset);
  auto* o_steps = eval->add_option("--steps", eval_steps)->check(CLI::PositiveNumber);
  auto* o_eiou = eval->add_option("--iou", eval_iou)->check(CLI::Range(0.0, 1.0));
  auto* o_escore = eval->add_option("--score", eval_score)->check(CLI::Range(0.0, 1.0));
  eval->add_option("--pr-csv", pr_csv, "write precision/recall curves here");
  auto* o_planted = eval->add_option("--planted", planted,
                                     "use a detector that echoes ground truth with this probability")
                        ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", planted_seed, "seed for --planted");
  eval_flags.add(eval);
  o_planted->excludes(eval_flags.weights_opt)->excludes(eval_flags.stub_opt);

  // monitor
  CLI::App* monitor = app.add_subcommand("monitor", "run the live pipeline over a frame source");
  MonitorSettings ms;
  std::string policy_path;
  bool offline = false;
  DetectorFlags mon_flags;
  auto* o_src = monitor->add_option("--source", ms.source, "directory of .ppm or manifest");
  auto* o_pol = monitor->add_option("--policy", policy_path);
  auto* o_sink = monitor->add_option("--sink", ms.sink, "-, file path, or http:// URL");
  auto* o_fps = monitor->add_option("--fps", ms.fps)->check(CLI::PositiveNumber);
  auto* o_log = monitor->add_option("--log", ms.log_path, "JSONL event log");
  auto* o_spool = monitor->add_option("--spool", ms.spool_path);
  auto* o_depth = monitor->add_option("--queue-depth", ms.queue_depth)->check(CLI::PositiveNumber);
  auto* o_offline = monitor->add_flag("--offline", offline, "no pacing; block instead of dropping");
  mon_flags.add(monitor);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "throughput and latency of the tiny net");
  std::size_t bench_frames = 100;
  std::string bench_size = "160x160";
  DetectorFlags bench_flags;
  bench->add_option("--frames", bench_frames)->check(CLI::PositiveNumber);
  bench->add_option("--size", bench_size);
  bench_flags.add(bench);

  // replay
  CLI::App* replay = app.add_subcommand("replay", "resend spooled alerts");
  std::string replay_spool_path;
  std::string replay_url;
  replay->add_option("--spool", replay_spool_path)->required();
  replay->add_option("--sink", replay_url, "webhook URL")->required();

  // synth-weights
  CLI::App* synth = app.add_subcommand("synth-weights", "write seeded default weights");
  std::string synth_out;
  std::uint64_t synth_seed = 42;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--seed", synth_seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    // --version short-circuits the subcommand requirement
    for (const auto& a : args) {
      if (a == "--version") {
        out << version_string() << '\n';
        return kExitOk;
      }
    }
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n' << app.help();
    return kExitUsage;
  }
  (void)show_version;

  try {
    GlobalConfig cfg;
    if (auto path = config_path_from_env(config_path)) cfg = GlobalConfig::load(*path);

    if (priors->parsed()) {
      if (given(o_img)) cfg.anchors.image_size = image_size;
      if (given(o_fm)) cfg.anchors.feature_map_sizes = fmaps;
      if (given(o_ratio)) cfg.anchors.aspect_ratios = ratios;
      if (given(o_smin)) cfg.anchors.s_min = s_min;
      if (given(o_smax)) cfg.anchors.s_max = s_max;
      if (given(o_noextra)) cfg.anchors.add_extra_scale_box = !no_extra;
      const AnchorSet set = generate_anchors(cfg.anchors);
      out << "layer,row,col,ratio_index,cx,cy,w,h\n";
      for (std::size_t i = 0; i < set.boxes.size(); ++i) {
        const AnchorSlot& s = set.slots[i];
        const CenterBox& b = set.boxes[i];
        out << s.layer << ',' << s.row << ',' << s.col << ',' << s.ratio_index << ','
            << format_g(b.cx, 9) << ',' << format_g(b.cy, 9) << ',' << format_g(b.w, 9) << ','
            << format_g(b.h, 9) << '\n';
      }
      return kExitOk;
    }

    if (validate->parsed()) {
      LoadedDataset loaded = load_dataset(dataset_root);
      std::vector<Finding> findings = loaded.findings;
      for (Finding& f : validate_dataset(loaded.dataset, min_per_class)) findings.push_back(std::move(f));
      write_findings(findings, out);
      for (const Finding& f : findings) {
        if (f.level == Finding::Level::error) return kExitFailure;
      }
      return kExitOk;
    }

    if (split_cmd->parsed()) {
      LoadedDataset loaded = load_dataset(split_root);
      for (const Finding& f : loaded.findings) {
        if (f.level == Finding::Level::error) throw Failure("dataset error: " + f.message);
      }
      const SplitResult r = split(loaded.dataset, split_spec);
      fs::create_directories(split_out);
      auto write_list = [&](const Dataset& d, const std::string& name) {
        std::ofstream f(fs::path(split_out) / name);
        if (!f) throw Failure("cannot write " + (fs::path(split_out) / name).string());
        for (const AnnotatedImage& img : d.images) f << img.filename << '\n';
      };
      write_list(r.train, "train.txt");
      write_list(r.test, "test.txt");
      out << "train=" << r.train.size() << " test=" << r.test.size() << '\n';
      return kExitOk;
    }

    if (detect->parsed()) {
      detect_flags.apply(cfg);
      auto det = make_detector(cfg);
      Frame frame;
      frame.index = frame_index;
      frame.image = read_ppm_file(image_path);
      for (const Detection& d : det->detect(frame)) {
        if (d.score < cfg.postprocess.score_threshold) continue;
        out << detection_json(d, det->labels()) << '\n';
      }
      return kExitOk;
    }

    if (eval->parsed()) {
      eval_flags.apply(cfg);
      HarnessConfig hc;
      hc.dataset_path = given(o_eds) ? eval_dataset : cfg.eval.dataset;
      hc.steps = given(o_steps) ? eval_steps : cfg.eval.steps;
      hc.iou_threshold = given(o_eiou) ? eval_iou : cfg.eval.iou_threshold;
      hc.score_threshold = given(o_escore) ? eval_score : cfg.postprocess.score_threshold;
      if (hc.dataset_path.empty()) throw Failure("eval needs --dataset or eval.dataset in the config");
      LoadedDataset loaded = load_dataset(hc.dataset_path);
      for (const Finding& f : loaded.findings) {
        if (f.level == Finding::Level::error) throw Failure("dataset error: " + f.message);
      }
      std::unique_ptr<Detector> det;
      if (given(o_planted)) {
        det = std::make_unique<PlantedDetector>(loaded.dataset, planted, planted_seed);
      } else {
        det = make_detector(cfg);
      }
      const HarnessResult r = run_harness(loaded.dataset, loaded.image_paths, *det, hc);
      out << r.metrics.to_text(r.labels);
      if (!pr_csv.empty()) {
        std::ofstream f(pr_csv);
        if (!f) throw Failure("cannot write " + pr_csv);
        f << r.metrics.pr_csv(r.labels);
      }
      return kExitOk;
    }

    if (monitor->parsed()) {
      mon_flags.apply(cfg);
      MonitorSettings m = cfg.monitor;
      if (given(o_src)) m.source = ms.source;
      if (given(o_sink)) m.sink = ms.sink;
      if (given(o_fps)) m.fps = ms.fps;
      if (given(o_log)) m.log_path = ms.log_path;
      if (given(o_spool)) m.spool_path = ms.spool_path;
      if (given(o_depth)) m.queue_depth = ms.queue_depth;
      if (given(o_offline)) m.realtime = !offline;
      if (given(o_pol)) cfg.policy = PolicyConfig::load(policy_path);
      if (m.source.empty()) throw Failure("monitor needs --source or monitor.source in the config");

      auto det = make_detector(cfg);
      auto warn = [&err](const std::string& msg) { err << "warning: " << msg << '\n'; };
      FileFrameSource source = FileFrameSource::open(m.source, m.fps, warn);
      std::unique_ptr<AlertSink> sink;
      if (m.sink.empty() || m.sink == "-" || m.sink == "stdout") {
        sink = std::make_unique<StreamSink>(out);
      } else {
        sink = make_sink(m.sink, m.spool_path);
      }
      EventLog log(m.log_path);
      PipelineConfig pc;
      pc.fps = m.fps;
      pc.realtime = m.realtime;
      pc.queue_depth = m.queue_depth;
      pc.policy = cfg.policy;
      PipelineHooks hooks;
      hooks.on_warning = warn;
      hooks.stop = &interrupt_flag();
      const PipelineStats s = run_pipeline(source, *det, log, sink.get(), pc, hooks);
      err << "frames_read=" << s.frames_read << " processed=" << s.frames_processed
          << " dropped=" << s.frames_dropped << " events=" << s.events_opened
          << " commands=" << s.commands << " alerts=" << s.alerts_delivered
          << " spooled=" << s.alerts_spooled << '\n';
      return kExitOk;
    }

    if (bench->parsed()) {
      bench_flags.apply(cfg);
      const auto [w, h] = parse_size(bench_size);
      auto det = make_detector(cfg);
      SyntheticFrameSource source(bench_frames, w, h, 30.0);
      EventLog log("");
      PipelineConfig pc;
      pc.realtime = false;
      pc.policy = cfg.policy;
      const PipelineStats s = run_pipeline(source, *det, log, nullptr, pc);
      const double fps = s.wall_s > 0 ? s.frames_processed / s.wall_s : 0.0;
      out << "frames=" << s.frames_processed << " size=" << w << 'x' << h
          << " frames_per_s=" << format_g(fps, 4)
          << " p50_ms=" << format_g(percentile(s.latencies_ms, 50), 4)
          << " p99_ms=" << format_g(percentile(s.latencies_ms, 99), 4) << '\n';
      return kExitOk;
    }

    if (replay->parsed()) {
      Spool spool(replay_spool_path);
      WebhookSink sink(replay_url, nullptr);
      const ReplayResult r =
          replay_spool(spool, [&sink](const std::string& p) { return sink.post_once(p); });
      out << "delivered=" << r.delivered << " remaining=" << r.remaining << '\n';
      return r.remaining == 0 ? kExitOk : kExitFailure;
    }

    if (synth->parsed()) {
      save_weights(synth_out, synthesize_network(synth_seed, static_cast<int>(cfg.labels.size()),
                                                 cfg.anchors));
      out << "wrote " << synth_out << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace scarecrow
