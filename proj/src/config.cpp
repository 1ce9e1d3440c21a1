#include "scarecrow/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace scarecrow {

namespace {

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void number(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) {
      errors_.push_back(path + key + " must be a number");
      return;
    }
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        errors_.push_back(path + key + " must be an integer");
        return;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<std::int64_t>() < 0) {
          errors_.push_back(path + key + " must be >= 0");
          return;
        }
      }
    }
    out = v.get<T>();
  }

  void string(const json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) {
      errors_.push_back(path + key + " must be a string");
      return;
    }
    out = j.at(key).get<std::string>();
  }

  void boolean(const json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_boolean()) {
      errors_.push_back(path + key + " must be true or false");
      return;
    }
    out = j.at(key).get<bool>();
  }

  template <class T>
  void number_list(const json& j, const std::string& path, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    std::vector<T> tmp;
    if (v.is_array()) {
      for (const json& e : v) {
        if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_integer())) {
          tmp.clear();
          break;
        }
        tmp.push_back(e.get<T>());
      }
      if (tmp.size() == v.size()) {
        out = std::move(tmp);
        return;
      }
    }
    errors_.push_back(path + key + " must be an array of numbers");
  }

  bool object(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) return false;
    if (!j.at(key).is_object()) {
      errors_.push_back(path + key + " must be an object");
      return false;
    }
    return true;
  }

 private:
  std::vector<std::string>& errors_;
};

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || p == "-" || base.empty() || fs::path(p).is_absolute()) return p;
  if (p.rfind("http://", 0) == 0 || p.rfind("https://", 0) == 0) return p;
  return (fs::path(base) / p).string();
}

}  // namespace

ConfigError::ConfigError(std::string message, int line, int column)
    : std::runtime_error("config parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      problems_{message}, line_(line), column_(column) {}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config: " + join_lines(problems)), problems_(std::move(problems)) {}

std::pair<int, int> line_column(std::string_view text, std::size_t offset) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

GlobalConfig GlobalConfig::from_json(std::string_view text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(what, line, col);
  }
  if (!doc.is_object()) throw ConfigError({"config root must be an object"});

  GlobalConfig c;
  std::vector<std::string> errors;
  Reader r(errors);

  if (r.object(doc, "", "anchors")) {
    const json& a = doc.at("anchors");
    r.number(a, "anchors.", "image_size", c.anchors.image_size);
    r.number_list(a, "anchors.", "feature_map_sizes", c.anchors.feature_map_sizes);
    r.number_list(a, "anchors.", "aspect_ratios", c.anchors.aspect_ratios);
    r.number(a, "anchors.", "s_min", c.anchors.s_min);
    r.number(a, "anchors.", "s_max", c.anchors.s_max);
    r.boolean(a, "anchors.", "extra_scale_box", c.anchors.add_extra_scale_box);
  }
  if (doc.contains("variances")) {
    std::vector<double> v;
    r.number_list(doc, "", "variances", v);
    if (v.size() == 2) {
      c.postprocess.variances = {v[0], v[1]};
    } else if (doc.at("variances").is_array()) {
      errors.push_back("variances must have exactly two entries");
    }
  }
  if (r.object(doc, "", "thresholds")) {
    const json& t = doc.at("thresholds");
    r.number(t, "thresholds.", "score", c.postprocess.score_threshold);
    r.number(t, "thresholds.", "nms_iou", c.postprocess.nms_iou);
    r.number(t, "thresholds.", "top_k", c.postprocess.top_k);
    r.number(t, "thresholds.", "match_iou", c.match_iou);
  }
  r.number(doc, "", "neg_pos_ratio", c.neg_pos_ratio);
  if (r.object(doc, "", "detector")) {
    const json& d = doc.at("detector");
    r.string(d, "detector.", "weights", c.weights_path);
    r.string(d, "detector.", "stub", c.stub_path);
    r.number(d, "detector.", "seed", c.weights_seed);
  }
  if (doc.contains("labels")) {
    const json& l = doc.at("labels");
    bool ok = l.is_array();
    std::vector<std::string> labels;
    if (ok) {
      for (const json& e : l) {
        if (!e.is_string()) ok = false;
        else labels.push_back(e.get<std::string>());
      }
    }
    if (ok) c.labels = std::move(labels);
    else errors.push_back("labels must be an array of strings");
  }
  if (doc.contains("policy")) {
    const json& p = doc.at("policy");
    try {
      if (p.is_string()) {
        c.policy_path = resolve(base_dir, p.get<std::string>());
      } else if (p.is_object()) {
        c.policy = PolicyConfig::from_json(p.dump());
      } else {
        errors.push_back("policy must be a path or an object");
      }
    } catch (const PolicyError& e) {
      for (const auto& msg : e.problems()) errors.push_back("policy: " + msg);
    }
  }
  if (r.object(doc, "", "monitor")) {
    const json& m = doc.at("monitor");
    r.string(m, "monitor.", "source", c.monitor.source);
    r.number(m, "monitor.", "fps", c.monitor.fps);
    r.boolean(m, "monitor.", "realtime", c.monitor.realtime);
    r.number(m, "monitor.", "queue_depth", c.monitor.queue_depth);
    r.string(m, "monitor.", "sink", c.monitor.sink);
    r.string(m, "monitor.", "log", c.monitor.log_path);
    r.string(m, "monitor.", "spool", c.monitor.spool_path);
  }
  if (r.object(doc, "", "eval")) {
    const json& e = doc.at("eval");
    r.string(e, "eval.", "dataset", c.eval.dataset);
    r.number(e, "eval.", "steps", c.eval.steps);
    r.number(e, "eval.", "iou", c.eval.iou_threshold);
  }

  c.weights_path = resolve(base_dir, c.weights_path);
  c.stub_path = resolve(base_dir, c.stub_path);
  c.monitor.source = resolve(base_dir, c.monitor.source);
  c.monitor.sink = resolve(base_dir, c.monitor.sink);
  c.monitor.log_path = resolve(base_dir, c.monitor.log_path);
  c.monitor.spool_path = resolve(base_dir, c.monitor.spool_path);
  c.eval.dataset = resolve(base_dir, c.eval.dataset);

  if (!c.policy_path.empty()) {
    if (!fs::exists(c.policy_path)) {
      errors.push_back("policy file does not exist: " + c.policy_path);
    } else {
      try {
        c.policy = PolicyConfig::load(c.policy_path);
      } catch (const PolicyError& e) {
        for (const auto& msg : e.problems()) errors.push_back("policy: " + msg);
      } catch (const std::exception& e) {
        errors.push_back(std::string("policy: ") + e.what());
      }
    }
  }

  for (auto& p : c.problems()) errors.push_back(std::move(p));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

GlobalConfig GlobalConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), fs::path(path).parent_path().string());
}

std::vector<std::string> GlobalConfig::problems() const {
  std::vector<std::string> out = anchors.problems();
  const auto& v = postprocess.variances;
  if (!(v.center > 0.0 && v.size > 0.0)) out.push_back("variances must be positive");
  if (!(postprocess.score_threshold >= 0.0 && postprocess.score_threshold <= 1.0)) {
    out.push_back("thresholds.score must lie in [0,1]");
  }
  if (!(postprocess.nms_iou > 0.0 && postprocess.nms_iou <= 1.0)) {
    out.push_back("thresholds.nms_iou must lie in (0,1]");
  }
  if (postprocess.top_k == 0) out.push_back("thresholds.top_k must be >= 1");
  if (!(match_iou > 0.0 && match_iou <= 1.0)) out.push_back("thresholds.match_iou must lie in (0,1]");
  if (!(neg_pos_ratio >= 0.0)) out.push_back("neg_pos_ratio must be >= 0");
  if (!weights_path.empty() && !stub_path.empty()) {
    out.push_back("detector: set either weights or stub, not both");
  }
  if (!weights_path.empty() && !fs::exists(weights_path)) {
    out.push_back("weights file does not exist: " + weights_path);
  }
  if (!stub_path.empty() && !fs::exists(stub_path)) {
    out.push_back("stub script does not exist: " + stub_path);
  }
  if (labels.empty()) out.push_back("labels must not be empty");
  for (auto& p : policy.problems()) {
    const std::string msg = "policy: " + p;
    bool seen = false;
    for (const auto& o : out) seen = seen || o == msg;
    if (!seen) out.push_back(msg);
  }
  if (!(monitor.fps > 0.0)) out.push_back("monitor.fps must be > 0");
  if (monitor.queue_depth == 0) out.push_back("monitor.queue_depth must be >= 1");
  if (!monitor.source.empty() && !fs::exists(monitor.source)) {
    out.push_back("monitor.source does not exist: " + monitor.source);
  }
  if (eval.steps == 0) out.push_back("eval.steps must be >= 1");
  if (!(eval.iou_threshold > 0.0 && eval.iou_threshold <= 1.0)) {
    out.push_back("eval.iou must lie in (0,1]");
  }
  if (!eval.dataset.empty() && !fs::is_directory(eval.dataset)) {
    out.push_back("eval.dataset is not a directory: " + eval.dataset);
  }
  return out;
}

std::optional<std::string> config_path_from_env(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("SCARECROW_CONFIG"); env && *env) return std::string(env);
  return std::nullopt;
}

}  // namespace scarecrow
