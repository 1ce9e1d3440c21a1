#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scarecrow/detector.hpp"
#include "scarecrow/geometry.hpp"
#include "scarecrow/monitor/policy.hpp"

namespace scarecrow {

/// Malformed JSON (with line/column) or a list of semantic violations.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, int line, int column);
  explicit ConfigError(std::vector<std::string> problems);

  const std::vector<std::string>& problems() const { return problems_; }
  int line() const { return line_; }      // 0 for semantic errors
  int column() const { return column_; }

 private:
  std::vector<std::string> problems_;
  int line_ = 0;
  int column_ = 0;
};

struct MonitorSettings {
  std::string source;
  double fps = 10.0;
  bool realtime = true;
  std::size_t queue_depth = 8;
  std::string sink = "-";
  std::string log_path;
  std::string spool_path = "alerts.spool.jsonl";
};

struct EvalSettings {
  std::string dataset;
  std::size_t steps = 10'000;
  double iou_threshold = 0.5;
};

struct GlobalConfig {
  AnchorConfig anchors;
  PostprocessOptions postprocess;  // variances, score threshold, NMS
  double match_iou = 0.5;
  double neg_pos_ratio = 3.0;
  std::string weights_path;
  std::string stub_path;
  std::uint64_t weights_seed = 42;  // used when neither weights nor stub is set
  std::vector<std::string> labels = default_labels();
  std::string policy_path;
  PolicyConfig policy = PolicyConfig::defaults();
  MonitorSettings monitor;
  EvalSettings eval;

  /// Absent keys keep their defaults; relative paths resolve against base_dir.
  static GlobalConfig from_json(std::string_view text, const std::string& base_dir = "");
  static GlobalConfig load(const std::string& path);

  std::vector<std::string> problems() const;
};

/// Explicit path, else $SCARECROW_CONFIG, else nothing.
std::optional<std::string> config_path_from_env(const std::string& explicit_path);

/// 1-based line and column of a byte offset.
std::pair<int, int> line_column(std::string_view text, std::size_t offset);

}  // namespace scarecrow
