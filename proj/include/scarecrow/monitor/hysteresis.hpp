#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scarecrow/monitor/policy.hpp"

namespace scarecrow {

struct MonitorEvent {
  enum class Status { open, closed };

  std::uint64_t id = 0;
  std::string label;
  Tier tier = Tier::unknown;
  Action action = Action::log_only;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;
  double peak_score = 0.0;
  Status status = Status::open;

  bool operator==(const MonitorEvent&) const = default;
};

/// A class seen on one frame with its best score.
struct ClassHit {
  std::string label;
  double score = 0.0;
};

struct HysteresisUpdate {
  std::vector<MonitorEvent> opened;
  std::vector<MonitorEvent> closed;
};

/// K-of-M debouncing of per-frame class presence into events, at most one
/// open event per class. Events are emitted in label order.
class HysteresisTracker {
 public:
  using Classifier = std::function<Disposition(const std::string&)>;

  explicit HysteresisTracker(HysteresisParams params, Classifier classify = {});

  /// Frame indices must increase between calls.
  HysteresisUpdate update(std::uint64_t frame_index, const std::vector<ClassHit>& hits);
  /// Closes every open event (end of stream).
  std::vector<MonitorEvent> finish();

  std::vector<MonitorEvent> open_events() const;

 private:
  struct ClassState {
    std::deque<std::pair<std::uint64_t, double>> window;  // (frame, score)
    int misses = 0;
    std::optional<MonitorEvent> open;
  };

  HysteresisParams params_;
  Classifier classify_;
  std::map<std::string, ClassState> classes_;
  std::uint64_t next_id_ = 1;
  std::optional<std::uint64_t> last_frame_;
};

}  // namespace scarecrow
