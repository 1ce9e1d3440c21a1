#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scarecrow/detector.hpp"
#include "scarecrow/monitor/alert.hpp"
#include "scarecrow/monitor/event_log.hpp"
#include "scarecrow/monitor/frame_source.hpp"
#include "scarecrow/monitor/policy.hpp"

namespace scarecrow {

struct PipelineConfig {
  double fps = 10.0;
  /// Paces ingest at `fps` and drops the oldest queued frame when detection
  /// falls behind. Offline mode reads as fast as possible and blocks instead.
  bool realtime = true;
  std::size_t queue_depth = 8;
  PolicyConfig policy = PolicyConfig::defaults();
};

struct PipelineStats {
  std::size_t frames_read = 0;
  std::size_t frames_processed = 0;
  std::size_t frames_dropped = 0;
  std::size_t frame_errors = 0;
  std::vector<std::uint64_t> processed_indices;
  std::size_t events_opened = 0;
  std::size_t events_closed = 0;
  std::size_t commands = 0;
  std::size_t alerts_delivered = 0;
  std::size_t alerts_spooled = 0;
  /// Detect-stage pickup to event-stage completion, per processed frame.
  std::vector<double> latencies_ms;
  double wall_s = 0.0;
  std::vector<std::string> warnings;
};

struct PipelineHooks {
  std::function<void(const std::string&)> on_warning;
  /// Set from outside (e.g. a signal handler) to stop ingest early.
  const std::atomic<bool>* stop = nullptr;
};

/// ingest -> [bounded queue] -> detect -> [queue] -> hysteresis/policy/schedule/alert/log.
/// `sink` may be null (no alerts). Open events are closed at end of stream.
PipelineStats run_pipeline(FrameSource& source, Detector& detector, EventLog& log, AlertSink* sink,
                           const PipelineConfig& cfg, const PipelineHooks& hooks = {});

double percentile(std::vector<double> values, double p);

}  // namespace scarecrow
