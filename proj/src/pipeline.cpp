#include "scarecrow/monitor/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "scarecrow/monitor/bounded_queue.hpp"
#include "scarecrow/monitor/hysteresis.hpp"
#include "scarecrow/monitor/scheduler.hpp"

namespace scarecrow {

namespace {

using Clock = std::chrono::steady_clock;

struct Detected {
  std::uint64_t index = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<ClassHit> hits;
  Clock::time_point picked_up;
};

class WarningCollector {
 public:
  explicit WarningCollector(std::function<void(const std::string&)> fn) : fn_(std::move(fn)) {}

  void operator()(const std::string& msg) {
    std::lock_guard lock(mu_);
    warnings_.push_back(msg);
    if (fn_) fn_(msg);
  }

  std::vector<std::string> take() {
    std::lock_guard lock(mu_);
    return std::move(warnings_);
  }

 private:
  std::function<void(const std::string&)> fn_;
  std::mutex mu_;
  std::vector<std::string> warnings_;
};

/// Best score per label above the threshold, excluding classes the policy ignores.
std::vector<ClassHit> frame_hits(const std::vector<Detection>& dets,
                                 const std::vector<std::string>& labels,
                                 const PolicyConfig& policy) {
  std::map<std::string, double> best;
  for (const Detection& d : dets) {
    if (d.score < policy.score_threshold) continue;
    if (d.class_id < 0 || static_cast<std::size_t>(d.class_id) >= labels.size()) continue;
    const std::string& label = labels[d.class_id];
    if (decide_action(policy, label).action == Action::ignore) continue;
    auto [it, inserted] = best.emplace(label, d.score);
    if (!inserted) it->second = std::max(it->second, static_cast<double>(d.score));
  }
  std::vector<ClassHit> hits;
  for (const auto& [label, score] : best) hits.push_back({label, score});
  return hits;
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  // nearest-rank
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * values.size()));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

PipelineStats run_pipeline(FrameSource& source, Detector& detector, EventLog& log, AlertSink* sink,
                           const PipelineConfig& cfg, const PipelineHooks& hooks) {
  if (auto problems = cfg.policy.problems(); !problems.empty()) throw PolicyError(problems);
  if (!(cfg.fps > 0.0)) throw std::invalid_argument("pipeline: fps must be positive");

  PipelineStats stats;
  WarningCollector warn(hooks.on_warning);
  const auto started = Clock::now();

  using FrameQueue = BoundedQueue<Frame>;
  FrameQueue frames(cfg.queue_depth,
                    cfg.realtime ? FrameQueue::Overflow::drop_oldest : FrameQueue::Overflow::block);
  BoundedQueue<Detected> detected(cfg.queue_depth, BoundedQueue<Detected>::Overflow::block);

  std::size_t frames_read = 0;
  std::thread ingest([&] {
    const auto interval = std::chrono::duration<double>(1.0 / cfg.fps);
    for (;;) {
      if (hooks.stop && hooks.stop->load()) break;
      std::optional<Frame> f;
      try {
        f = source.next();
      } catch (const std::exception& e) {
        warn(std::string("frame source failed: ") + e.what());
        break;
      }
      if (!f) break;
      if (cfg.realtime) {
        std::this_thread::sleep_until(
            started + std::chrono::duration_cast<Clock::duration>(interval * frames_read));
      }
      ++frames_read;
      frames.push(std::move(*f));
    }
    frames.close();
  });

  std::size_t frame_errors = 0;
  std::thread detect([&] {
    const std::vector<std::string>& labels = detector.labels();
    while (auto f = frames.pop()) {
      Detected d{f->index, f->timestamp_ms, {}, Clock::now()};
      try {
        d.hits = frame_hits(detector.detect(*f), labels, cfg.policy);
      } catch (const std::exception& e) {
        ++frame_errors;
        warn("frame " + std::to_string(f->index) + ": detection failed: " + e.what());
        continue;
      }
      detected.push(std::move(d));
    }
    detected.close();
  });

  // Event stage: sole owner of hysteresis, scheduler and log.
  std::unique_ptr<AlertDispatcher> dispatcher;
  if (sink) dispatcher = std::make_unique<AlertDispatcher>(*sink, std::ref(warn));

  const PolicyConfig& policy = cfg.policy;
  HysteresisTracker tracker(policy.hysteresis,
                            [&policy](const std::string& label) { return decide_action(policy, label); });
  DeterrenceScheduler scheduler(policy.deterrent_modes, policy.cooldown_s);

  auto on_opened = [&](const MonitorEvent& ev, std::int64_t ts) {
    ++stats.events_opened;
    log.write(EventRecord::from_event(ev, "opened", ts));
    std::optional<DeterrenceCommand> cmd = scheduler.schedule(ev, ts);
    if (cmd) {
      ++stats.commands;
      log.write(EventRecord::from_command(ev, *cmd));
    }
    if (ev.action != Action::deter_high && ev.action != Action::deter_low) return;
    EventRecord alert = EventRecord::from_event(ev, "alert", ts);
    if (cmd) alert.mode = cmd->mode;
    log.write(alert);
    if (dispatcher) dispatcher->submit(alert.to_json());
  };
  auto on_closed = [&](const MonitorEvent& ev, std::int64_t ts) {
    ++stats.events_closed;
    log.write(EventRecord::from_event(ev, "closed", ts));
  };

  std::int64_t last_ts = 0;
  while (auto d = detected.pop()) {
    last_ts = d->timestamp_ms;
    HysteresisUpdate up = tracker.update(d->index, d->hits);
    for (const MonitorEvent& ev : up.closed) on_closed(ev, d->timestamp_ms);
    for (const MonitorEvent& ev : up.opened) on_opened(ev, d->timestamp_ms);
    stats.processed_indices.push_back(d->index);
    stats.latencies_ms.push_back(
        std::chrono::duration<double, std::milli>(Clock::now() - d->picked_up).count());
  }
  ingest.join();
  detect.join();

  for (const MonitorEvent& ev : tracker.finish()) on_closed(ev, last_ts);
  log.flush();
  if (dispatcher) {
    dispatcher->drain();
    stats.alerts_delivered = dispatcher->delivered();
    stats.alerts_spooled = dispatcher->spooled();
    dispatcher.reset();
  }

  stats.frames_read = frames_read;
  stats.frames_processed = stats.processed_indices.size();
  stats.frames_dropped = frames.dropped();
  stats.frame_errors = frame_errors;
  stats.wall_s = std::chrono::duration<double>(Clock::now() - started).count();
  stats.warnings = warn.take();
  return stats;
}

}  // namespace scarecrow
