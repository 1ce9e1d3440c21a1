#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "scarecrow/monitor/hysteresis.hpp"
#include "scarecrow/monitor/scheduler.hpp"

namespace scarecrow {

/// One JSON Lines record. Absent optionals are omitted from the output.
struct EventRecord {
  std::int64_t ts_ms = 0;
  std::string kind;  // opened | closed | command | alert
  std::uint64_t event_id = 0;
  std::string label;
  std::string tier;
  std::string action;
  std::optional<double> peak_score;
  std::optional<std::uint64_t> first_frame;
  std::optional<std::uint64_t> last_frame;
  std::optional<std::string> mode;

  static EventRecord from_event(const MonitorEvent& ev, std::string kind, std::int64_t ts_ms);
  static EventRecord from_command(const MonitorEvent& ev, const DeterrenceCommand& cmd);

  /// Compact single-line JSON with keys in schema order.
  std::string to_json() const;
  static EventRecord from_json(const std::string& line);

  bool operator==(const EventRecord&) const = default;
};

/// Single-writer JSONL sink; every record is flushed as it is written.
class EventLog {
 public:
  /// Appends to `path`; an empty path discards records.
  explicit EventLog(const std::string& path);
  explicit EventLog(std::ostream& out);

  void write(const EventRecord& rec);
  void flush();
  std::size_t records_written() const { return written_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
  std::size_t written_ = 0;
};

}  // namespace scarecrow
