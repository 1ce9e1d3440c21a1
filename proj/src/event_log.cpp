#include "scarecrow/monitor/event_log.hpp"

#include <stdexcept>

#include <json.hpp>

namespace scarecrow {

using ojson = nlohmann::ordered_json;

EventRecord EventRecord::from_event(const MonitorEvent& ev, std::string kind, std::int64_t ts_ms) {
  EventRecord r;
  r.ts_ms = ts_ms;
  r.kind = std::move(kind);
  r.event_id = ev.id;
  r.label = ev.label;
  r.tier = std::string(to_string(ev.tier));
  r.action = std::string(to_string(ev.action));
  r.peak_score = ev.peak_score;
  r.first_frame = ev.first_frame;
  r.last_frame = ev.last_frame;
  return r;
}

EventRecord EventRecord::from_command(const MonitorEvent& ev, const DeterrenceCommand& cmd) {
  EventRecord r;
  r.ts_ms = cmd.issued_ms;
  r.kind = "command";
  r.event_id = ev.id;
  r.label = ev.label;
  r.tier = std::string(to_string(ev.tier));
  r.action = std::string(to_string(ev.action));
  r.mode = cmd.mode;
  return r;
}

std::string EventRecord::to_json() const {
  ojson j;
  j["ts_ms"] = ts_ms;
  j["kind"] = kind;
  j["event_id"] = event_id;
  j["class"] = label;
  j["tier"] = tier;
  j["action"] = action;
  if (peak_score) j["peak_score"] = *peak_score;
  if (first_frame) j["first_frame"] = *first_frame;
  if (last_frame) j["last_frame"] = *last_frame;
  if (mode) j["mode"] = *mode;
  return j.dump();
}

EventRecord EventRecord::from_json(const std::string& line) {
  const ojson j = ojson::parse(line);
  EventRecord r;
  r.ts_ms = j.at("ts_ms").get<std::int64_t>();
  r.kind = j.at("kind").get<std::string>();
  r.event_id = j.at("event_id").get<std::uint64_t>();
  r.label = j.at("class").get<std::string>();
  r.tier = j.value("tier", "");
  r.action = j.value("action", "");
  if (j.contains("peak_score")) r.peak_score = j.at("peak_score").get<double>();
  if (j.contains("first_frame")) r.first_frame = j.at("first_frame").get<std::uint64_t>();
  if (j.contains("last_frame")) r.last_frame = j.at("last_frame").get<std::uint64_t>();
  if (j.contains("mode")) r.mode = j.at("mode").get<std::string>();
  return r;
}

EventLog::EventLog(const std::string& path) {
  if (path.empty()) return;
  file_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*file_) throw std::runtime_error("cannot open event log " + path);
  out_ = file_.get();
}

EventLog::EventLog(std::ostream& out) : out_(&out) {}

void EventLog::write(const EventRecord& rec) {
  ++written_;
  if (out_ == nullptr) return;
  *out_ << rec.to_json() << '\n';
  out_->flush();
}

void EventLog::flush() {
  if (out_ != nullptr) out_->flush();
}

}  // namespace scarecrow
