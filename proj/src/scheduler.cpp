#include "scarecrow/monitor/scheduler.hpp"

#include <cmath>
#include <stdexcept>

namespace scarecrow {

DeterrenceScheduler::DeterrenceScheduler(std::vector<std::string> modes, double cooldown_s)
    : modes_(std::move(modes)), cooldown_ms_(std::llround(cooldown_s * 1000.0)) {
  if (modes_.empty()) throw std::invalid_argument("scheduler: no deterrent modes");
  if (cooldown_s < 0.0) throw std::invalid_argument("scheduler: negative cooldown");
}

std::optional<DeterrenceCommand> DeterrenceScheduler::schedule(const MonitorEvent& event,
                                                               std::int64_t now_ms) {
  double duration = 0.0;
  if (event.action == Action::deter_high) {
    duration = kHighDuration_s;
  } else if (event.action == Action::deter_low) {
    duration = kLowDuration_s;
  } else {
    return std::nullopt;
  }

  ClassState& st = classes_[event.label];
  if (st.last_issued_ms && now_ms - *st.last_issued_ms < cooldown_ms_) return std::nullopt;

  DeterrenceCommand cmd{modes_[st.next_mode], event.label, event.id, now_ms, duration};
  st.next_mode = (st.next_mode + 1) % modes_.size();
  st.last_issued_ms = now_ms;
  return cmd;
}

}  // namespace scarecrow
