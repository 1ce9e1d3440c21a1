#include "scarecrow/monitor/hysteresis.hpp"

#include <algorithm>
#include <stdexcept>

namespace scarecrow {

HysteresisTracker::HysteresisTracker(HysteresisParams params, Classifier classify)
    : params_(params), classify_(std::move(classify)) {
  if (params_.k < 1 || params_.k > params_.m || params_.m_clear < 1) {
    throw std::invalid_argument("hysteresis: require 1 <= k <= m and m_clear >= 1");
  }
}

HysteresisUpdate HysteresisTracker::update(std::uint64_t frame_index,
                                           const std::vector<ClassHit>& hits) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw std::invalid_argument("hysteresis: frame indices must increase");
  }
  last_frame_ = frame_index;

  std::map<std::string, double> present;
  for (const ClassHit& h : hits) {
    auto [it, inserted] = present.emplace(h.label, h.score);
    if (!inserted) it->second = std::max(it->second, h.score);
  }
  for (const auto& [label, score] : present) classes_[label];

  HysteresisUpdate out;
  const auto m = static_cast<std::uint64_t>(params_.m);
  for (auto& [label, st] : classes_) {
    auto hit = present.find(label);
    if (hit != present.end()) st.window.emplace_back(frame_index, hit->second);
    while (!st.window.empty() && st.window.front().first + m <= frame_index) st.window.pop_front();

    if (st.open) {
      if (hit != present.end()) {
        st.misses = 0;
        st.open->last_frame = frame_index;
        st.open->peak_score = std::max(st.open->peak_score, hit->second);
      } else if (++st.misses >= params_.m_clear) {
        st.open->status = MonitorEvent::Status::closed;
        out.closed.push_back(*st.open);
        st.open.reset();
        st.window.clear();
        st.misses = 0;
      }
    } else if (hit != present.end() && static_cast<int>(st.window.size()) >= params_.k) {
      MonitorEvent ev;
      ev.id = next_id_++;
      ev.label = label;
      if (classify_) {
        const Disposition d = classify_(label);
        ev.tier = d.tier;
        ev.action = d.action;
      }
      ev.first_frame = st.window.front().first;
      ev.last_frame = frame_index;
      for (const auto& [f, s] : st.window) ev.peak_score = std::max(ev.peak_score, s);
      st.open = ev;
      st.misses = 0;
      out.opened.push_back(ev);
    }
  }
  return out;
}

std::vector<MonitorEvent> HysteresisTracker::finish() {
  std::vector<MonitorEvent> closed;
  for (auto& [label, st] : classes_) {
    if (!st.open) continue;
    st.open->status = MonitorEvent::Status::closed;
    closed.push_back(*st.open);
    st.open.reset();
    st.window.clear();
    st.misses = 0;
  }
  return closed;
}

std::vector<MonitorEvent> HysteresisTracker::open_events() const {
  std::vector<MonitorEvent> out;
  for (const auto& [label, st] : classes_) {
    if (st.open) out.push_back(*st.open);
  }
  return out;
}

}  // namespace scarecrow
