#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scarecrow/monitor/hysteresis.hpp"

namespace scarecrow {

struct DeterrenceCommand {
  std::string mode;
  std::string target;
  std::uint64_t event_id = 0;
  std::int64_t issued_ms = 0;
  double duration_s = 0.0;

  bool operator==(const DeterrenceCommand&) const = default;
};

/// Per-class cooldown plus round-robin deterrent rotation, so a class does
/// not see the same stimulus on consecutive visits.
class DeterrenceScheduler {
 public:
  DeterrenceScheduler(std::vector<std::string> modes, double cooldown_s);

  /// A command for deter_high/deter_low events outside their class cooldown.
  std::optional<DeterrenceCommand> schedule(const MonitorEvent& event, std::int64_t now_ms);

  static constexpr double kHighDuration_s = 10.0;
  static constexpr double kLowDuration_s = 3.0;

 private:
  struct ClassState {
    std::size_t next_mode = 0;
    std::optional<std::int64_t> last_issued_ms;
  };

  std::vector<std::string> modes_;
  std::int64_t cooldown_ms_;
  std::map<std::string, ClassState> classes_;
};

}  // namespace scarecrow
