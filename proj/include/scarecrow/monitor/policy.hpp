#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scarecrow {

enum class Tier { predator, wild_herbivore, domestic, unknown };
enum class Action { deter_high, deter_low, log_only, ignore };

std::string_view to_string(Tier t);
std::string_view to_string(Action a);
std::optional<Tier> parse_tier(std::string_view s);
std::optional<Action> parse_action(std::string_view s);

/// Every violated rule, reported together.
class PolicyError : public std::runtime_error {
 public:
  explicit PolicyError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct HysteresisParams {
  int k = 3;        // hits required ...
  int m = 5;        // ... within this many frames
  int m_clear = 5;  // consecutive misses that close an event
};

struct PolicyConfig {
  std::map<std::string, Tier> taxonomy;
  std::map<Tier, Action> tier_actions;
  double score_threshold = 0.5;
  HysteresisParams hysteresis;
  double cooldown_s = 60.0;
  std::vector<std::string> deterrent_modes;

  /// Ships lion and cheetah as predators and cat as domestic.
  static PolicyConfig defaults();
  /// Missing keys keep their defaults. Throws PolicyError listing every
  /// violated rule, or nlohmann::json::parse_error for malformed JSON.
  static PolicyConfig from_json(std::string_view text);
  static PolicyConfig load(const std::string& path);

  /// Invariant violations; empty when valid.
  std::vector<std::string> problems() const;

  Tier tier_of(const std::string& label) const;
  Action action_for(Tier tier) const;
};

struct Disposition {
  Tier tier = Tier::unknown;
  Action action = Action::log_only;
};

Disposition decide_action(const PolicyConfig& policy, const std::string& label);

}  // namespace scarecrow
