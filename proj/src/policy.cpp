#include "scarecrow/monitor/policy.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scarecrow {

using nlohmann::json;

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::predator: return "predator";
    case Tier::wild_herbivore: return "wild_herbivore";
    case Tier::domestic: return "domestic";
    case Tier::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::deter_high: return "deter_high";
    case Action::deter_low: return "deter_low";
    case Action::log_only: return "log_only";
    case Action::ignore: return "ignore";
  }
  return "log_only";
}

std::optional<Tier> parse_tier(std::string_view s) {
  for (Tier t : {Tier::predator, Tier::wild_herbivore, Tier::domestic, Tier::unknown}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
  for (Action a : {Action::deter_high, Action::deter_low, Action::log_only, Action::ignore}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace

PolicyError::PolicyError(std::vector<std::string> problems)
    : std::runtime_error("invalid policy: " + join(problems)), problems_(std::move(problems)) {}

PolicyConfig PolicyConfig::defaults() {
  PolicyConfig p;
  p.taxonomy = {{"cheetah", Tier::predator}, {"lion", Tier::predator}, {"cat", Tier::domestic}};
  p.tier_actions = {{Tier::predator, Action::deter_high},
                    {Tier::wild_herbivore, Action::deter_low},
                    {Tier::domestic, Action::ignore},
                    {Tier::unknown, Action::log_only}};
  p.deterrent_modes = {"siren", "strobe", "ultrasonic"};
  return p;
}

std::vector<std::string> PolicyConfig::problems() const {
  std::vector<std::string> out;
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    out.push_back("score_threshold must lie in [0,1]");
  }
  if (hysteresis.k < 1) out.push_back("hysteresis.k must be >= 1");
  if (hysteresis.k > hysteresis.m) out.push_back("hysteresis requires k <= m");
  if (hysteresis.m_clear < 1) out.push_back("hysteresis.m_clear must be >= 1");
  if (!(cooldown_s >= 0.0)) out.push_back("cooldown_s must be >= 0");
  if (deterrent_modes.empty()) out.push_back("deterrent_modes must list at least one mode");
  return out;
}

PolicyConfig PolicyConfig::from_json(std::string_view text) {
  const json doc = json::parse(text);
  PolicyConfig p = defaults();
  std::vector<std::string> errors;

  auto number = [&](const json& j, const char* key, auto& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) {
      errors.push_back(std::string(key) + " must be a number");
      return;
    }
    out = j.at(key).get<std::remove_reference_t<decltype(out)>>();
  };

  if (doc.contains("taxonomy")) {
    p.taxonomy.clear();
    for (const auto& [label, tier] : doc.at("taxonomy").items()) {
      const auto t = tier.is_string() ? parse_tier(tier.get<std::string>()) : std::nullopt;
      if (!t) {
        errors.push_back("taxonomy entry '" + label + "' names an unknown tier");
        continue;
      }
      p.taxonomy[label] = *t;
    }
  }
  if (doc.contains("tier_actions")) {
    for (const auto& [tier, action] : doc.at("tier_actions").items()) {
      const auto t = parse_tier(tier);
      const auto a = action.is_string() ? parse_action(action.get<std::string>()) : std::nullopt;
      if (!t) errors.push_back("tier_actions key '" + tier + "' is not a tier");
      if (!a) errors.push_back("tier_actions['" + tier + "'] is not an action");
      if (t && a) p.tier_actions[*t] = *a;
    }
  }
  number(doc, "score_threshold", p.score_threshold);
  number(doc, "cooldown_s", p.cooldown_s);
  if (doc.contains("hysteresis")) {
    const json& h = doc.at("hysteresis");
    number(h, "k", p.hysteresis.k);
    number(h, "m", p.hysteresis.m);
    number(h, "m_clear", p.hysteresis.m_clear);
  }
  if (doc.contains("deterrent_modes")) {
    p.deterrent_modes.clear();
    for (const auto& m : doc.at("deterrent_modes")) {
      if (m.is_string()) {
        p.deterrent_modes.push_back(m.get<std::string>());
      } else {
        errors.push_back("deterrent_modes entries must be strings");
      }
    }
  }
  for (auto& e : p.problems()) errors.push_back(std::move(e));
  if (!errors.empty()) throw PolicyError(std::move(errors));
  return p;
}

PolicyConfig PolicyConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Tier PolicyConfig::tier_of(const std::string& label) const {
  auto it = taxonomy.find(label);
  return it == taxonomy.end() ? Tier::unknown : it->second;
}

Action PolicyConfig::action_for(Tier tier) const {
  auto it = tier_actions.find(tier);
  if (it != tier_actions.end()) return it->second;
  return defaults().tier_actions.at(tier);
}

Disposition decide_action(const PolicyConfig& policy, const std::string& label) {
  const Tier t = policy.tier_of(label);
  return {t, policy.action_for(t)};
}

}  // namespace scarecrow
