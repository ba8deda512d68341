#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vmcast/maodv.hpp"
#include "vmcast/puma.hpp"
#include "vmcast/radio.hpp"
#include "vmcast/traffic.hpp"

namespace vmcast {

enum class ProtocolKind { Maodv, Puma };

std::string_view to_string(ProtocolKind p);
/// Accepts "maodv" or "puma". Throws Error(InvalidScenario).
ProtocolKind parse_protocol(std::string_view s);

/// Complete description of one run. Defaults reproduce the reference
/// highway scenario: 100 vehicles, 600 s, 10 km x 1 km, 1000 m range.
struct ScenarioConfig {
  ProtocolKind protocol = ProtocolKind::Puma;
  std::size_t nodes = 100;
  double duration_s = 600.0;
  double area_length_m = 10000.0;
  double area_width_m = 1000.0;
  std::size_t listeners = 10;
  std::size_t sessions = 5;
  std::uint64_t seed = 1;
  /// 0 or 1 video sources.
  std::size_t sources = 1;
  double mobility_tick_s = 0.5;
  /// Wall-clock limit per run in seconds; 0 disables the guard.
  double budget_s = 600.0;

  VbrConfig traffic;
  double traffic_start_s = 0.0;
  /// Negative means "until the end of the run".
  double traffic_end_s = -1.0;

  RadioConfig radio;
  MaodvConfig maodv;
  PumaConfig puma;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

/// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate(const ScenarioConfig& cfg);
/// Throws Error(InvalidScenario) listing all violations.
void validate_or_throw(const ScenarioConfig& cfg);

std::string to_json(const ScenarioConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
ScenarioConfig config_from_json(std::string_view text);
ScenarioConfig load_config(const std::string& path);
void save_config(const std::string& path, const ScenarioConfig& cfg);

/// Sets a value addressed by a dotted key such as "radio.loss_probability"
/// or "listeners". The value is parsed as JSON, or taken as a bare string.
void set_config_value(ScenarioConfig& cfg, std::string_view key, std::string_view value);
/// Current value of a dotted key rendered as JSON.
std::string get_config_value(const ScenarioConfig& cfg, std::string_view key);

/// "<protocol>-L<listeners>-S<sessions>-seed<seed>".
std::string scenario_id(const ScenarioConfig& cfg);

}  // namespace vmcast
