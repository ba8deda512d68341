#include "vmcast/config.hpp"

#include <cmath>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "vmcast/error.hpp"

namespace vmcast {

using nlohmann::json;

std::string_view to_string(ProtocolKind p) { return p == ProtocolKind::Maodv ? "maodv" : "puma"; }

ProtocolKind parse_protocol(std::string_view s) {
  if (s == "maodv") return ProtocolKind::Maodv;
  if (s == "puma") return ProtocolKind::Puma;
  throw Error(ErrorCode::InvalidScenario, "unknown protocol '" + std::string(s) + "'");
}

namespace {

double secs(SimTime t) { return t.seconds(); }

json to_tree(const ScenarioConfig& c) {
  json j;
  j["protocol"] = std::string(to_string(c.protocol));
  j["nodes"] = c.nodes;
  j["duration"] = c.duration_s;
  j["area"] = {{"length", c.area_length_m}, {"width", c.area_width_m}};
  j["tx_range"] = c.radio.range_m;
  j["listeners"] = c.listeners;
  j["sessions"] = c.sessions;
  j["seed"] = c.seed;
  j["sources"] = c.sources;
  j["mobility_tick"] = c.mobility_tick_s;
  j["budget"] = c.budget_s;
  j["traffic"] = {{"min_packet_bytes", c.traffic.min_packet_bytes},
                  {"max_packet_bytes", c.traffic.max_packet_bytes},
                  {"mean_bitrate", c.traffic.mean_bitrate_bps},
                  {"gap_jitter", c.traffic.gap_jitter},
                  {"start", c.traffic_start_s},
                  {"end", c.traffic_end_s}};
  j["radio"] = {{"bandwidth", c.radio.bandwidth_bps},
                {"loss_probability", c.radio.loss_probability},
                {"collisions", c.radio.collisions}};
  j["maodv"] = {{"hello_interval", secs(c.maodv.hello_interval)},
                {"allowed_hello_loss", c.maodv.allowed_hello_loss},
                {"request_retries", c.maodv.request_retries},
                {"request_wait", secs(c.maodv.request_wait)},
                {"request_ttl", c.maodv.request_ttl},
                {"max_jitter", secs(c.maodv.max_jitter)}};
  j["puma"] = {{"announce_period", secs(c.puma.announce_period)},
               {"expiry_periods", c.puma.expiry_periods},
               {"core_timeout_periods", c.puma.core_timeout_periods},
               {"max_jitter", secs(c.puma.max_jitter)},
               {"announce_on_mesh_change", c.puma.announce_on_mesh_change},
               {"source_is_member", c.puma.source_is_member}};
  return j;
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidScenario, what); }

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) bad(path + key + ": expected a boolean");
      out = it->get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0))
        bad(path + key + ": expected a non-negative integer");
      out = it->get<T>();
    } else {
      if (!it->is_number()) bad(path + key + ": expected a number");
      out = it->get<T>();
    }
  } catch (const json::exception& e) {
    bad(path + key + ": " + e.what());
  }
}

void read_time(const json& obj, const char* key, SimTime& out, const std::string& path) {
  double s = out.seconds();
  read(obj, key, s, path);
  out = SimTime::from_seconds(s);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& path) {
  if (!obj.is_object()) bad((path.empty() ? std::string("config") : path) + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) bad("unknown key '" + path + k + "'");
  }
}

ScenarioConfig from_tree(const json& j) {
  ScenarioConfig c;
  reject_unknown(j,
                 {"protocol", "nodes", "duration", "area", "tx_range", "listeners", "sessions", "seed", "sources",
                  "mobility_tick", "budget", "traffic", "radio", "maodv", "puma"},
                 "");
  if (auto it = j.find("protocol"); it != j.end()) {
    if (!it->is_string()) bad("protocol: expected a string");
    c.protocol = parse_protocol(it->get<std::string>());
  }
  read(j, "nodes", c.nodes, "");
  read(j, "duration", c.duration_s, "");
  read(j, "tx_range", c.radio.range_m, "");
  read(j, "listeners", c.listeners, "");
  read(j, "sessions", c.sessions, "");
  read(j, "seed", c.seed, "");
  read(j, "sources", c.sources, "");
  read(j, "mobility_tick", c.mobility_tick_s, "");
  read(j, "budget", c.budget_s, "");
  if (auto it = j.find("area"); it != j.end()) {
    reject_unknown(*it, {"length", "width"}, "area.");
    read(*it, "length", c.area_length_m, "area.");
    read(*it, "width", c.area_width_m, "area.");
  }
  if (auto it = j.find("traffic"); it != j.end()) {
    reject_unknown(*it, {"min_packet_bytes", "max_packet_bytes", "mean_bitrate", "gap_jitter", "start", "end"},
                   "traffic.");
    read(*it, "min_packet_bytes", c.traffic.min_packet_bytes, "traffic.");
    read(*it, "max_packet_bytes", c.traffic.max_packet_bytes, "traffic.");
    read(*it, "mean_bitrate", c.traffic.mean_bitrate_bps, "traffic.");
    read(*it, "gap_jitter", c.traffic.gap_jitter, "traffic.");
    read(*it, "start", c.traffic_start_s, "traffic.");
    read(*it, "end", c.traffic_end_s, "traffic.");
  }
  if (auto it = j.find("radio"); it != j.end()) {
    reject_unknown(*it, {"bandwidth", "loss_probability", "collisions"}, "radio.");
    read(*it, "bandwidth", c.radio.bandwidth_bps, "radio.");
    read(*it, "loss_probability", c.radio.loss_probability, "radio.");
    read(*it, "collisions", c.radio.collisions, "radio.");
  }
  if (auto it = j.find("maodv"); it != j.end()) {
    reject_unknown(*it,
                   {"hello_interval", "allowed_hello_loss", "request_retries", "request_wait", "request_ttl",
                    "max_jitter"},
                   "maodv.");
    read_time(*it, "hello_interval", c.maodv.hello_interval, "maodv.");
    read(*it, "allowed_hello_loss", c.maodv.allowed_hello_loss, "maodv.");
    read(*it, "request_retries", c.maodv.request_retries, "maodv.");
    read_time(*it, "request_wait", c.maodv.request_wait, "maodv.");
    read(*it, "request_ttl", c.maodv.request_ttl, "maodv.");
    read_time(*it, "max_jitter", c.maodv.max_jitter, "maodv.");
  }
  if (auto it = j.find("puma"); it != j.end()) {
    reject_unknown(*it,
                   {"announce_period", "expiry_periods", "core_timeout_periods", "max_jitter",
                    "announce_on_mesh_change", "source_is_member"},
                   "puma.");
    read_time(*it, "announce_period", c.puma.announce_period, "puma.");
    read(*it, "expiry_periods", c.puma.expiry_periods, "puma.");
    read(*it, "core_timeout_periods", c.puma.core_timeout_periods, "puma.");
    read_time(*it, "max_jitter", c.puma.max_jitter, "puma.");
    read(*it, "announce_on_mesh_change", c.puma.announce_on_mesh_change, "puma.");
    read(*it, "source_is_member", c.puma.source_is_member, "puma.");
  }
  return c;
}

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

json* locate(json& root, std::string_view key) {
  json* node = &root;
  for (const auto& part : split_key(key)) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node->is_object() ? nullptr : node;
}

}  // namespace

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) { return to_tree(a) == to_tree(b); }

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> errs;
  auto need = [&](bool ok, std::string msg) {
    if (!ok) errs.push_back(std::move(msg));
  };
  need(c.nodes >= 1, "nodes must be at least 1");
  need(c.listeners <= c.nodes, "listeners exceed nodes (" + std::to_string(c.listeners) + " > " +
                                   std::to_string(c.nodes) + ")");
  need(c.sessions >= 1, "sessions must be at least 1");
  need(c.duration_s > 0 && std::isfinite(c.duration_s), "duration must be positive");
  need(c.area_length_m > 0 && c.area_width_m > 0, "area dimensions must be positive");
  need(c.radio.range_m > 0, "tx_range must be positive");
  need(c.sources <= 1, "at most one traffic source is supported");
  need(c.mobility_tick_s > 0, "mobility_tick must be positive");
  need(c.budget_s >= 0, "budget must be non-negative");
  need(c.traffic.min_packet_bytes >= 1, "traffic.min_packet_bytes must be at least 1");
  need(c.traffic.min_packet_bytes <= c.traffic.max_packet_bytes, "traffic packet size bounds are inverted");
  need(c.traffic.mean_bitrate_bps > 0, "traffic.mean_bitrate must be positive");
  need(c.traffic.gap_jitter >= 0 && c.traffic.gap_jitter < 1, "traffic.gap_jitter must be in [0, 1)");
  need(c.traffic_start_s >= 0, "traffic.start must be non-negative");
  need(c.traffic_end_s < 0 || c.traffic_end_s >= c.traffic_start_s, "traffic.end precedes traffic.start");
  need(c.traffic_end_s <= c.duration_s, "traffic.end exceeds duration");
  need(c.radio.bandwidth_bps > 0, "radio.bandwidth must be positive");
  need(c.radio.loss_probability >= 0 && c.radio.loss_probability <= 1, "radio.loss_probability must be in [0, 1]");
  need(c.maodv.hello_interval > SimTime{}, "maodv.hello_interval must be positive");
  need(c.maodv.allowed_hello_loss >= 1, "maodv.allowed_hello_loss must be at least 1");
  need(c.maodv.request_wait > SimTime{}, "maodv.request_wait must be positive");
  need(c.maodv.request_ttl >= 1, "maodv.request_ttl must be at least 1");
  need(c.maodv.request_retries <= 16, "maodv.request_retries must be at most 16");
  need(c.maodv.max_jitter >= SimTime{}, "maodv.max_jitter must be non-negative");
  need(c.puma.announce_period > SimTime{}, "puma.announce_period must be positive");
  need(c.puma.expiry_periods >= 1, "puma.expiry_periods must be at least 1");
  need(c.puma.core_timeout_periods >= 1, "puma.core_timeout_periods must be at least 1");
  need(c.puma.max_jitter >= SimTime{}, "puma.max_jitter must be non-negative");
  return errs;
}

void validate_or_throw(const ScenarioConfig& cfg) {
  auto errs = validate(cfg);
  if (errs.empty()) return;
  std::string msg = "invalid scenario: ";
  for (std::size_t i = 0; i < errs.size(); ++i) msg += (i ? "; " : "") + errs[i];
  throw Error(ErrorCode::InvalidScenario, msg);
}

std::string to_json(const ScenarioConfig& cfg) { return to_tree(cfg).dump(2) + "\n"; }

ScenarioConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  return from_tree(j);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const std::string& path, const ScenarioConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write config '" + path + "'");
  out << to_json(cfg);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

void set_config_value(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  json root = to_tree(cfg);
  json* slot = locate(root, key);
  if (!slot) bad("unknown key '" + std::string(key) + "'");
  json parsed;
  if (slot->is_string()) {
    parsed = std::string(value);
  } else {
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      bad("bad value for '" + std::string(key) + "': " + std::string(value));
    }
  }
  *slot = parsed;
  cfg = from_tree(root);
}

std::string get_config_value(const ScenarioConfig& cfg, std::string_view key) {
  json root = to_tree(cfg);
  json* slot = locate(root, key);
  if (!slot) bad("unknown key '" + std::string(key) + "'");
  return slot->is_string() ? slot->get<std::string>() : slot->dump();
}

std::string scenario_id(const ScenarioConfig& cfg) {
  return std::string(to_string(cfg.protocol)) + "-L" + std::to_string(cfg.listeners) + "-S" +
         std::to_string(cfg.sessions) + "-seed" + std::to_string(cfg.seed);
}

}  // namespace vmcast
