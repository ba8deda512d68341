#include "vmcast/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "vmcast/error.hpp"

namespace vmcast {

VbrSource::VbrSource(NodeId node, GroupId group, VbrConfig cfg, SimTime start, SimTime end)
    : node_(node), group_(group), cfg_(cfg), start_(start), end_(end) {
  if (cfg_.min_packet_bytes == 0 || cfg_.max_packet_bytes < cfg_.min_packet_bytes)
    throw std::invalid_argument("VBR packet size bounds are invalid");
  if (!(cfg_.mean_bitrate_bps > 0.0)) throw std::invalid_argument("VBR mean bitrate must be positive");
}

VbrSource::Emission VbrSource::emit(SimTime now, RngStream& rng) {
  Emission e;
  Packet& p = e.packet;
  p.proto = Proto::Data;
  p.kind = MsgKind::Video;
  p.id = {node_, next_seq_++};
  p.size_bytes = static_cast<std::uint32_t>(rng.between(cfg_.min_packet_bytes, cfg_.max_packet_bytes));
  p.group = group_;
  p.created = now;
  const double gap = p.size_bytes * 8.0 / cfg_.mean_bitrate_bps * rng.uniform(1.0 - cfg_.gap_jitter, 1.0 + cfg_.gap_jitter);
  const SimTime step = SimTime::from_seconds(gap);
  e.next = now + (step > SimTime{} ? step : SimTime::from_micros(1));
  return e;
}

std::size_t SessionPlan::total_joins() const {
  std::size_t n = 0;
  for (const auto& [node, list] : sessions) n += list.size();
  return n;
}

bool SessionPlan::is_listening(NodeId node, SimTime t) const {
  auto it = sessions.find(node);
  if (it == sessions.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [t](const Session& s) { return s.join <= t && t < s.leave; });
}

std::size_t SessionPlan::listeners_at(SimTime t) const {
  std::size_t n = 0;
  for (const auto& [node, list] : sessions)
    for (const Session& s : list)
      if (s.join <= t && t < s.leave) {
        ++n;
        break;
      }
  return n;
}

namespace {

Session session_in_window(SimTime start, SimTime len, RngStream& rng) {
  const std::int64_t quarter = len.micros() / 4;
  const std::int64_t join_off = quarter > 0 ? rng.between(0, quarter - 1) : 0;
  const std::int64_t leave_off = quarter > 0 ? rng.between(0, quarter - 1) : 0;
  Session s;
  s.join = start + SimTime::from_micros(join_off);
  s.leave = start + len - SimTime::from_micros(1 + leave_off);
  if (s.leave <= s.join) s.leave = s.join + SimTime::from_micros(1);
  return s;
}

}  // namespace

SessionPlan build_session_plan(std::size_t listeners, std::size_t sessions, SimTime duration,
                               std::span<const NodeId> candidates, RngStream& rng) {
  if (listeners < 1) throw Error(ErrorCode::InvalidScenario, "at least one listener is required");
  if (sessions < 1) throw Error(ErrorCode::InvalidScenario, "at least one session per node is required");
  if (listeners > candidates.size())
    throw Error(ErrorCode::InvalidScenario, "listeners exceed nodes (" + std::to_string(listeners) + " > " +
                                                std::to_string(candidates.size()) + ")");
  if (duration <= SimTime{}) throw Error(ErrorCode::InvalidScenario, "duration must be positive");

  std::vector<NodeId> shuffled(candidates.begin(), candidates.end());
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);

  SessionPlan plan;
  plan.pool.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(listeners));
  const auto window = SimTime::from_micros(duration.micros() / static_cast<std::int64_t>(sessions));
  const auto half = SimTime::from_micros(window.micros() / 2);
  for (std::size_t i = 0; i < plan.pool.size(); ++i) {
    auto& list = plan.sessions[plan.pool[i]];
    if (i % 2 == 0) {
      for (std::size_t k = 0; k < sessions; ++k)
        list.push_back(session_in_window(window * static_cast<std::int64_t>(k), window, rng));
    } else {
      list.push_back(session_in_window(SimTime{}, half, rng));
      for (std::size_t k = 0; k + 1 < sessions; ++k)
        list.push_back(session_in_window(half + window * static_cast<std::int64_t>(k), window, rng));
    }
  }
  return plan;
}

void write_session_plan(std::ostream& out, const SessionPlan& plan) {
  for (NodeId n : plan.pool) {
    auto it = plan.sessions.find(n);
    if (it == plan.sessions.end()) continue;
    for (const Session& s : it->second) out << n << ' ' << format_seconds(s.join) << ' ' << format_seconds(s.leave) << '\n';
  }
}

SessionPlan read_session_plan(std::istream& in) {
  SessionPlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long node = -1;
    double join = 0.0;
    double leave = 0.0;
    if (!(ss >> node >> join >> leave) || node < 0 || leave <= join)
      throw Error(ErrorCode::InvalidPlan, "bad session plan line " + std::to_string(line_no) + ": " + line);
    const auto id = static_cast<NodeId>(node);
    auto& list = plan.sessions[id];
    if (list.empty()) plan.pool.push_back(id);
    const Session s{SimTime::from_seconds(join), SimTime::from_seconds(leave)};
    if (!list.empty() && s.join < list.back().leave)
      throw Error(ErrorCode::InvalidPlan, "overlapping sessions for node " + std::to_string(id));
    list.push_back(s);
  }
  return plan;
}

}  // namespace vmcast
