#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "vmcast/packet.hpp"
#include "vmcast/rng.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

struct VbrConfig {
  std::uint32_t min_packet_bytes = 256;
  std::uint32_t max_packet_bytes = 768;
  double mean_bitrate_bps = 64000.0;
  /// Inter-emission gap is scaled by a factor uniform in [1-j, 1+j].
  double gap_jitter = 0.2;
};

/// Variable-bit-rate datagram source: uniform packet sizes, gaps proportional
/// to packet size at the mean bitrate, jittered.
class VbrSource {
 public:
  struct Emission {
    Packet packet;
    SimTime next;
  };

  VbrSource(NodeId node, GroupId group, VbrConfig cfg, SimTime start, SimTime end);

  NodeId node() const { return node_; }
  SimTime start() const { return start_; }
  SimTime end() const { return end_; }
  bool active_at(SimTime t) const { return t >= start_ && t < end_; }
  std::uint64_t emitted() const { return next_seq_; }

  /// Packet created at `now`; `next` is the following emission time.
  Emission emit(SimTime now, RngStream& rng);

 private:
  NodeId node_;
  GroupId group_;
  VbrConfig cfg_;
  SimTime start_;
  SimTime end_;
  std::uint64_t next_seq_ = 0;
};

struct Session {
  SimTime join;
  SimTime leave;
  friend bool operator==(const Session&, const Session&) = default;
};

/// Listener pool and each pooled node's ordered, disjoint sessions.
struct SessionPlan {
  std::vector<NodeId> pool;
  std::map<NodeId, std::vector<Session>> sessions;

  std::size_t total_joins() const;
  std::size_t listeners_at(SimTime t) const;
  bool is_listening(NodeId node, SimTime t) const;
  friend bool operator==(const SessionPlan&, const SessionPlan&) = default;
};

/// Builds the churn plan for L listeners with S sessions each over [0, duration].
///
/// [0, duration] is cut into S windows of length w. Within a window a node
/// joins uniformly in the first quarter and leaves uniformly in the last
/// quarter. Pool nodes alternate between two phases: phase A uses windows
/// starting at 0, phase B is shifted by w/2 and places its remaining session
/// in the leading half-window. Whenever one phase is between joins and leaves
/// the other half of the pool is fully listening, which keeps the listener
/// count in [L/2, L] away from the run's edges.
///
/// `candidates` lists eligible nodes in preference order; the pool is a
/// random subset of size L. Throws Error(InvalidScenario) if L exceeds it.
SessionPlan build_session_plan(std::size_t listeners, std::size_t sessions, SimTime duration,
                               std::span<const NodeId> candidates, RngStream& rng);

/// "node join_t leave_t" per line, times in seconds with six decimals.
void write_session_plan(std::ostream& out, const SessionPlan& plan);
SessionPlan read_session_plan(std::istream& in);

}  // namespace vmcast
