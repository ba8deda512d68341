#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "vmcast/config.hpp"
#include "vmcast/event_queue.hpp"
#include "vmcast/mobility.hpp"
#include "vmcast/protocol.hpp"
#include "vmcast/radio.hpp"
#include "vmcast/trace.hpp"
#include "vmcast/traffic.hpp"

namespace vmcast {

/// Owns the clock, the fleet and one protocol agent per node.
///
/// Trace policy: every radio transmission is an `s` record at the
/// transmitter, except the origin's first hop of a data packet, whose
/// emission is already recorded when the application hands it over. Data
/// deliveries at listeners are `r` records; protocol and radio drops are
/// `d`; joins and leaves are `sess`.
class Simulation final : public NodeServices {
 public:
  /// Highway scenario: mobility, one VBR source and the session plan are
  /// derived from the config. `plan` replaces the generated session plan.
  Simulation(const ScenarioConfig& cfg, TraceSink& trace, const SessionPlan* plan = nullptr);
  /// Scripted run over a fixed topology. No mobility, traffic or sessions
  /// are created; tests drive them explicitly.
  Simulation(const ScenarioConfig& cfg, const Topology& topology, TraceSink& trace);
  ~Simulation() override;

  void run() { run_until(duration_); }
  /// Processes every event with fire time <= t.
  void run_until(SimTime t);

  void schedule_join(NodeId node, SimTime at);
  void schedule_leave(NodeId node, SimTime at);
  /// Adds a VBR source emitting in [start, end).
  void add_source(NodeId node, SimTime start, SimTime end);
  /// Changes the scripted topology; takes effect for later transmissions.
  void set_topology(const Topology& topology);

  /// Called for every radio transmission (sender, packet, time).
  using PacketTap = std::function<void(NodeId, const Packet&, SimTime)>;
  void set_packet_tap(PacketTap tap) { tap_ = std::move(tap); }
  /// Receives "t node x y" lines after every mobility tick.
  void set_mobility_dump(std::ostream* out) { mobility_dump_ = out; }

  std::size_t node_count() const { return agents_.size(); }
  MulticastProtocol& agent(NodeId n) { return *agents_.at(n); }
  const SessionPlan& plan() const { return plan_; }
  std::optional<NodeId> source() const { return source_node_; }
  std::uint64_t events_processed() const { return processed_; }
  SimTime duration() const { return duration_; }

  // NodeServices
  SimTime now() const override { return queue_.now(); }
  void transmit(NodeId self, PacketPtr packet, SimTime delay, bool trace_send = true) override;
  EventHandle set_timer(NodeId self, SimTime delay, std::uint32_t timer, std::uint64_t arg = 0) override;
  void cancel_timer(EventHandle h) override;
  void deliver(NodeId self, const Packet& data) override;
  void drop(NodeId self, const Packet& packet, std::string_view reason) override;
  RngStream& protocol_rng() override { return protocol_rng_; }

 private:
  void create_agents(std::size_t n);
  void start_agents();
  void dispatch(const Event& ev);
  void radio_send(NodeId self, const PacketPtr& packet, bool trace_send);
  void emit_traffic(std::size_t source_index);
  void trace_packet(TraceOp op, NodeId node, const Packet& p, std::string_view note = "-");
  void trace_session(NodeId node, bool join);
  void check_budget();

  ScenarioConfig cfg_;
  TraceSink& trace_;
  SimTime duration_;
  EventQueue queue_;
  RngStream mobility_rng_;
  RngStream traffic_rng_;
  RngStream session_rng_;
  RngStream protocol_rng_;
  RngStream radio_rng_;
  std::optional<Mobility> mobility_;
  std::optional<PositionTopology> positions_;
  const Topology* topology_ = nullptr;
  std::optional<Radio> radio_;
  std::vector<std::unique_ptr<MulticastProtocol>> agents_;
  std::vector<VbrSource> sources_;
  std::optional<NodeId> source_node_;
  SessionPlan plan_;
  PacketTap tap_;
  std::ostream* mobility_dump_ = nullptr;
  bool started_ = false;
  std::uint64_t processed_ = 0;
  std::chrono::steady_clock::time_point wall_start_;
};

/// Node nearest to the strip's center at t=0 (lowest id on ties).
NodeId pick_source(std::span<const Position> positions, const HighwayGeometry& geo);

struct RunArtifacts {
  SessionPlan plan;
  std::optional<NodeId> source;
  std::uint64_t events = 0;
};

/// Validates the config, runs it to completion and streams the trace.
RunArtifacts run_scenario(const ScenarioConfig& cfg, TraceSink& trace, const SessionPlan* plan = nullptr,
                          std::ostream* mobility_dump = nullptr);

}  // namespace vmcast
