#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "vmcast/protocol.hpp"

namespace vmcast {

struct PumaConfig {
  SimTime announce_period = SimTime::from_seconds(3.0);
  /// Connectivity entries older than this many periods are discarded.
  std::uint32_t expiry_periods = 3;
  /// Core silence (in periods) after which a receiver takes over, and after
  /// which a lower-id core is accepted.
  std::uint32_t core_timeout_periods = 2;
  SimTime max_jitter = SimTime::from_millis(10);
  /// Re-announce within a round when the node's mesh flag flips.
  bool announce_on_mesh_change = true;
  /// Treat the traffic source as a group member.
  bool source_is_member = false;
};

/// Mesh-based multicast agent driven by a single periodic announcement.
///
/// The core originates a numbered announcement each period; every node
/// relays the first copy of each number once, advertising its distance to
/// the core, its parent (the best neighbor entry) and whether it belongs to
/// the mesh. A node is in the mesh when it is a receiver or some neighbor in
/// the mesh names it as parent. Mesh members flood data; others only pass
/// packets from their children toward the mesh.
class Puma final : public MulticastProtocol {
 public:
  enum Timer : std::uint32_t { kAnnounceTimer = 1, kRelayTimer, kJoinWaitTimer, kCheckTimer };

  struct Entry {
    std::uint32_t seq = 0;
    std::uint32_t distance = 0;
    NodeId parent = kNoNode;
    bool mesh = false;
    SimTime heard;
  };

  Puma(NodeId self, NodeServices& net, PumaConfig cfg);

  Proto proto() const override { return Proto::Puma; }
  void start() override;
  void join_group() override;
  void leave_group() override;
  bool is_member() const override { return receiver_; }
  void set_source(bool source) override { source_ = source; }
  void send_data(const PacketPtr& data) override;
  void receive(const PacketPtr& packet, NodeId from) override;
  void on_timer(std::uint32_t timer, std::uint64_t arg) override;

  bool is_core() const { return is_core_; }
  NodeId core() const { return core_; }
  bool in_mesh() const { return mesh_member(); }
  std::uint32_t last_seq() const { return last_seq_; }
  /// Best fresh neighbor entry, if any.
  std::optional<std::pair<NodeId, Entry>> parent() const;
  const std::map<NodeId, Entry>& connectivity() const { return conn_; }

 private:
  bool wants_group() const { return receiver_ || (source_ && cfg_.source_is_member); }
  bool fresh(const Entry& e) const { return now() - e.heard <= expiry(); }
  SimTime expiry() const { return cfg_.announce_period * cfg_.expiry_periods; }
  SimTime core_timeout() const { return cfg_.announce_period * cfg_.core_timeout_periods; }
  bool core_alive() const;
  bool mesh_member() const;

  void become_core();
  void switch_core(NodeId core);
  void originate();
  void send_announcement(SimTime delay);
  void note_mesh_change();
  void check();
  void on_announcement(const Packet& p, NodeId from);
  void on_data(const PacketPtr& p, NodeId from);
  void wait_for_core();

  PumaConfig cfg_;
  bool receiver_ = false;
  bool source_ = false;
  bool is_core_ = false;
  NodeId core_ = kNoNode;
  std::uint32_t own_seq_ = 0;
  std::uint32_t last_seq_ = 0;
  SimTime core_heard_;
  std::uint32_t relayed_seq_ = 0;
  std::uint32_t extra_seq_ = 0;
  bool announced_mesh_ = false;
  bool relay_scheduled_ = false;
  std::map<NodeId, Entry> conn_;
  EventHandle announce_timer_;
  EventHandle join_timer_;
  DuplicateCache data_seen_;
};

}  // namespace vmcast
