#pragma once

#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vmcast/event_queue.hpp"
#include "vmcast/packet.hpp"
#include "vmcast/rng.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

/// What a protocol instance may ask of the simulator. Implemented by Simulation.
class NodeServices {
 public:
  virtual ~NodeServices() = default;

  virtual SimTime now() const = 0;
  /// Starts a radio transmission from `self` after `delay`. `trace_send` is
  /// false only for the origin's first hop, whose emission is already traced.
  virtual void transmit(NodeId self, PacketPtr packet, SimTime delay, bool trace_send = true) = 0;
  virtual EventHandle set_timer(NodeId self, SimTime delay, std::uint32_t timer, std::uint64_t arg = 0) = 0;
  virtual void cancel_timer(EventHandle h) = 0;
  /// Application-level reception of a data packet at a listener.
  virtual void deliver(NodeId self, const Packet& data) = 0;
  virtual void drop(NodeId self, const Packet& packet, std::string_view reason) = 0;
  virtual RngStream& protocol_rng() = 0;
};

/// Per-origin record of data sequence numbers already handled.
class DuplicateCache {
 public:
  /// Records the id; returns false if it was already present.
  bool insert(const PacketId& id);
  bool contains(const PacketId& id) const;

 private:
  std::unordered_map<NodeId, std::vector<bool>> seen_;
};

/// One node's multicast routing agent for the single group.
class MulticastProtocol {
 public:
  MulticastProtocol(NodeId self, NodeServices& net) : self_(self), net_(net) {}
  virtual ~MulticastProtocol() = default;
  MulticastProtocol(const MulticastProtocol&) = delete;
  MulticastProtocol& operator=(const MulticastProtocol&) = delete;

  NodeId id() const { return self_; }
  virtual Proto proto() const = 0;

  /// Called once at t=0.
  virtual void start() {}
  virtual void join_group() = 0;
  virtual void leave_group() = 0;
  /// True while the node is a listener of the group.
  virtual bool is_member() const = 0;
  /// Marks this node as the group's traffic source.
  virtual void set_source(bool source) = 0;
  /// Injects a locally generated data packet.
  virtual void send_data(const PacketPtr& data) = 0;
  virtual void receive(const PacketPtr& packet, NodeId from) = 0;
  virtual void on_timer(std::uint32_t timer, std::uint64_t arg) = 0;

 protected:
  NodeServices& net() { return net_; }
  SimTime now() const { return net_.now(); }
  SimTime jitter(SimTime max);
  /// Fresh control packet with a unique id (self, counter).
  Packet make_control(Proto proto, MsgKind kind, std::uint32_t size) ;
  void send(Packet p, SimTime delay) { net_.transmit(self_, std::make_shared<const Packet>(std::move(p)), delay); }

  NodeId self_;

 private:
  NodeServices& net_;
  std::uint64_t control_seq_ = 0;
};

}  // namespace vmcast
