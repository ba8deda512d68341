#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "vmcast/mobility.hpp"
#include "vmcast/packet.hpp"
#include "vmcast/rng.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

struct RadioConfig {
  double range_m = 1000.0;
  double bandwidth_bps = 11e6;
  double loss_probability = 0.0;
  /// Drop receptions that overlap in time at a receiver. Off for acceptance runs.
  bool collisions = false;
};

struct Neighbor {
  NodeId id = kNoNode;
  double distance_m = 0.0;
};

/// Who can hear whom at the current instant.
class Topology {
 public:
  virtual ~Topology() = default;
  virtual std::size_t node_count() const = 0;
  virtual bool in_range(NodeId a, NodeId b, double range_m) const = 0;
  /// Nodes other than `sender` that hear it, in ascending id order.
  virtual void neighbors(NodeId sender, double range_m, std::vector<Neighbor>& out) const = 0;
};

/// Unit-disk connectivity over a position snapshot (inclusive at the range).
class PositionTopology final : public Topology {
 public:
  explicit PositionTopology(std::span<const Position> positions) : positions_(positions) {}
  void rebind(std::span<const Position> positions) { positions_ = positions; }

  std::size_t node_count() const override { return positions_.size(); }
  bool in_range(NodeId a, NodeId b, double range_m) const override;
  void neighbors(NodeId sender, double range_m, std::vector<Neighbor>& out) const override;

 private:
  std::span<const Position> positions_;
};

/// Explicit undirected link set; used for scripted protocol tests.
class GraphTopology final : public Topology {
 public:
  explicit GraphTopology(std::size_t n, double link_distance_m = 100.0);

  void set_link(NodeId a, NodeId b, bool up);
  bool link(NodeId a, NodeId b) const { return adj_[a * n_ + b] != 0; }

  std::size_t node_count() const override { return n_; }
  bool in_range(NodeId a, NodeId b, double range_m) const override;
  void neighbors(NodeId sender, double range_m, std::vector<Neighbor>& out) const override;

 private:
  std::size_t n_;
  double link_distance_m_;
  std::vector<std::uint8_t> adj_;
};

SimTime transmission_delay(std::uint32_t size_bytes, double bandwidth_bps);
SimTime propagation_delay(double distance_m);

struct Delivery {
  NodeId receiver = kNoNode;
  SimTime at;
  bool lost = false;          // dropped by loss_probability
  std::uint64_t ticket = 0;   // collision bookkeeping, 0 when collisions are off
};

/// Broadcast channel. Computes which neighbors receive a transmission and when.
class Radio {
 public:
  Radio(RadioConfig cfg, const Topology& topology, RngStream& rng);

  const RadioConfig& config() const { return cfg_; }
  bool in_range(NodeId a, NodeId b) const { return topology_->in_range(a, b, cfg_.range_m); }
  void set_topology(const Topology& topology) { topology_ = &topology; }

  /// Deliveries for every in-range node except the sender. `at` is the
  /// transmission start; positions are evaluated there.
  std::vector<Delivery> broadcast(NodeId sender, const Packet& packet, SimTime at);

  /// Collision mode only: true if the reception overlapped another. Consumes the ticket.
  bool collided(std::uint64_t ticket);

 private:
  struct Reception {
    SimTime start;
    SimTime end;
    std::uint64_t ticket = 0;
  };

  RadioConfig cfg_;
  const Topology* topology_;
  RngStream* rng_;
  std::vector<Neighbor> scratch_;
  std::vector<Reception> last_rx_;
  std::unordered_map<std::uint64_t, bool> tickets_;
  std::uint64_t next_ticket_ = 1;
};

}  // namespace vmcast
