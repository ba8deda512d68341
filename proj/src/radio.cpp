#include "vmcast/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace vmcast {

bool PositionTopology::in_range(NodeId a, NodeId b, double range_m) const {
  return distance(positions_[a], positions_[b]) <= range_m;
}

void PositionTopology::neighbors(NodeId sender, double range_m, std::vector<Neighbor>& out) const {
  out.clear();
  const Position& p = positions_[sender];
  const double r2 = range_m * range_m;
  for (NodeId i = 0; i < positions_.size(); ++i) {
    if (i == sender) continue;
    const double dx = positions_[i].x - p.x;
    if (dx > range_m || dx < -range_m) continue;
    const double dy = positions_[i].y - p.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 <= r2) out.push_back({i, std::sqrt(d2)});
  }
}

GraphTopology::GraphTopology(std::size_t n, double link_distance_m)
    : n_(n), link_distance_m_(link_distance_m), adj_(n * n, 0) {}

void GraphTopology::set_link(NodeId a, NodeId b, bool up) {
  if (a >= n_ || b >= n_) throw std::out_of_range("GraphTopology::set_link");
  if (a == b) return;
  adj_[a * n_ + b] = up ? 1 : 0;
  adj_[b * n_ + a] = up ? 1 : 0;
}

bool GraphTopology::in_range(NodeId a, NodeId b, double range_m) const {
  if (a == b) return true;
  return link(a, b) && link_distance_m_ <= range_m;
}

void GraphTopology::neighbors(NodeId sender, double range_m, std::vector<Neighbor>& out) const {
  out.clear();
  if (link_distance_m_ > range_m) return;
  for (NodeId i = 0; i < n_; ++i)
    if (i != sender && link(sender, i)) out.push_back({i, link_distance_m_});
}

SimTime transmission_delay(std::uint32_t size_bytes, double bandwidth_bps) {
  const auto us = std::llround(static_cast<double>(size_bytes) * 8.0 / bandwidth_bps * 1e6);
  return SimTime::from_micros(us < 1 ? 1 : us);
}

SimTime propagation_delay(double distance_m) { return SimTime::from_micros(std::llround(distance_m / 3e8 * 1e6)); }

Radio::Radio(RadioConfig cfg, const Topology& topology, RngStream& rng)
    : cfg_(cfg), topology_(&topology), rng_(&rng) {
  if (!(cfg_.range_m > 0.0)) throw std::invalid_argument("radio range must be positive");
  if (!(cfg_.bandwidth_bps > 0.0)) throw std::invalid_argument("radio bandwidth must be positive");
}

std::vector<Delivery> Radio::broadcast(NodeId sender, const Packet& packet, SimTime at) {
  topology_->neighbors(sender, cfg_.range_m, scratch_);
  const SimTime tx = transmission_delay(packet.size_bytes, cfg_.bandwidth_bps);
  std::vector<Delivery> out;
  out.reserve(scratch_.size());
  if (cfg_.collisions && last_rx_.size() < topology_->node_count()) last_rx_.resize(topology_->node_count());
  for (const Neighbor& nb : scratch_) {
    Delivery d;
    d.receiver = nb.id;
    d.at = at + tx + propagation_delay(nb.distance_m);
    d.lost = rng_->bernoulli(cfg_.loss_probability);
    if (cfg_.collisions && !d.lost) {
      d.ticket = next_ticket_++;
      const Reception rx{d.at - tx, d.at, d.ticket};
      Reception& prev = last_rx_[nb.id];
      bool hit = false;
      if (prev.ticket != 0 && rx.start < prev.end && prev.start < rx.end) {
        hit = true;
        auto it = tickets_.find(prev.ticket);
        if (it != tickets_.end()) it->second = true;
      }
      tickets_.emplace(d.ticket, hit);
      if (rx.end > prev.end || prev.ticket == 0) prev = rx;
    }
    out.push_back(d);
  }
  return out;
}

bool Radio::collided(std::uint64_t ticket) {
  auto it = tickets_.find(ticket);
  if (it == tickets_.end()) return false;
  const bool hit = it->second;
  tickets_.erase(it);
  return hit;
}

}  // namespace vmcast
