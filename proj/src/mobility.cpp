#include "vmcast/mobility.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "vmcast/error.hpp"

namespace vmcast {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

HighwayGeometry HighwayGeometry::for_area(double length_m, double width_m) {
  HighwayGeometry g;
  g.length_m = length_m;
  g.width_m = width_m;
  g.eastbound_lanes = {0.2 * width_m, 0.4 * width_m};
  g.westbound_lanes = {0.6 * width_m, 0.8 * width_m};
  return g;
}

std::vector<VehicleMotion> init_fleet(std::size_t n, RngStream& rng, const HighwayGeometry& geo) {
  if (n == 0) throw Error(ErrorCode::EmptyFleet, "fleet must contain at least one vehicle");
  std::vector<VehicleMotion> fleet;
  fleet.reserve(n);
  const double vmin = kmh_to_mps(geo.min_speed_kmh);
  const double vmax = kmh_to_mps(geo.max_speed_kmh);
  for (std::size_t i = 0; i < n; ++i) {
    VehicleMotion v;
    const int stream = static_cast<int>(i % 4);
    v.lane.direction = stream < 2 ? Direction::Eastbound : Direction::Westbound;
    v.lane.lane_index = stream % 2;
    v.lane.lane_y = stream < 2 ? geo.eastbound_lanes[v.lane.lane_index] : geo.westbound_lanes[v.lane.lane_index];
    v.position = {rng.uniform() * geo.length_m, v.lane.lane_y};
    v.speed_mps = rng.uniform(vmin, vmax);
    fleet.push_back(v);
  }
  return fleet;
}

VehicleMotion advance(const VehicleMotion& v, double dt_s, const HighwayGeometry& geo) {
  VehicleMotion out = v;
  const double sign = v.lane.direction == Direction::Eastbound ? 1.0 : -1.0;
  double x = std::fmod(v.position.x + sign * v.speed_mps * dt_s, geo.length_m);
  if (x < 0.0) x += geo.length_m;
  // fmod of a tiny negative can round up to length itself
  if (x >= geo.length_m) x = 0.0;
  out.position.x = x;
  return out;
}

Mobility::Mobility(std::vector<VehicleMotion> fleet, HighwayGeometry geo, SimTime tick)
    : fleet_(std::move(fleet)), geo_(geo), tick_(tick) {
  if (tick_ <= SimTime{}) throw std::invalid_argument("mobility tick must be positive");
  positions_.reserve(fleet_.size());
  for (const auto& v : fleet_) positions_.push_back(v.position);
}

void Mobility::tick_to(SimTime t) {
  const double dt = tick_.seconds();
  while (last_tick_ + tick_ <= t) {
    last_tick_ += tick_;
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
      fleet_[i] = advance(fleet_[i], dt, geo_);
      positions_[i] = fleet_[i].position;
    }
  }
}

std::vector<Position> Mobility::positions_at(SimTime t) {
  tick_to(t);
  return positions_;
}

void Mobility::dump(std::ostream& out) const {
  const std::string t = format_seconds(last_tick_);
  char buf[96];
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    std::snprintf(buf, sizeof buf, " %zu %.3f %.3f\n", i, positions_[i].x, positions_[i].y);
    out << t << buf;
  }
}

}  // namespace vmcast
