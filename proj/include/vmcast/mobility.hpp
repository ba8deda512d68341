#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "vmcast/packet.hpp"
#include "vmcast/rng.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

enum class Direction { Eastbound, Westbound };

struct LaneAssignment {
  Direction direction = Direction::Eastbound;
  int lane_index = 0;
  double lane_y = 0.0;
};

struct VehicleMotion {
  Position position;
  double speed_mps = 0.0;
  LaneAssignment lane;
};

/// Straight-highway strip: eastbound lanes in the lower half, westbound in the upper.
struct HighwayGeometry {
  double length_m = 10000.0;
  double width_m = 1000.0;
  std::array<double, 2> eastbound_lanes{200.0, 400.0};
  std::array<double, 2> westbound_lanes{600.0, 800.0};
  double min_speed_kmh = 80.0;
  double max_speed_kmh = 110.0;

  /// Scales lane offsets to a strip of a different width.
  static HighwayGeometry for_area(double length_m, double width_m);
};

inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// n vehicles, lanes assigned round-robin over the four streams
/// (east 0, east 1, west 0, west 1), x uniform, speed uniform in the band.
/// Throws Error(EmptyFleet) for n == 0.
std::vector<VehicleMotion> init_fleet(std::size_t n, RngStream& rng, const HighwayGeometry& geo = {});

/// Moves along x; leaving one end of the strip re-enters at the other end of the same lane.
VehicleMotion advance(const VehicleMotion& v, double dt_s, const HighwayGeometry& geo = {});

/// Fleet state advanced in fixed ticks. Positions are piecewise constant between ticks.
class Mobility {
 public:
  Mobility(std::vector<VehicleMotion> fleet, HighwayGeometry geo, SimTime tick);

  /// Applies every tick with time <= t.
  void tick_to(SimTime t);
  SimTime last_tick() const { return last_tick_; }
  SimTime tick_interval() const { return tick_; }

  /// Snapshot as of the last applied tick.
  std::span<const Position> positions() const { return positions_; }
  std::vector<Position> positions_at(SimTime t);
  const std::vector<VehicleMotion>& fleet() const { return fleet_; }
  const HighwayGeometry& geometry() const { return geo_; }

  /// One "t node x y" line per node for the current snapshot.
  void dump(std::ostream& out) const;

 private:
  std::vector<VehicleMotion> fleet_;
  std::vector<Position> positions_;
  HighwayGeometry geo_;
  SimTime tick_;
  SimTime last_tick_;
};

}  // namespace vmcast
