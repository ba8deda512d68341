#include <array>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vmcast/error.hpp"
#include "vmcast/mobility.hpp"

using namespace vmcast;

TEST_CASE("empty fleet is rejected") {
  RngStream rng(1, StreamLabel::Mobility);
  CHECK_THROWS_AS(init_fleet(0, rng), Error);
}

TEST_CASE("four vehicles occupy the four streams") {
  RngStream rng(1, StreamLabel::Mobility);
  auto fleet = init_fleet(4, rng);
  std::array<double, 4> ys{200, 400, 600, 800};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(fleet[i].position.y == ys[i]);
    CHECK(fleet[i].lane.lane_y == ys[i]);
    CHECK(fleet[i].lane.direction == (i < 2 ? Direction::Eastbound : Direction::Westbound));
    CHECK((fleet[i].lane.direction == Direction::Eastbound) == (fleet[i].position.y < 500));
  }
}

TEST_CASE("hundred vehicles: 25 per stream, speeds in band") {
  RngStream rng(3, StreamLabel::Mobility);
  auto fleet = init_fleet(100, rng);
  std::array<int, 4> per{};
  for (const auto& v : fleet) {
    per[static_cast<std::size_t>(v.lane.lane_y / 200.0) - 1]++;
    CHECK(v.speed_mps >= kmh_to_mps(80.0));
    CHECK(v.speed_mps <= kmh_to_mps(110.0));
    CHECK(v.position.x >= 0.0);
    CHECK(v.position.x < 10000.0);
  }
  for (int n : per) CHECK(n == 25);
}

TEST_CASE("speed statistics over 10^4 vehicles") {
  RngStream rng(9, StreamLabel::Mobility);
  auto fleet = init_fleet(10000, rng);
  double sum = 0;
  for (const auto& v : fleet) {
    double kmh = v.speed_mps * 3.6;
    CHECK(kmh >= 80.0 - 1e-9);
    CHECK(kmh <= 110.0 + 1e-9);
    sum += kmh;
  }
  CHECK(std::abs(sum / 10000.0 - 95.0) <= 1.5);
}

TEST_CASE("advance follows kinematics and wraps") {
  VehicleMotion v;
  v.position = {100.0, 200.0};
  v.speed_mps = 22.222;
  v.lane = {Direction::Eastbound, 0, 200.0};
  CHECK(advance(v, 0.0).position == v.position);
  CHECK(advance(v, 1.0).position.x == doctest::Approx(122.222));

  v.position.x = 9995.0;
  v.speed_mps = 25.0;
  auto w = advance(v, 1.0);
  CHECK(w.position.x == doctest::Approx(20.0));
  CHECK(w.position.y == 200.0);

  VehicleMotion west;
  west.position = {10.0, 800.0};
  west.speed_mps = 25.0;
  west.lane = {Direction::Westbound, 1, 800.0};
  auto u = advance(west, 1.0);
  CHECK(u.position.x == doctest::Approx(9985.0));
  CHECK(u.position.y == 800.0);
}

TEST_CASE("ticked motion matches the closed form") {
  VehicleMotion v;
  v.position = {0.0, 200.0};
  v.speed_mps = 27.778;
  v.lane = {Direction::Eastbound, 0, 200.0};
  Mobility m({v}, HighwayGeometry{}, SimTime::from_millis(500));
  auto start = m.positions_at(SimTime{});
  CHECK(start[0] == v.position);
  auto a = m.positions_at(SimTime::from_seconds(600.0));
  auto b = m.positions_at(SimTime::from_seconds(600.0));
  CHECK(a == b);
  CHECK(a[0].x == doctest::Approx(std::fmod(27.778 * 600.0, 10000.0)).epsilon(1e-6));
}

TEST_CASE("positions stay in bounds over a full run") {
  RngStream rng(5, StreamLabel::Mobility);
  Mobility m(init_fleet(100, rng), HighwayGeometry{}, SimTime::from_millis(500));
  std::vector<double> lane_y;
  for (const auto& v : m.fleet()) lane_y.push_back(v.position.y);
  for (int t = 1; t <= 1200; ++t) {
    m.tick_to(SimTime::from_millis(500LL * t));
    auto pos = m.positions();
    REQUIRE(pos.size() == 100);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      REQUIRE(pos[i].x >= 0.0);
      REQUIRE(pos[i].x <= 10000.0);
      REQUIRE(pos[i].y == lane_y[i]);
    }
  }
  CHECK(m.last_tick() == SimTime::from_seconds(600.0));
}

TEST_CASE("mobility dump lines") {
  RngStream rng(5, StreamLabel::Mobility);
  Mobility m(init_fleet(2, rng), HighwayGeometry{}, SimTime::from_millis(500));
  m.tick_to(SimTime::from_millis(500));
  std::ostringstream out;
  m.dump(out);
  std::istringstream in(out.str());
  std::string t;
  int node;
  double x, y;
  int lines = 0;
  while (in >> t >> node >> x >> y) {
    CHECK(t == "0.500000");
    ++lines;
  }
  CHECK(lines == 2);
}
