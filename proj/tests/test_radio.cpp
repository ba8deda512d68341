#include <cmath>

#include "doctest.h"
#include "vmcast/radio.hpp"

using namespace vmcast;

namespace {
Packet sized(std::uint32_t bytes) {
  Packet p;
  p.size_bytes = bytes;
  return p;
}
}  // namespace

TEST_CASE("range is inclusive at 1000 m") {
  std::vector<Position> pos{{0, 200}, {999, 200}, {1000, 200}, {2001, 200}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  Radio radio({}, topo, rng);
  CHECK(radio.in_range(0, 1));
  CHECK(radio.in_range(0, 2));
  CHECK(radio.in_range(0, 0));
  CHECK_FALSE(radio.in_range(0, 3));
  CHECK(radio.in_range(2, 0) == radio.in_range(0, 2));

  std::vector<Position> far{{0, 200}, {1001, 200}};
  PositionTopology t2(far);
  Radio r2({}, t2, rng);
  CHECK(r2.broadcast(0, sized(512), SimTime{}).empty());
}

TEST_CASE("cross-lane distance uses Euclidean geometry") {
  std::vector<Position> pos{{0, 200}, {2000, 800}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  Radio radio({}, topo, rng);
  CHECK(distance(pos[0], pos[1]) == doctest::Approx(std::sqrt(2000.0 * 2000.0 + 600.0 * 600.0)));
  CHECK_FALSE(radio.in_range(0, 1));
}

TEST_CASE("delivery time is transmission plus propagation delay") {
  CHECK(transmission_delay(512, 11e6).micros() == 372);
  CHECK(propagation_delay(1000.0).micros() == 3);
  std::vector<Position> pos{{0, 200}, {1000, 200}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  Radio radio({}, topo, rng);
  auto at = SimTime::from_seconds(5.0);
  auto d = radio.broadcast(0, sized(512), at);
  REQUIRE(d.size() == 1);
  CHECK(d[0].receiver == 1);
  CHECK(d[0].at == at + SimTime::from_micros(372 + 3));
  CHECK(d[0].at > at);
}

TEST_CASE("never delivers to the sender; lossless static pair always delivers") {
  std::vector<Position> pos{{0, 200}, {10, 200}, {20, 400}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  Radio radio({}, topo, rng);
  for (int i = 0; i < 100; ++i) {
    auto d = radio.broadcast(1, sized(300), SimTime::from_millis(i));
    REQUIRE(d.size() == 2);
    CHECK(d[0].receiver == 0);
    CHECK(d[1].receiver == 2);
    CHECK_FALSE(d[0].lost);
  }
}

TEST_CASE("loss probability drops about the configured share") {
  std::vector<Position> pos{{0, 200}, {10, 200}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  RadioConfig cfg;
  cfg.loss_probability = 0.3;
  Radio radio(cfg, topo, rng);
  int lost = 0;
  for (int i = 0; i < 10000; ++i) lost += radio.broadcast(0, sized(100), SimTime::from_millis(i))[0].lost ? 1 : 0;
  CHECK(lost > 2700);
  CHECK(lost < 3300);
}

TEST_CASE("collision mode flags overlapping receptions") {
  std::vector<Position> pos{{0, 200}, {10, 200}, {20, 200}};
  PositionTopology topo(pos);
  RngStream rng(1, StreamLabel::Radio);
  RadioConfig cfg;
  cfg.collisions = true;
  Radio radio(cfg, topo, rng);
  auto a = radio.broadcast(0, sized(512), SimTime{});
  auto b = radio.broadcast(2, sized(512), SimTime::from_micros(100));
  // Node 1 hears both transmissions overlapping in time.
  std::uint64_t ta = 0, tb = 0;
  for (const auto& d : a)
    if (d.receiver == 1) ta = d.ticket;
  for (const auto& d : b)
    if (d.receiver == 1) tb = d.ticket;
  REQUIRE(ta != 0);
  REQUIRE(tb != 0);
  CHECK(radio.collided(ta));
  CHECK(radio.collided(tb));
  auto c = radio.broadcast(0, sized(512), SimTime::from_seconds(1.0));
  for (const auto& d : c)
    if (d.receiver == 1) CHECK_FALSE(radio.collided(d.ticket));
}

TEST_CASE("graph topology links are symmetric and explicit") {
  GraphTopology g(3);
  g.set_link(0, 1, true);
  CHECK(g.link(1, 0));
  CHECK_FALSE(g.link(0, 2));
  std::vector<Neighbor> out;
  g.neighbors(0, 1000, out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 1);
  g.set_link(0, 1, false);
  g.neighbors(0, 1000, out);
  CHECK(out.empty());
}
