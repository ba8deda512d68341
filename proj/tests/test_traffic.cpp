#include <numeric>
#include <sstream>

#include "doctest.h"
#include "vmcast/error.hpp"
#include "vmcast/simulator.hpp"
#include "vmcast/traffic.hpp"

using namespace vmcast;

namespace {
std::vector<NodeId> nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}
const SimTime kRun = SimTime::from_seconds(600.0);
}  // namespace

TEST_CASE("VBR packet sizes and bitrate") {
  VbrSource src(3, kDefaultGroup, {}, SimTime{}, kRun);
  RngStream rng(4, StreamLabel::Traffic);
  SimTime t;
  double bytes = 0;
  std::uint64_t prev_seq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto e = src.emit(t, rng);
    CHECK(e.packet.size_bytes >= 256);
    CHECK(e.packet.size_bytes <= 768);
    CHECK(e.packet.id.origin == 3);
    if (i > 0) CHECK(e.packet.id.seq == prev_seq + 1);
    prev_seq = e.packet.id.seq;
    CHECK(e.packet.created == t);
    CHECK(e.next > t);
    bytes += e.packet.size_bytes;
    t = e.next;
  }
  CHECK(bytes / n == doctest::Approx(512.0).epsilon(0.05));
  double kbps = bytes * 8.0 / t.seconds() / 1000.0;
  CHECK(kbps == doctest::Approx(64.0).epsilon(0.05));
}

TEST_CASE("mean gap for 512-byte packets is 64 ms") {
  VbrConfig cfg;
  cfg.min_packet_bytes = cfg.max_packet_bytes = 512;
  cfg.gap_jitter = 0.0;
  VbrSource src(0, kDefaultGroup, cfg, SimTime{}, kRun);
  RngStream rng(4, StreamLabel::Traffic);
  CHECK(src.emit(SimTime{}, rng).next == SimTime::from_millis(64));
}

TEST_CASE("zero-length active window emits nothing in a run") {
  ScenarioConfig cfg;
  cfg.duration_s = 20;
  cfg.traffic_start_s = 5;
  cfg.traffic_end_s = 5;
  VectorTraceSink sink;
  run_scenario(cfg, sink);
  for (const auto& r : sink.records) CHECK_FALSE((r.proto == Proto::Data && r.op == TraceOp::Send));
}

TEST_CASE("session plan base cases") {
  RngStream rng(1, StreamLabel::Sessions);
  auto all = nodes(100);
  auto one = build_session_plan(1, 1, kRun, all, rng);
  REQUIRE(one.pool.size() == 1);
  REQUIRE(one.sessions.at(one.pool[0]).size() == 1);
  auto s = one.sessions.at(one.pool[0])[0];
  CHECK(s.join >= SimTime{});
  CHECK(s.leave <= kRun);
  CHECK(s.join < s.leave);

  auto plan = build_session_plan(10, 5, kRun, all, rng);
  CHECK(plan.pool.size() == 10);
  CHECK(plan.total_joins() == 50);
  for (const auto& [node, list] : plan.sessions) {
    CHECK(list.size() == 5);
    for (std::size_t i = 0; i < list.size(); ++i) {
      CHECK(list[i].join < list[i].leave);
      CHECK(list[i].leave <= kRun);
      if (i > 0) CHECK(list[i - 1].leave < list[i].join);
    }
  }
}

TEST_CASE("too many listeners is an invalid scenario") {
  RngStream rng(1, StreamLabel::Sessions);
  auto all = nodes(100);
  try {
    build_session_plan(200, 5, kRun, all, rng);
    FAIL("expected InvalidScenario");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidScenario);
    CHECK(std::string(e.what()).find("listeners exceed nodes") != std::string::npos);
  }
}

TEST_CASE("listener count stays within [L/2, L] over 100 seeded plans") {
  auto all = nodes(99);
  for (std::size_t L : {10, 20, 40, 60}) {
    for (std::size_t S : {5, 10, 20}) {
      for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        RngStream rng(seed, StreamLabel::Sessions);
        auto plan = build_session_plan(L, S, kRun, all, rng);
        REQUIRE(plan.total_joins() == L * S);
        for (int t = 30; t <= 570; ++t) {
          auto n = plan.listeners_at(SimTime::from_seconds(t));
          INFO("L=" << L << " S=" << S << " seed=" << seed << " t=" << t);
          REQUIRE(2 * n >= L);
          REQUIRE(n <= L);
        }
      }
    }
  }
}

TEST_CASE("session plan is a pure function of its inputs") {
  auto all = nodes(100);
  RngStream a(8, StreamLabel::Sessions), b(8, StreamLabel::Sessions);
  CHECK(build_session_plan(20, 10, kRun, all, a) == build_session_plan(20, 10, kRun, all, b));
}

TEST_CASE("session plan file round trip and validation") {
  auto all = nodes(100);
  RngStream rng(2, StreamLabel::Sessions);
  auto plan = build_session_plan(10, 5, kRun, all, rng);
  std::stringstream s;
  write_session_plan(s, plan);
  auto back = read_session_plan(s);
  CHECK(back.total_joins() == plan.total_joins());
  CHECK(back.sessions == plan.sessions);

  std::stringstream bad("3 10.0 5.0\n");
  CHECK_THROWS_AS(read_session_plan(bad), Error);
  std::stringstream overlap("3 1.0 5.0\n3 4.0 8.0\n");
  CHECK_THROWS_AS(read_session_plan(overlap), Error);
}

TEST_CASE("session events reach the protocol at their exact time") {
  ScenarioConfig cfg;
  cfg.nodes = 3;
  cfg.duration_s = 30;
  cfg.sources = 0;
  SessionPlan plan;
  plan.pool = {1};
  plan.sessions[1] = {{SimTime::from_seconds(12.3), SimTime::from_seconds(20.0)}};
  for (auto p : {ProtocolKind::Maodv, ProtocolKind::Puma}) {
    cfg.protocol = p;
    VectorTraceSink sink;
    Simulation sim(cfg, sink, &plan);
    sim.run_until(SimTime::from_seconds(12.3) - SimTime::from_micros(1));
    CHECK_FALSE(sim.agent(1).is_member());
    sim.run_until(SimTime::from_seconds(12.3));
    CHECK(sim.agent(1).is_member());
    sim.run_until(SimTime::from_seconds(20.0));
    CHECK_FALSE(sim.agent(1).is_member());
    std::vector<SimTime> times;
    for (const auto& r : sink.records)
      if (r.op == TraceOp::Session) times.push_back(r.time);
    REQUIRE(times.size() == 2);
    CHECK(times[0] == SimTime::from_seconds(12.3));
  }
}

TEST_CASE("joining twice is a plan error") {
  ScenarioConfig cfg;
  cfg.nodes = 3;
  cfg.duration_s = 30;
  cfg.sources = 0;
  SessionPlan plan;
  plan.pool = {1};
  plan.sessions[1] = {{SimTime::from_seconds(1.0), SimTime::from_seconds(20.0)}};
  NullTraceSink sink;
  Simulation sim(cfg, sink, &plan);
  sim.schedule_join(1, SimTime::from_seconds(2.0));
  try {
    sim.run();
    FAIL("expected InvalidPlan");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidPlan);
  }
}

TEST_CASE("both protocols replay identical session timestamps for a seed") {
  ScenarioConfig cfg;
  cfg.duration_s = 120;
  cfg.listeners = 10;
  cfg.sessions = 5;
  cfg.seed = 21;
  std::vector<std::string> sess[2];
  int i = 0;
  for (auto p : {ProtocolKind::Maodv, ProtocolKind::Puma}) {
    cfg.protocol = p;
    VectorTraceSink sink;
    run_scenario(cfg, sink);
    for (const auto& r : sink.records)
      if (r.op == TraceOp::Session) sess[i].push_back(format_record(r));
    ++i;
  }
  CHECK(sess[0].size() == 100);
  CHECK(sess[0] == sess[1]);
}

TEST_CASE("source is the vehicle nearest the strip center") {
  std::vector<Position> pos{{100, 200}, {5100, 400}, {4950, 600}, {9000, 800}};
  CHECK(pick_source(pos, HighwayGeometry{}) == 2);
}
