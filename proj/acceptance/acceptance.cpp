// Full-scale acceptance run. Prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion could be evaluated, even if some
// of them FAIL, so the binary reports results instead of breaking the test
// run. Pass --strict to exit 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include <unistd.h>

#include "metrics_oracle.hpp"
#include "scripted.hpp"
#include "vmcast/batch.hpp"
#include "vmcast/maodv.hpp"
#include "vmcast/mobility.hpp"
#include "vmcast/puma.hpp"
#include "vmcast/simulator.hpp"
#include "vmcast/traffic.hpp"
#include "vmcast/trends.hpp"

namespace fs = std::filesystem;
using namespace vmcast;
using vmcast::testing::Scripted;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kReps = 3;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<int>> components(const GraphTopology& g, std::size_t n) {
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> out;
  for (NodeId i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    out.emplace_back();
    std::vector<NodeId> stack{i};
    comp[i] = static_cast<int>(out.size()) - 1;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      out.back().push_back(static_cast<int>(u));
      for (NodeId v = 0; v < n; ++v)
        if (comp[v] < 0 && g.link(u, v)) {
          comp[v] = comp[i];
          stack.push_back(v);
        }
    }
  }
  return out;
}

Outcome determinism(const fs::path& dir) {
  Outcome o;
  double worst = 0.0;
  for (auto proto : {ProtocolKind::Maodv, ProtocolKind::Puma}) {
    ScenarioConfig cfg;
    cfg.protocol = proto;
    cfg.listeners = 60;
    cfg.sessions = 20;
    cfg.seed = kSeed;
    std::string rows[2], traces[2];
    for (int i = 0; i < 2; ++i) {
      auto path = dir / ("det-" + std::to_string(i) + ".tr");
      auto t0 = std::chrono::steady_clock::now();
      rows[i] = format_csv_row(run_and_measure(cfg, path.string()));
      worst = std::max(worst, seconds_since(t0));
      traces[i] = slurp(path);
    }
    std::string id = scenario_id(cfg);
    if (traces[0].empty()) o = {false, id + " wrote an empty trace"};
    else if (traces[0] != traces[1]) o = {false, id + " traces differ"};
    else if (rows[0] != rows[1]) o = {false, id + " CSV rows differ"};
    if (!o.pass) return o;
  }
  if (worst >= 180.0) return {false, "slowest run took " + fmt("%.1f", worst) + " s"};
  return {true, "maodv and puma L=60,S=20 byte-identical over two runs, slowest " + fmt("%.1f", worst) + " s"};
}

Outcome oracle() {
  RngStream rng(99, StreamLabel::Traffic);
  std::size_t records = 0;
  for (int i = 0; i < 200; ++i) {
    auto trace = vmcast::testing::random_trace(rng);
    records += trace.size();
    if (trace.size() > 1000) return {false, "trace " + std::to_string(i) + " too long"};
    auto bad = vmcast::testing::oracle_mismatch(trace);
    if (!bad.empty()) return {false, "trace " + std::to_string(i) + " differs on " + bad};
  }
  return {true, "200 traces, " + std::to_string(records) + " records, all counts and ratios match"};
}

Outcome from_trend(const std::vector<TrendResult>& trends, const std::string& name) {
  for (const auto& t : trends)
    if (t.name == name) return {t.status == TrendStatus::Pass, t.detail};
  return {false, "trend missing"};
}

// MAODV: forest checked at quiescence after every scripted step.
std::string maodv_forest(std::size_t& checks) {
  auto agent = [](Scripted& s, NodeId n) -> Maodv& { return dynamic_cast<Maodv&>(s.sim->agent(n)); };
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Scripted s(ProtocolKind::Maodv, 10, seed);
    RngStream rng(seed, StreamLabel::Protocol);
    auto flip = [&] {
      NodeId a = static_cast<NodeId>(rng.between(0, 9));
      NodeId b = static_cast<NodeId>(rng.between(0, 9));
      if (a != b) s.link(a, b, !s.graph.link(a, b));
    };
    for (int i = 0; i < 15; ++i) flip();
    std::vector<bool> member(10, false);
    double t = 0.0;
    for (int step = 1; step <= 40; ++step) {
      std::string where = "seed " + std::to_string(seed) + " step " + std::to_string(step);
      NodeId n = static_cast<NodeId>(rng.between(0, 9));
      if (member[n]) s.leave(n, t + 1.0);
      else s.join(n, t + 1.0);
      member[n] = !member[n];
      s.run_to(t + 1.0);
      flip();
      // Wait until nothing but hellos has been sent for five seconds.
      std::size_t seen = s.sink.records.size();
      double quiet = t + 1.0, now = t + 1.0;
      while (now - quiet < 5.0) {
        if (now > t + 121.0) return "no quiescence at " + where;
        now += 1.0;
        s.run_to(now);
        for (; seen < s.sink.records.size(); ++seen)
          if (s.sink.records[seen].proto == Proto::Maodv && s.sink.records[seen].kind != MsgKind::GroupHello) quiet = now;
      }
      t = s.sim->now().seconds();
      ++checks;
      for (NodeId i = 0; i < 10; ++i) {
        auto& a = agent(s, i);
        if (a.is_member() != member[i] || (member[i] && !a.on_tree())) return "membership off tree at " + where;
        if (!a.on_tree()) {
          if (a.upstream()) return "upstream off tree at " + where;
          continue;
        }
        std::set<NodeId> path{i};
        NodeId cur = i;
        while (auto up = agent(s, cur).upstream()) {
          if (!path.insert(*up).second) return "cycle at " + where;
          cur = *up;
        }
        if (!agent(s, cur).is_leader()) return "root is not a leader at " + where;
      }
      for (const auto& comp : components(s.graph, 10)) {
        int leaders = 0;
        for (int i : comp) leaders += agent(s, static_cast<NodeId>(i)).is_leader() ? 1 : 0;
        if (leaders > 1) return "two leaders in one partition at " + where;
      }
    }
  }
  return {};
}

// PUMA: one core per partition with merges, and only cores advance round numbers.
std::string puma_convergence(std::size_t& checks) {
  auto agent = [](Scripted& s, NodeId n) -> Puma& { return dynamic_cast<Puma&>(s.sim->agent(n)); };
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Scripted s(ProtocolKind::Puma, 10, seed);
    struct Sent {
      NodeId sender;
      NodeId core;
      std::uint32_t seq;
    };
    std::vector<Sent> log;
    s.sim->set_packet_tap([&](NodeId from, const Packet& p, SimTime) {
      if (p.kind == MsgKind::Announcement) log.push_back({from, p.announcement.core, p.announcement.seq});
    });
    RngStream rng(seed, StreamLabel::Protocol);
    auto pick = [&] { return static_cast<NodeId>(rng.between(0, 9)); };
    auto flip = [&] {
      NodeId a = pick(), b = pick();
      if (a != b) s.link(a, b, !s.graph.link(a, b));
    };
    for (int i = 0; i < 15; ++i) flip();
    std::vector<bool> member(10, false);
    double t = 0.0;
    for (int step = 1; step <= 15; ++step) {
      std::string where = "seed " + std::to_string(seed) + " step " + std::to_string(step);
      NodeId n = pick();
      if (member[n]) s.leave(n, t + 1.0);
      else s.join(n, t + 1.0);
      member[n] = !member[n];
      s.run_to(t + 1.0);
      flip();
      if (step % 5 == 0) {
        NodeId a = pick(), b = pick();
        if (a != b) s.link(a, b, true);
      }
      t += 40.0;
      s.run_to(t);
      ++checks;
      for (const auto& comp : components(s.graph, 10)) {
        std::set<NodeId> cores;
        bool has_member = false;
        for (int i : comp) {
          if (agent(s, static_cast<NodeId>(i)).is_core()) cores.insert(static_cast<NodeId>(i));
          has_member = has_member || member[static_cast<std::size_t>(i)];
        }
        if (cores.size() > 1) return "two cores in one partition at " + where;
        if (has_member && cores.size() != 1) return "partition with members has no core at " + where;
        for (int i : comp)
          if (has_member && agent(s, static_cast<NodeId>(i)).core() != *cores.begin())
            return "node disagrees on the core at " + where;
      }
      for (NodeId i = 0; i < 10; ++i)
        if (member[i] && !agent(s, i).in_mesh()) return "receiver outside the mesh at " + where;
    }
    std::map<NodeId, std::uint32_t> top;
    for (const auto& x : log) {
      if (x.sender == x.core) {
        if (x.seq < top[x.sender]) return "core went back in sequence, seed " + std::to_string(seed);
        top[x.sender] = x.seq;
      } else if (x.seq > top[x.core]) {
        return "relay invented a sequence number, seed " + std::to_string(seed);
      }
    }
  }
  return {};
}

// Full mesh of five members: every node hears every copy.
std::string duplicate_suppression(ProtocolKind proto) {
  Scripted s(proto, 5);
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) s.link(a, b);
  for (NodeId n = 1; n < 5; ++n) s.join(n, 1.0 + n);
  s.run_to(15.0);
  s.sim->add_source(0, SimTime::from_seconds(20.0), SimTime::from_seconds(25.0));
  s.run_to(30.0);
  std::map<std::pair<NodeId, std::uint64_t>, int> got;
  std::size_t sent = 0, redundant = 0;
  for (const auto& r : s.sink.records) {
    if (r.proto != Proto::Data) continue;
    if (r.op == TraceOp::Receive && ++got[{r.node, r.pkt->seq}] > 1) return "double reception";
    if (r.op == TraceOp::Send && r.node == 0) ++sent;
    if (r.op == TraceOp::Send && r.node != 0) ++redundant;
  }
  if (sent == 0) return "nothing sent";
  if (got.size() != sent * 4) return "missing receptions";
  if (proto == ProtocolKind::Puma && redundant == 0) return "no redundant copies forced";
  return {};
}

Outcome structure() {
  std::size_t mchecks = 0, pchecks = 0;
  if (auto e = maodv_forest(mchecks); !e.empty()) return {false, "maodv " + e};
  if (auto e = puma_convergence(pchecks); !e.empty()) return {false, "puma " + e};
  for (auto p : {ProtocolKind::Maodv, ProtocolKind::Puma})
    if (auto e = duplicate_suppression(p); !e.empty()) return {false, std::string(to_string(p)) + " " + e};
  return {true, "maodv forest " + std::to_string(mchecks) + " checks, puma convergence " + std::to_string(pchecks) +
                    " checks, duplicate suppression on both"};
}

Outcome mobility() {
  RngStream rng(kSeed, StreamLabel::Mobility);
  HighwayGeometry geo;
  auto fleet = init_fleet(10000, rng, geo);
  double sum = 0.0, lo = 1e9, hi = 0.0;
  for (const auto& v : fleet) {
    double kmh = v.speed_mps * 3.6;
    sum += kmh;
    lo = std::min(lo, kmh);
    hi = std::max(hi, kmh);
    // Speeds are drawn in m/s; allow rounding from the unit conversion only.
    if (v.speed_mps < kmh_to_mps(80.0) || v.speed_mps > kmh_to_mps(110.0)) return {false, "speed out of band"};
  }
  double mean = sum / static_cast<double>(fleet.size());
  if (std::abs(mean - 95.0) > 1.5) return {false, "mean " + fmt("%.3f", mean) + " km/h"};
  Mobility mob(fleet, geo, SimTime::from_millis(500));
  for (std::int64_t t = 0; t <= 600; ++t) {
    mob.tick_to(SimTime::from_seconds(static_cast<double>(t)));
    for (const auto& p : mob.positions())
      if (p.x < 0.0 || p.x > geo.length_m || p.y < 0.0 || p.y > geo.width_m)
        return {false, "vehicle out of bounds at " + std::to_string(t) + " s"};
  }
  return {true, "10^4 vehicles, speeds " + fmt("%.2f", lo) + ".." + fmt("%.2f", hi) + " km/h, mean " +
                    fmt("%.3f", mean) + ", in bounds for 600 s"};
}

Outcome sessions() {
  std::size_t plans = 0;
  for (std::size_t L : {10, 20, 40, 60})
    for (std::size_t S : {5, 10, 20})
      for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScenarioConfig cfg;
        cfg.listeners = L;
        cfg.sessions = S;
        cfg.seed = seed;
        NullTraceSink sink;
        Simulation sim(cfg, sink);
        const auto& plan = sim.plan();
        std::string cell = "L=" + std::to_string(L) + ",S=" + std::to_string(S) + " seed " + std::to_string(seed);
        if (plan.pool.size() != L) return {false, cell + " pool size"};
        for (NodeId n : plan.pool) {
          auto it = plan.sessions.find(n);
          if (it == plan.sessions.end() || it->second.size() != S) return {false, cell + " node session count"};
        }
        for (int t = 30; t <= 570; ++t) {
          auto c = plan.listeners_at(SimTime::from_seconds(t));
          if (2 * c < L || c > L) return {false, cell + " has " + std::to_string(c) + " listeners at " + std::to_string(t)};
        }
        ++plans;
      }
  return {true, std::to_string(plans) + " plans over 12 cells, listeners within [L/2, L] each second of [30, 570]"};
}

void informational(const std::vector<ReportRow>& rows) {
  std::map<std::string, std::vector<double>> per_received, per_sent;
  for (const auto& r : rows) {
    if (r.metrics.avg_eed_per_received_s) per_received[r.protocol].push_back(*r.metrics.avg_eed_per_received_s);
    if (r.metrics.avg_eed_s) per_sent[r.protocol].push_back(*r.metrics.avg_eed_s);
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
  };
  for (const auto& p : {"maodv", "puma"})
    std::printf("INFO median delay %s: %.4f s per sent packet, %.4f s per reception\n", p, median(per_sent[p]),
                median(per_received[p]));
  ScenarioConfig d;
  std::printf("INFO puma source mode: %s\n", d.puma.source_is_member ? "member" : "non-member");
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  auto dir = fs::temp_directory_path() / ("vmcast-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto t0 = std::chrono::steady_clock::now();
  try {
    report(1, "determinism", determinism(dir));
    report(2, "metric oracle", oracle());

    MatrixOptions opts;
    opts.keep_traces = false;
    opts.workers = std::max(1u, std::thread::hardware_concurrency());
    auto outcome = run_matrix(expand_repetitions(paper_matrix(kSeed), kReps), opts);
    for (const auto& f : outcome.failures) std::printf("INFO scenario %s failed: %s\n", f.scenario.c_str(), f.message.c_str());
    auto trends = report_trends(outcome.rows);
    report(3, "throughput ordering", from_trend(trends, "throughput ordering"));
    report(4, "throughput scaling", from_trend(trends, "throughput scaling"));
    report(5, "NRL trends", from_trend(trends, "NRL trends"));
    report(6, "PDR ordering", from_trend(trends, "PDR ordering"));
    report(7, "delay band", from_trend(trends, "delay band"));
    informational(outcome.rows);

    report(8, "structural invariants", structure());
    report(9, "mobility statistics", mobility());
    report(10, "session plan", sessions());
  } catch (const std::exception& e) {
    std::printf("ERROR %s\n", e.what());
    fs::remove_all(dir);
    return 2;
  }
  fs::remove_all(dir);
  std::printf("%d of 10 criteria failed, %.0f s\n", failures, seconds_since(t0));
  return strict && failures > 0 ? 1 : 0;
}
