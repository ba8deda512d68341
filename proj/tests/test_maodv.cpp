#include <algorithm>
#include <set>

#include "doctest.h"
#include "scripted.hpp"
#include "vmcast/maodv.hpp"

using namespace vmcast;
using vmcast::testing::Scripted;

namespace {
Maodv& m(Scripted& s, NodeId n) { return dynamic_cast<Maodv&>(s.sim->agent(n)); }

/// Upstream pointers never form a cycle. With `settled`, every chain also
/// ends at a leader; during churn a chain may end at a node that is
/// repairing or has left without its children noticing yet.
void check_forest(Scripted& s, bool settled = true) {
  const auto n = s.sim->node_count();
  for (NodeId i = 0; i < n; ++i) {
    if (!m(s, i).on_tree()) {
      CHECK_FALSE(m(s, i).upstream().has_value());
      continue;
    }
    std::set<NodeId> seen{i};
    NodeId cur = i;
    while (auto up = m(s, cur).upstream()) {
      INFO("node " << i << " path through " << *up);
      REQUIRE(seen.insert(*up).second);
      cur = *up;
    }
    if (settled) {
      INFO("node " << i << " root " << cur);
      CHECK(m(s, cur).is_leader());
    }
  }
}
}  // namespace

TEST_CASE("first joiner becomes group leader") {
  Scripted s(ProtocolKind::Maodv, 3);
  s.chain({0, 1, 2});
  s.join(0, 1.0);
  s.run_to(5.0);
  CHECK(m(s, 0).is_member());
  CHECK(m(s, 0).is_leader());
  CHECK(m(s, 0).on_tree());
  CHECK(m(s, 0).group_seq() >= 1);
  CHECK_FALSE(m(s, 1).on_tree());
  CHECK(s.count(Proto::Maodv, MsgKind::GroupHello) > 0);
}

TEST_CASE("adjacent join costs one request, one reply, one activation") {
  Scripted s(ProtocolKind::Maodv, 2);
  s.link(0, 1);
  s.join(0, 1.0);
  s.run_to(5.0);
  REQUIRE(m(s, 0).is_leader());
  s.reset_counts();
  s.join(1, 5.5);
  s.run_to(6.5);
  CHECK(s.count(Proto::Maodv, MsgKind::RouteRequest) == 1);
  CHECK(s.count(Proto::Maodv, MsgKind::RouteReply) == 1);
  CHECK(s.count(Proto::Maodv, MsgKind::Activate) == 1);
  CHECK(m(s, 1).on_tree());
  CHECK(m(s, 1).upstream() == std::optional<NodeId>(0));
  CHECK(m(s, 0).downstream() == std::vector<NodeId>{1});
  CHECK(m(s, 1).hop_to_leader() == 1);
}

TEST_CASE("two members behind a shared relay use one branch") {
  // 0 - 1 - {2, 3}
  Scripted s(ProtocolKind::Maodv, 4);
  s.link(0, 1);
  s.link(1, 2);
  s.link(1, 3);
  s.join(0, 1.0);
  s.join(2, 5.0);
  s.join(3, 8.0);
  s.run_to(12.0);
  CHECK(m(s, 1).on_tree());
  CHECK(m(s, 2).upstream() == std::optional<NodeId>(1));
  CHECK(m(s, 3).upstream() == std::optional<NodeId>(1));
  CHECK(m(s, 0).downstream() == std::vector<NodeId>{1});
  check_forest(s);
}

TEST_CASE("requester picks the reply with the shortest route to the tree") {
  // Member 4 reaches the tree via 1 (one relay) or via 2 - 3 (two relays).
  Scripted s(ProtocolKind::Maodv, 5);
  s.link(0, 1);
  s.link(1, 4);
  s.link(0, 2);
  s.link(2, 3);
  s.link(3, 4);
  s.join(0, 1.0);
  s.join(4, 5.0);
  s.run_to(8.0);
  CHECK(m(s, 4).upstream() == std::optional<NodeId>(1));
  CHECK(m(s, 4).hop_to_leader() == 2);
  CHECK_FALSE(m(s, 2).on_tree());
  CHECK_FALSE(m(s, 3).on_tree());
}

TEST_CASE("leaf leave prunes the relay chain") {
  Scripted s(ProtocolKind::Maodv, 4);
  s.chain({0, 1, 2, 3});
  s.join(0, 1.0);
  s.join(3, 5.0);
  s.run_to(8.0);
  REQUIRE(m(s, 3).on_tree());
  REQUIRE(m(s, 2).on_tree());
  REQUIRE(m(s, 1).on_tree());
  s.reset_counts();
  s.leave(3, 9.0);
  s.run_to(10.0);
  CHECK(s.count(Proto::Maodv, MsgKind::Prune) == 3);
  for (NodeId n : {1, 2, 3}) CHECK_FALSE(m(s, n).on_tree());
  CHECK(m(s, 0).downstream().empty());
  CHECK(m(s, 0).is_leader());
}

TEST_CASE("interior member leaving keeps forwarding") {
  Scripted s(ProtocolKind::Maodv, 3);
  s.chain({0, 1, 2});
  s.join(0, 1.0);
  s.join(1, 4.0);
  s.join(2, 7.0);
  s.run_to(10.0);
  s.leave(1, 10.5);
  s.run_to(11.0);
  CHECK_FALSE(m(s, 1).is_member());
  CHECK(m(s, 1).on_tree());
  CHECK(m(s, 2).upstream() == std::optional<NodeId>(1));
}

TEST_CASE("last member leaving dissolves the group state") {
  Scripted s(ProtocolKind::Maodv, 2);
  s.link(0, 1);
  s.join(0, 1.0);
  s.run_to(4.0);
  s.leave(0, 4.5);
  s.run_to(5.0);
  CHECK_FALSE(m(s, 0).on_tree());
  CHECK_FALSE(m(s, 0).is_leader());
  s.reset_counts();
  s.run_to(10.0);
  CHECK(s.count(Proto::Maodv, MsgKind::GroupHello) == 0);
}

TEST_CASE("data crosses a chain once per hop") {
  Scripted s(ProtocolKind::Maodv, 3);
  s.chain({0, 1, 2});
  s.join(2, 1.0);
  s.run_to(3.0);
  s.sim->add_source(0, SimTime::from_seconds(5.0), SimTime::from_seconds(5.0) + SimTime::from_micros(1));
  s.run_to(10.0);
  CHECK(m(s, 0).on_tree());
  CHECK(s.data_received(2) == 1);
  CHECK(s.data_received(1) == 0);
  // Origin emission plus one relay.
  CHECK(s.trace_count(TraceOp::Send, Proto::Data) == 2);
}

TEST_CASE("broken link is repaired through another path") {
  // 0 - 1 - 3 and 0 - 2 - 3; the 1-3 link fails.
  Scripted s(ProtocolKind::Maodv, 4);
  s.link(0, 1);
  s.link(1, 3);
  s.link(0, 2);
  s.link(2, 3);
  s.join(0, 1.0);
  s.join(3, 4.0);
  s.run_to(7.0);
  REQUIRE(m(s, 3).on_tree());
  NodeId via = *m(s, 3).upstream();
  NodeId other = via == 1 ? 2 : 1;
  s.link(via, 3, false);
  s.run_to(20.0);
  CHECK(m(s, 3).on_tree());
  CHECK(m(s, 3).upstream() == std::optional<NodeId>(other));
  CHECK(m(s, 3).leader_id() == 0);
  check_forest(s);
}

TEST_CASE("isolated member becomes leader of its partition") {
  Scripted s(ProtocolKind::Maodv, 2);
  s.link(0, 1);
  s.join(0, 1.0);
  s.join(1, 4.0);
  s.run_to(7.0);
  REQUIRE(m(s, 1).upstream() == std::optional<NodeId>(0));
  s.link(0, 1, false);
  s.run_to(20.0);
  CHECK(m(s, 1).is_leader());
  CHECK(m(s, 0).is_leader());
  CHECK(m(s, 0).downstream().empty());
}

TEST_CASE("partitions merge under one leader when they meet") {
  Scripted s(ProtocolKind::Maodv, 4);
  s.link(0, 1);
  s.link(2, 3);
  s.join(0, 1.0);
  s.join(1, 3.0);
  s.join(2, 1.5);
  s.join(3, 3.5);
  s.run_to(8.0);
  REQUIRE(m(s, 0).is_leader());
  REQUIRE(m(s, 2).is_leader());
  s.link(1, 2);
  s.run_to(30.0);
  int leaders = 0;
  for (NodeId n = 0; n < 4; ++n) leaders += m(s, n).is_leader() ? 1 : 0;
  CHECK(leaders == 1);
  check_forest(s);
}

TEST_CASE("link breaks raise control overhead") {
  auto control = [](bool broken) {
    Scripted s(ProtocolKind::Maodv, 4);
    s.link(0, 1);
    s.link(1, 3);
    s.link(0, 2);
    s.link(2, 3);
    s.join(0, 1.0);
    s.join(3, 4.0);
    s.run_to(7.0);
    if (broken) s.link(*m(s, 3).upstream(), 3, false);
    s.run_to(30.0);
    return s.trace_count(TraceOp::Send, Proto::Maodv);
  };
  CHECK(control(true) > control(false));
}

TEST_CASE("duplicate data is suppressed under redundant links") {
  // Full mesh of five nodes, all members: every node hears every relay.
  Scripted s(ProtocolKind::Maodv, 5);
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) s.link(a, b);
  for (NodeId n = 1; n < 5; ++n) s.join(n, 1.0 + n);
  s.run_to(8.0);
  s.sim->add_source(0, SimTime::from_seconds(10.0), SimTime::from_seconds(12.0));
  s.run_to(15.0);
  std::map<std::pair<NodeId, std::uint64_t>, int> got;
  std::size_t sent = 0;
  for (const auto& r : s.sink.records) {
    if (r.proto != Proto::Data) continue;
    if (r.op == TraceOp::Receive) CHECK(++got[{r.node, r.pkt->seq}] == 1);
    if (r.op == TraceOp::Send && r.node == 0) ++sent;
  }
  CHECK(sent > 0);
  CHECK(got.size() == sent * 4);
}

std::size_t max_leaders_per_component(Scripted& s) {
  const auto n = s.sim->node_count();
  std::vector<int> comp(n, -1);
  int next = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<NodeId> stack{i};
    comp[i] = next;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v = 0; v < n; ++v)
        if (comp[v] < 0 && s.graph.link(u, v)) {
          comp[v] = next;
          stack.push_back(v);
        }
    }
    ++next;
  }
  std::vector<std::size_t> leaders(next, 0);
  for (NodeId i = 0; i < n; ++i) leaders[comp[i]] += m(s, i).is_leader() ? 1 : 0;
  return *std::max_element(leaders.begin(), leaders.end());
}

/// Runs until no tree-building control message (anything but hellos) has
/// been sent for five seconds. Returns false if that never happens.
bool run_to_quiescence(Scripted& s, double from) {
  std::size_t seen = s.sink.records.size();
  double quiet_since = from;
  for (double t = from + 1.0; t <= from + 120.0; t += 1.0) {
    s.run_to(t);
    for (; seen < s.sink.records.size(); ++seen) {
      const auto& r = s.sink.records[seen];
      if (r.proto == Proto::Maodv && r.kind != MsgKind::GroupHello) quiet_since = t;
    }
    if (t - quiet_since >= 5.0) return true;
  }
  return false;
}

TEST_CASE("random graphs with churn keep a loop-free forest") {
  // Every step changes one link and one membership; the structure is
  // checked once the protocol has gone quiet.
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
      NodeId n = static_cast<NodeId>(rng.between(0, 9));
      if (member[n]) s.leave(n, t + 1.0);
      else s.join(n, t + 1.0);
      member[n] = !member[n];
      s.run_to(t + 1.0);
      flip();
      INFO("seed " << seed << " step " << step);
      REQUIRE(run_to_quiescence(s, t + 1.0));
      t = s.sim->now().seconds();
      check_forest(s);
      CHECK(max_leaders_per_component(s) <= 1);
      for (NodeId i = 0; i < 10; ++i) {
        CHECK(m(s, i).is_member() == member[i]);
        if (member[i]) CHECK(m(s, i).on_tree());
      }
    }
  }
}

TEST_CASE("more sessions cost more control traffic") {
  auto control = [](std::size_t sessions) {
    ScenarioConfig cfg;
    cfg.protocol = ProtocolKind::Maodv;
    cfg.duration_s = 120;
    cfg.listeners = 10;
    cfg.sessions = sessions;
    cfg.seed = 3;
    VectorTraceSink sink;
    run_scenario(cfg, sink);
    std::size_t c = 0;
    for (const auto& r : sink.records)
      if (r.op == TraceOp::Send && r.proto == Proto::Maodv && r.kind != MsgKind::GroupHello) ++c;
    return c;
  };
  CHECK(control(20) >= control(5));
}
