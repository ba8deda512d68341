#include "vmcast/maodv.hpp"

#include <algorithm>

namespace vmcast {

namespace {
constexpr std::uint32_t kRequestBytes = 40;
constexpr std::uint32_t kReplyBytes = 40;
constexpr std::uint32_t kActivateBytes = 32;
constexpr std::uint32_t kHelloBytes = 32;
constexpr std::uint32_t kPruneBytes = 24;
}  // namespace

Maodv::Maodv(NodeId self, NodeServices& net, MaodvConfig cfg) : MulticastProtocol(self, net), cfg_(cfg) {}

std::vector<NodeId> Maodv::downstream() const {
  std::vector<NodeId> out;
  out.reserve(downstream_.size());
  for (const auto& [n, _] : downstream_) out.push_back(n);
  return out;
}

void Maodv::start() {
  started_ = true;
  // Random phase keeps link checks of different nodes apart.
  net().set_timer(self_, jitter(cfg_.hello_interval), kMaintenanceTimer);
  if (source_) start_join(false);
}

void Maodv::set_source(bool source) {
  source_ = source;
  if (started_ && source_ && !on_tree_) start_join(false);
}

void Maodv::join_group() {
  if (member_) return;
  member_ = true;
  if (!on_tree_) start_join(false);
}

void Maodv::leave_group() {
  if (!member_) return;
  member_ = false;
  if (!on_tree_) {
    // A fresh join still in progress is abandoned.
    if (pending_) {
      net().cancel_timer(pending_->timer);
      pending_.reset();
    }
    return;
  }
  check_prune();
}

bool Maodv::attached() const {
  if (!on_tree_) return false;
  if (leader_) return true;
  return upstream_ != kNoNode && now() - upstream_heard_ <= loss_timeout();
}

bool Maodv::eligible_for(const RequestContext& ctx) const {
  if (!attached()) return false;
  if (!ctx.requester_on_tree) return true;
  if (leader_id_ != ctx.leader) return true;
  return hop_ < ctx.hop;
}

const Maodv::Reply& Maodv::best_reply(const std::vector<Reply>& replies) {
  return *std::min_element(replies.begin(), replies.end(), [](const Reply& a, const Reply& b) {
    if (a.group_seq != b.group_seq) return a.group_seq > b.group_seq;
    if (a.path_hops != b.path_hops) return a.path_hops < b.path_hops;
    return a.replier < b.replier;
  });
}

// Children stay alive on any traffic. The upstream counts as alive only
// through hellos (see on_hello), so a branch cut off from every leader
// times out even while its nodes keep talking to each other.
void Maodv::note_heard(NodeId from) {
  auto it = downstream_.find(from);
  if (it != downstream_.end()) it->second = now();
}

void Maodv::start_join(bool merge) {
  if (pending_) return;
  pending_.emplace();
  pending_->merge = merge;
  send_request();
}

void Maodv::send_request() {
  pending_->request_id = ++next_request_id_;
  pending_->replies.clear();
  Packet p = make_control(Proto::Maodv, MsgKind::RouteRequest, kRequestBytes);
  auto& m = p.maodv;
  m.origin = self_;
  m.request_id = pending_->request_id;
  m.ttl = cfg_.request_ttl;
  m.requester_on_tree = on_tree_;
  m.requester_hop = pending_->merge ? 0 : hop_;
  m.requester_leader = leader_id_;
  send(std::move(p), SimTime{});
  SimTime wait = cfg_.request_wait * (std::int64_t{1} << pending_->attempt);
  pending_->timer = net().set_timer(self_, wait, kRequestTimer, pending_->request_id);
}

void Maodv::finish_request() {
  if (!pending_->replies.empty()) {
    Reply best = best_reply(pending_->replies);
    pending_.reset();
    activate(best);
    return;
  }
  if (pending_->attempt < cfg_.request_retries) {
    ++pending_->attempt;
    send_request();
    return;
  }
  bool merge = pending_->merge;
  pending_.reset();
  if (merge && (leader_ || upstream_ != kNoNode)) return;  // keep the current tree
  if (pinned()) {
    become_leader();
  } else {
    teardown_downstream();
    leave_tree();
  }
}

void Maodv::activate(const Reply& best) {
  RequestContext ctx{on_tree_, leader_ ? 0 : hop_, leader_ ? self_ : leader_id_};
  NodeId old_up = upstream_;
  if (leader_) {
    leader_ = false;
    net().cancel_timer(hello_timer_);
  }
  on_tree_ = true;
  upstream_ = best.via;
  upstream_heard_ = now();
  downstream_.erase(best.via);
  group_seq_ = std::max(group_seq_, best.group_seq);

  Packet p = make_control(Proto::Maodv, MsgKind::Activate, kActivateBytes);
  p.next_hop = best.via;
  auto& m = p.maodv;
  m.origin = self_;
  m.replier = best.replier;
  m.request_id = 0;
  m.group_seq = best.group_seq;
  m.requester_on_tree = ctx.requester_on_tree;
  m.requester_hop = ctx.hop;
  m.requester_leader = ctx.leader;
  m.on_tree = true;
  m.tree_hop = best.tree_hop + best.path_hops;
  m.leader = best.leader;
  m.mode = kGraft;
  send(std::move(p), SimTime{});
  if (old_up != kNoNode && old_up != best.via) {
    // Merge from inside a tree: the old branch now hangs below us.
    downstream_[old_up] = now();
    send_flip(old_up, ctx.leader, best.leader, best.tree_hop + best.path_hops);
  }
  set_tree_state(best.leader, best.tree_hop + best.path_hops, true);
}

void Maodv::graft_and_flip(NodeId to, const MaodvFields& state) {
  NodeId old_up = upstream_;
  NodeId old_leader = leader_id_;
  if (leader_) {
    leader_ = false;
    net().cancel_timer(hello_timer_);
  }
  downstream_.erase(to);
  upstream_ = to;
  upstream_heard_ = now();
  group_seq_ = std::max(group_seq_, state.group_seq);

  Packet g = make_control(Proto::Maodv, MsgKind::Activate, kActivateBytes);
  g.next_hop = to;
  g.maodv.origin = self_;
  g.maodv.replier = to;
  g.maodv.group_seq = group_seq_;
  g.maodv.on_tree = true;
  g.maodv.tree_hop = state.tree_hop + 1;
  g.maodv.leader = state.leader;
  g.maodv.mode = kGraft;
  send(std::move(g), SimTime{});
  if (old_up != kNoNode) {
    downstream_[old_up] = now();
    send_flip(old_up, old_leader, state.leader, state.tree_hop + 1);
  }
  set_tree_state(state.leader, state.tree_hop + 1, true);
}

void Maodv::send_flip(NodeId to, NodeId old_leader, NodeId leader, std::uint32_t hop) {
  Packet p = make_control(Proto::Maodv, MsgKind::Activate, kActivateBytes);
  p.next_hop = to;
  p.maodv.origin = self_;
  p.maodv.group_seq = group_seq_;
  p.maodv.requester_leader = old_leader;
  p.maodv.on_tree = true;
  p.maodv.tree_hop = hop;
  p.maodv.leader = leader;
  p.maodv.mode = kFlip;
  send(std::move(p), SimTime{});
}

void Maodv::on_flip(const Packet& p, NodeId from) {
  const auto& m = p.maodv;
  // Only a node still rooted at the old leader follows the reversal. A second
  // reversal reaching an already re-rooted node detaches its branch instead.
  if (!on_tree_ || downstream_.find(from) == downstream_.end() || leader_id_ != m.requester_leader) {
    downstream_.erase(from);
    send_prune(from, kPruneUp);
    return;
  }
  NodeId old_up = upstream_;
  NodeId old_leader = leader_id_;
  if (leader_) {
    leader_ = false;
    net().cancel_timer(hello_timer_);
  }
  if (pending_) {
    net().cancel_timer(pending_->timer);
    pending_.reset();
  }
  downstream_.erase(from);
  upstream_ = from;
  upstream_heard_ = now();
  group_seq_ = std::max(group_seq_, m.group_seq);
  if (old_up != kNoNode) {
    downstream_[old_up] = now();
    send_flip(old_up, old_leader, m.leader, m.tree_hop + 1);
  }
  set_tree_state(m.leader, m.tree_hop + 1, true);
}

void Maodv::become_leader() {
  on_tree_ = true;
  leader_ = true;
  upstream_ = kNoNode;
  set_tree_state(self_, 0, true);
  net().cancel_timer(hello_timer_);
  send_hello();
}

void Maodv::leave_tree() {
  if (leader_) net().cancel_timer(hello_timer_);
  on_tree_ = false;
  leader_ = false;
  upstream_ = kNoNode;
  downstream_.clear();
  leader_id_ = kNoNode;
  hop_ = 0;
  if (pending_) {
    net().cancel_timer(pending_->timer);
    pending_.reset();
  }
}

void Maodv::lose_upstream() {
  upstream_ = kNoNode;
  if (pinned() || !downstream_.empty()) {
    start_join(false);
  } else {
    leave_tree();
  }
}

void Maodv::teardown_downstream() {
  for (const auto& [child, _] : downstream_) send_prune(child, kTeardown);
  downstream_.clear();
}

void Maodv::check_prune() {
  if (!on_tree_ || pinned()) return;
  if (leader_) {
    if (downstream_.size() == 1) {
      Packet p = make_control(Proto::Maodv, MsgKind::Activate, kActivateBytes);
      p.next_hop = downstream_.begin()->first;
      p.maodv.origin = self_;
      p.maodv.group_seq = group_seq_;
      p.maodv.mode = kHandoff;
      send(std::move(p), SimTime{});
      leave_tree();
    } else if (downstream_.empty()) {
      leave_tree();
    }
    return;
  }
  if (!downstream_.empty()) return;
  if (upstream_ != kNoNode) send_prune(upstream_, kPruneUp);
  leave_tree();
}

void Maodv::set_tree_state(NodeId leader, std::uint32_t hop, bool notify) {
  bool changed = leader != leader_id_ || hop != hop_;
  leader_id_ = leader;
  hop_ = hop;
  if (changed && notify && !downstream_.empty()) send_update();
}

void Maodv::send_update() {
  Packet p = make_control(Proto::Maodv, MsgKind::Activate, kActivateBytes);
  p.maodv.origin = self_;
  p.maodv.on_tree = true;
  p.maodv.tree_hop = hop_;
  p.maodv.leader = leader_id_;
  p.maodv.group_seq = group_seq_;
  p.maodv.mode = kUpdate;
  send(std::move(p), jitter(cfg_.max_jitter));
}

void Maodv::send_prune(NodeId to, PruneMode mode) {
  Packet p = make_control(Proto::Maodv, MsgKind::Prune, kPruneBytes);
  p.next_hop = to;
  p.maodv.origin = self_;
  p.maodv.mode = mode;
  send(std::move(p), SimTime{});
}

void Maodv::send_hello() {
  ++group_seq_;
  hello_seen_[self_] = group_seq_;
  Packet p = make_control(Proto::Maodv, MsgKind::GroupHello, kHelloBytes);
  auto& m = p.maodv;
  m.origin = self_;
  m.group_seq = group_seq_;
  m.ttl = cfg_.request_ttl;
  m.on_tree = true;
  m.tree_hop = 0;
  m.leader = self_;
  send(std::move(p), SimTime{});
  hello_timer_ = net().set_timer(self_, cfg_.hello_interval, kHelloTimer);
}

void Maodv::maintenance() {
  net().set_timer(self_, cfg_.hello_interval, kMaintenanceTimer);
  if (!on_tree_) return;
  SimTime limit = loss_timeout();
  for (auto it = downstream_.begin(); it != downstream_.end();) {
    if (now() - it->second > limit) {
      it = downstream_.erase(it);
    } else {
      ++it;
    }
  }
  if (!leader_ && upstream_ != kNoNode && now() - upstream_heard_ > limit) {
    lose_upstream();
    return;
  }
  check_prune();
}

void Maodv::on_timer(std::uint32_t timer, std::uint64_t arg) {
  switch (timer) {
    case kHelloTimer:
      if (leader_) send_hello();
      break;
    case kRequestTimer:
      if (pending_ && pending_->request_id == arg) finish_request();
      break;
    case kMaintenanceTimer:
      maintenance();
      break;
    default:
      break;
  }
}

void Maodv::receive(const PacketPtr& packet, NodeId from) {
  note_heard(from);
  if (packet->is_data()) {
    on_data(packet, from);
    return;
  }
  if (!packet->addressed_to(self_)) return;
  switch (packet->kind) {
    case MsgKind::RouteRequest: on_request(*packet, from); break;
    case MsgKind::RouteReply: on_reply(*packet, from); break;
    case MsgKind::Activate: on_activate(*packet, from); break;
    case MsgKind::GroupHello: on_hello(*packet, from); break;
    case MsgKind::Prune: on_prune(*packet, from); break;
    default: break;
  }
}

void Maodv::on_request(const Packet& p, NodeId from) {
  const auto& m = p.maodv;
  if (m.origin == self_) return;
  auto [it, fresh] = reverse_.try_emplace(m.origin);
  ReverseRoute& rev = it->second;
  if (!fresh) {
    if (m.request_id < rev.request_id) {
      net().drop(self_, p, "stale");
      return;
    }
    if (m.request_id == rev.request_id) return;
  }
  rev.request_id = m.request_id;
  rev.prev_hop = from;
  rev.toward_replier.clear();

  if (on_tree_) {
    if (eligible_for({m.requester_on_tree, m.requester_hop, m.requester_leader}) && upstream_ != from) {
      Packet r = make_control(Proto::Maodv, MsgKind::RouteReply, kReplyBytes);
      r.next_hop = from;
      auto& rm = r.maodv;
      rm.origin = m.origin;
      rm.replier = self_;
      rm.request_id = m.request_id;
      rm.group_seq = group_seq_;
      rm.hop_count = 1;
      rm.on_tree = true;
      rm.tree_hop = hop_;
      rm.leader = leader_id_;
      send(std::move(r), SimTime{});
    }
    return;  // tree nodes never extend the flood
  }
  if (m.ttl <= 1) {
    net().drop(self_, p, "ttl");
    return;
  }
  Packet copy = p;
  copy.maodv.hop_count += 1;
  copy.maodv.ttl -= 1;
  send(std::move(copy), jitter(cfg_.max_jitter));
}

void Maodv::on_reply(const Packet& p, NodeId from) {
  const auto& m = p.maodv;
  if (m.origin == self_) {
    if (pending_ && pending_->request_id == m.request_id)
      pending_->replies.push_back({m.replier, m.group_seq, m.hop_count, m.tree_hop, m.leader, from});
    return;
  }
  auto it = reverse_.find(m.origin);
  if (it == reverse_.end() || it->second.request_id != m.request_id) {
    net().drop(self_, p, "noroute");
    return;
  }
  it->second.toward_replier[m.replier] = from;
  Packet copy = p;
  copy.next_hop = it->second.prev_hop;
  copy.maodv.hop_count += 1;
  send(std::move(copy), SimTime{});
}

void Maodv::on_activate(const Packet& p, NodeId from) {
  const auto& m = p.maodv;
  if (m.mode == kUpdate) {
    if (on_tree_ && from == upstream_) {
      group_seq_ = std::max(group_seq_, m.group_seq);
      if (m.tree_hop + 1 > cfg_.request_ttl) {
        lose_upstream();  // hop count diverging: we sit on a loop
        return;
      }
      set_tree_state(m.leader, m.tree_hop + 1, true);
    }
    return;
  }
  if (m.mode == kFlip) {
    on_flip(p, from);
    return;
  }
  if (m.mode == kHandoff) {
    if (on_tree_ && from == upstream_) {
      group_seq_ = std::max(group_seq_, m.group_seq);
      if (pending_) {
        net().cancel_timer(pending_->timer);
        pending_.reset();
      }
      become_leader();
      check_prune();
    }
    return;
  }

  if (on_tree_) {
    bool accept = upstream_ != from &&
                  (m.replier == self_ || eligible_for({m.requester_on_tree, m.requester_hop, m.requester_leader}));
    if (accept) {
      downstream_[from] = now();
      if (m.tree_hop != hop_ + 1 || m.leader != leader_id_) send_update();
    } else {
      send_prune(from, kTeardown);
    }
    return;
  }

  auto it = reverse_.find(m.origin);
  NodeId next = kNoNode;
  if (it != reverse_.end()) {
    auto r = it->second.toward_replier.find(m.replier);
    if (r != it->second.toward_replier.end()) next = r->second;
  }
  if (next == kNoNode || m.tree_hop == 0) {
    send_prune(from, kTeardown);
    return;
  }
  on_tree_ = true;
  upstream_ = next;
  upstream_heard_ = now();
  downstream_[from] = now();
  group_seq_ = std::max(group_seq_, m.group_seq);
  leader_id_ = m.leader;
  hop_ = m.tree_hop - 1;
  Packet copy = p;
  copy.next_hop = next;
  copy.maodv.tree_hop = hop_;
  send(std::move(copy), SimTime{});
}

void Maodv::on_hello(const Packet& p, NodeId from) {
  const auto& m = p.maodv;
  if (on_tree_ && from == upstream_) {
    upstream_heard_ = now();
    if (!m.on_tree) {
      lose_upstream();
    } else if (m.tree_hop + 1 > cfg_.request_ttl) {
      lose_upstream();
    } else {
      if (m.leader == leader_id_) group_seq_ = std::max(group_seq_, m.group_seq);
      set_tree_state(m.leader, m.tree_hop + 1, true);
    }
  }
  // A neighbor on a tree with a higher leader: graft onto it directly.
  if (m.on_tree && m.leader != kNoNode && m.leader > leader_id_ && from != upstream_ && attached() &&
      !pending_ && m.tree_hop + 1 <= cfg_.request_ttl) {
    graft_and_flip(from, m);
  }
  if (m.origin == self_) return;
  auto [it, fresh] = hello_seen_.try_emplace(m.origin, m.group_seq);
  if (!fresh) {
    if (m.group_seq < it->second) {
      net().drop(self_, p, "stale");
      return;
    }
    if (m.group_seq == it->second) return;
    it->second = m.group_seq;
  }
  // A higher leader heard through nodes off our tree: look for its tree.
  if (!m.on_tree && m.origin > leader_id_ && attached() && !pending_ && now() >= next_merge_) {
    next_merge_ = now() + loss_timeout();
    start_join(true);
  }
  if (m.ttl <= 1) return;
  Packet copy = p;
  copy.maodv.ttl -= 1;
  copy.maodv.on_tree = on_tree_;
  copy.maodv.tree_hop = hop_;
  copy.maodv.leader = on_tree_ ? leader_id_ : kNoNode;
  send(std::move(copy), jitter(cfg_.max_jitter));
}

void Maodv::on_prune(const Packet& p, NodeId from) {
  if (p.maodv.mode == kPruneUp) {
    if (downstream_.erase(from) > 0) check_prune();
    return;
  }
  if (!on_tree_ || from != upstream_) return;
  upstream_ = kNoNode;
  if (pinned()) {
    start_join(false);
  } else {
    teardown_downstream();
    leave_tree();
  }
}

void Maodv::on_data(const PacketPtr& p, NodeId from) {
  if (!on_tree_) return;
  if (from != upstream_ && downstream_.find(from) == downstream_.end()) return;
  if (!data_seen_.insert(p->id)) return;
  if (member_) net().deliver(self_, *p);
  bool other = upstream_ != kNoNode && upstream_ != from;
  if (!other) {
    for (const auto& [child, _] : downstream_) {
      if (child != from) {
        other = true;
        break;
      }
    }
  }
  if (other) net().transmit(self_, p, jitter(cfg_.max_jitter));
}

void Maodv::send_data(const PacketPtr& data) {
  data_seen_.insert(data->id);
  if (member_) net().deliver(self_, *data);
  if (!on_tree_ || (upstream_ == kNoNode && downstream_.empty())) {
    net().drop(self_, *data, "noroute");
    return;
  }
  net().transmit(self_, data, SimTime{}, false);
}

}  // namespace vmcast
