#include "vmcast/puma.hpp"

namespace vmcast {

namespace {
constexpr std::uint32_t kAnnouncementBytes = 32;
constexpr std::uint32_t kInfinity = 0xffffffffu;
}  // namespace

Puma::Puma(NodeId self, NodeServices& net, PumaConfig cfg) : MulticastProtocol(self, net), cfg_(cfg) {}

void Puma::start() {
  net().set_timer(self_, jitter(cfg_.announce_period / 6), kCheckTimer);
  if (source_ && cfg_.source_is_member) wait_for_core();
}

bool Puma::core_alive() const {
  if (is_core_) return true;
  return core_ != kNoNode && now() - core_heard_ <= core_timeout();
}

std::optional<std::pair<NodeId, Puma::Entry>> Puma::parent() const {
  std::optional<std::pair<NodeId, Entry>> best;
  for (const auto& [n, e] : conn_) {
    if (!fresh(e)) continue;
    if (!best) {
      best.emplace(n, e);
      continue;
    }
    const Entry& b = best->second;
    // Map iteration is by ascending id, so ties keep the lower id.
    if (e.seq > b.seq || (e.seq == b.seq && e.distance < b.distance)) best.emplace(n, e);
  }
  return best;
}

bool Puma::mesh_member() const {
  if (wants_group() || is_core_) return true;
  for (const auto& [n, e] : conn_) {
    if (e.parent == self_ && e.mesh && fresh(e)) return true;
  }
  return false;
}

void Puma::wait_for_core() {
  if (core_alive()) {
    note_mesh_change();
    return;
  }
  net().cancel_timer(join_timer_);
  join_timer_ = net().set_timer(self_, cfg_.announce_period, kJoinWaitTimer);
}

void Puma::join_group() {
  if (receiver_) return;
  receiver_ = true;
  wait_for_core();
}

void Puma::leave_group() {
  if (!receiver_) return;
  receiver_ = false;
  if (is_core_ && !wants_group()) {
    // Stop originating; the remaining receivers elect a successor once the
    // announcements dry up.
    is_core_ = false;
    net().cancel_timer(announce_timer_);
  }
  if (!wants_group()) net().cancel_timer(join_timer_);
  note_mesh_change();
}

void Puma::become_core() {
  net().cancel_timer(join_timer_);
  if (core_ != self_) conn_.clear();
  is_core_ = true;
  core_ = self_;
  net().cancel_timer(announce_timer_);
  originate();
}

void Puma::switch_core(NodeId core) {
  if (is_core_) {
    is_core_ = false;
    net().cancel_timer(announce_timer_);
  }
  net().cancel_timer(join_timer_);
  core_ = core;
  conn_.clear();
  last_seq_ = 0;
  relayed_seq_ = 0;
  extra_seq_ = 0;
}

void Puma::originate() {
  ++own_seq_;
  last_seq_ = own_seq_;
  relayed_seq_ = own_seq_;
  core_heard_ = now();
  send_announcement(SimTime{});
  announce_timer_ = net().set_timer(self_, cfg_.announce_period, kAnnounceTimer);
}

void Puma::send_announcement(SimTime delay) {
  Packet p = make_control(Proto::Puma, MsgKind::Announcement, kAnnouncementBytes);
  auto& a = p.announcement;
  a.core = core_;
  a.seq = last_seq_;
  if (is_core_) {
    a.distance = 0;
    a.parent = self_;
  } else if (auto best = parent()) {
    a.distance = best->second.distance == kInfinity ? kInfinity : best->second.distance + 1;
    a.parent = best->first;
  } else {
    a.distance = kInfinity;
    a.parent = kNoNode;
  }
  a.mesh_member = mesh_member();
  announced_mesh_ = a.mesh_member;
  send(std::move(p), delay);
}

void Puma::note_mesh_change() {
  if (!cfg_.announce_on_mesh_change || core_ == kNoNode) return;
  if (relayed_seq_ == 0 || relayed_seq_ != last_seq_ || extra_seq_ == last_seq_) return;
  if (mesh_member() == announced_mesh_) return;
  extra_seq_ = last_seq_;
  send_announcement(jitter(cfg_.max_jitter));
}

void Puma::check() {
  net().set_timer(self_, cfg_.announce_period / 6, kCheckTimer);
  for (auto it = conn_.begin(); it != conn_.end();) {
    if (!fresh(it->second)) {
      it = conn_.erase(it);
    } else {
      ++it;
    }
  }
  if (!is_core_ && core_ != kNoNode && wants_group() && !core_alive()) {
    become_core();
    return;
  }
  note_mesh_change();
}

void Puma::on_timer(std::uint32_t timer, std::uint64_t) {
  switch (timer) {
    case kAnnounceTimer:
      if (is_core_) originate();
      break;
    case kRelayTimer:
      relay_scheduled_ = false;
      if (relayed_seq_ != last_seq_ && !is_core_) {
        relayed_seq_ = last_seq_;
        send_announcement(SimTime{});
      }
      break;
    case kJoinWaitTimer:
      if (wants_group() && !core_alive()) become_core();
      break;
    case kCheckTimer:
      check();
      break;
    default:
      break;
  }
}

void Puma::receive(const PacketPtr& packet, NodeId from) {
  if (packet->is_data()) {
    on_data(packet, from);
  } else if (packet->kind == MsgKind::Announcement) {
    on_announcement(*packet, from);
  }
}

void Puma::on_announcement(const Packet& p, NodeId from) {
  const auto& a = p.announcement;
  if (a.core != core_) {
    bool silent = core_ == kNoNode || (!is_core_ && now() - core_heard_ >= core_timeout());
    if (a.core > core_ || core_ == kNoNode || silent) {
      switch_core(a.core);
    } else {
      net().drop(self_, p, "stale");
      return;
    }
  }
  if (a.seq < last_seq_) {
    net().drop(self_, p, "stale");
    return;
  }
  conn_[from] = Entry{a.seq, a.distance, a.parent, a.mesh_member, now()};
  if (a.seq > last_seq_ && !is_core_) {
    last_seq_ = a.seq;
    core_heard_ = now();
    if (!relay_scheduled_) {
      relay_scheduled_ = true;
      net().set_timer(self_, jitter(cfg_.max_jitter), kRelayTimer);
    }
    return;
  }
  note_mesh_change();
}

void Puma::on_data(const PacketPtr& p, NodeId from) {
  if (data_seen_.contains(p->id)) return;
  if (mesh_member()) {
    data_seen_.insert(p->id);
    if (receiver_) net().deliver(self_, *p);
    net().transmit(self_, p, jitter(cfg_.max_jitter));
    return;
  }
  auto it = conn_.find(from);
  if (it == conn_.end() || !fresh(it->second) || it->second.parent != self_ || it->second.mesh) return;
  data_seen_.insert(p->id);
  net().transmit(self_, p, jitter(cfg_.max_jitter));
}

void Puma::send_data(const PacketPtr& data) {
  data_seen_.insert(data->id);
  if (receiver_) net().deliver(self_, *data);
  if (!mesh_member() && !parent()) {
    net().drop(self_, *data, "noroute");
    return;
  }
  net().transmit(self_, data, SimTime{}, false);
}

}  // namespace vmcast
