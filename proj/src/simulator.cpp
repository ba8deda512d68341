#include "vmcast/simulator.hpp"

#include <limits>

#include "vmcast/error.hpp"
#include "vmcast/maodv.hpp"
#include "vmcast/puma.hpp"

namespace vmcast {

namespace {
constexpr std::uint64_t kBudgetCheckMask = (1u << 16) - 1;
}

NodeId pick_source(std::span<const Position> positions, const HighwayGeometry& geo) {
  if (positions.empty()) throw Error(ErrorCode::EmptyFleet, "no vehicles to pick a source from");
  const Position center{geo.length_m / 2.0, geo.width_m / 2.0};
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double d = distance(positions[i], center);
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(i);
    }
  }
  return best;
}

Simulation::Simulation(const ScenarioConfig& cfg, TraceSink& trace, const SessionPlan* plan)
    : cfg_(cfg),
      trace_(trace),
      duration_(SimTime::from_seconds(cfg.duration_s)),
      mobility_rng_(cfg.seed, StreamLabel::Mobility),
      traffic_rng_(cfg.seed, StreamLabel::Traffic),
      session_rng_(cfg.seed, StreamLabel::Sessions),
      protocol_rng_(cfg.seed, StreamLabel::Protocol),
      radio_rng_(cfg.seed, StreamLabel::Radio) {
  const auto geo = HighwayGeometry::for_area(cfg.area_length_m, cfg.area_width_m);
  mobility_.emplace(init_fleet(cfg.nodes, mobility_rng_, geo), geo, SimTime::from_seconds(cfg.mobility_tick_s));
  positions_.emplace(mobility_->positions());
  topology_ = &*positions_;
  radio_.emplace(cfg.radio, *topology_, radio_rng_);
  create_agents(cfg.nodes);

  if (cfg.sources > 0) {
    NodeId s = pick_source(mobility_->positions(), geo);
    SimTime end = cfg.traffic_end_s < 0 ? duration_ : SimTime::from_seconds(cfg.traffic_end_s);
    add_source(s, SimTime::from_seconds(cfg.traffic_start_s), end);
  }

  if (plan) {
    for (NodeId n : plan->pool) {
      if (n >= cfg.nodes) throw Error(ErrorCode::InvalidPlan, "session plan names node " + std::to_string(n) +
                                                                  " outside the fleet");
    }
    plan_ = *plan;
  } else if (cfg.listeners > 0) {
    std::vector<NodeId> candidates;
    for (NodeId n = 0; n < cfg.nodes; ++n) {
      if (!source_node_ || n != *source_node_ || cfg.listeners == cfg.nodes) candidates.push_back(n);
    }
    plan_ = build_session_plan(cfg.listeners, cfg.sessions, duration_, candidates, session_rng_);
  }
  for (const auto& [node, list] : plan_.sessions) {
    for (const auto& s : list) {
      schedule_join(node, s.join);
      schedule_leave(node, s.leave);
    }
  }

  Event tick;
  tick.kind = EventKind::MobilityTick;
  tick.fire_at = mobility_->tick_interval();
  queue_.schedule(std::move(tick));
}

Simulation::Simulation(const ScenarioConfig& cfg, const Topology& topology, TraceSink& trace)
    : cfg_(cfg),
      trace_(trace),
      duration_(SimTime::from_seconds(cfg.duration_s)),
      mobility_rng_(cfg.seed, StreamLabel::Mobility),
      traffic_rng_(cfg.seed, StreamLabel::Traffic),
      session_rng_(cfg.seed, StreamLabel::Sessions),
      protocol_rng_(cfg.seed, StreamLabel::Protocol),
      radio_rng_(cfg.seed, StreamLabel::Radio) {
  topology_ = &topology;
  radio_.emplace(cfg.radio, *topology_, radio_rng_);
  create_agents(topology.node_count());
}

Simulation::~Simulation() = default;

void Simulation::create_agents(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::EmptyFleet, "scenario has no nodes");
  agents_.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    if (cfg_.protocol == ProtocolKind::Maodv) {
      agents_.push_back(std::make_unique<Maodv>(i, *this, cfg_.maodv));
    } else {
      agents_.push_back(std::make_unique<Puma>(i, *this, cfg_.puma));
    }
  }
}

void Simulation::set_topology(const Topology& topology) {
  topology_ = &topology;
  radio_->set_topology(topology);
}

void Simulation::schedule_join(NodeId node, SimTime at) {
  Event ev;
  ev.kind = EventKind::SessionJoin;
  ev.fire_at = at;
  ev.node = node;
  queue_.schedule(std::move(ev));
}

void Simulation::schedule_leave(NodeId node, SimTime at) {
  Event ev;
  ev.kind = EventKind::SessionLeave;
  ev.fire_at = at;
  ev.node = node;
  queue_.schedule(std::move(ev));
}

void Simulation::add_source(NodeId node, SimTime start, SimTime end) {
  agents_.at(node)->set_source(true);
  source_node_ = node;
  sources_.emplace_back(node, kDefaultGroup, cfg_.traffic, start, end);
  Event ev;
  ev.kind = EventKind::TrafficEmit;
  ev.fire_at = start;
  ev.node = node;
  ev.arg = sources_.size() - 1;
  queue_.schedule(std::move(ev));
}

void Simulation::start_agents() {
  started_ = true;
  wall_start_ = std::chrono::steady_clock::now();
  if (mobility_dump_ && mobility_) mobility_->dump(*mobility_dump_);
  for (auto& a : agents_) a->start();
}

void Simulation::run_until(SimTime t) {
  if (!started_) start_agents();
  while (auto ev = queue_.pop_until(t)) {
    dispatch(*ev);
    if ((++processed_ & kBudgetCheckMask) == 0) check_budget();
  }
}

void Simulation::check_budget() {
  if (cfg_.budget_s <= 0) return;
  std::chrono::duration<double> spent = std::chrono::steady_clock::now() - wall_start_;
  if (spent.count() > cfg_.budget_s)
    throw Error(ErrorCode::BudgetExceeded, "wall-clock budget of " + std::to_string(cfg_.budget_s) +
                                               " s exceeded at t=" + format_seconds(now()));
}

void Simulation::dispatch(const Event& ev) {
  switch (ev.kind) {
    case EventKind::RadioDeliver: {
      const Packet& p = *ev.packet;
      if (ev.timer_id != 0) {
        trace_packet(TraceOp::Drop, ev.node, p, "loss");
      } else if (ev.arg != 0 && radio_->collided(ev.arg)) {
        trace_packet(TraceOp::Drop, ev.node, p, "collision");
      } else {
        agents_[ev.node]->receive(ev.packet, ev.from);
      }
      break;
    }
    case EventKind::RadioTransmit:
      radio_send(ev.node, ev.packet, ev.arg != 0);
      break;
    case EventKind::Timer:
      agents_[ev.node]->on_timer(ev.timer_id, ev.arg);
      break;
    case EventKind::MobilityTick: {
      mobility_->tick_to(now());
      if (mobility_dump_) mobility_->dump(*mobility_dump_);
      Event next;
      next.kind = EventKind::MobilityTick;
      next.fire_at = now() + mobility_->tick_interval();
      queue_.schedule(std::move(next));
      break;
    }
    case EventKind::SessionJoin:
      if (agents_[ev.node]->is_member())
        throw Error(ErrorCode::InvalidPlan, "node " + std::to_string(ev.node) + " joins while already a member");
      trace_session(ev.node, true);
      agents_[ev.node]->join_group();
      break;
    case EventKind::SessionLeave:
      if (!agents_[ev.node]->is_member())
        throw Error(ErrorCode::InvalidPlan, "node " + std::to_string(ev.node) + " leaves without being a member");
      trace_session(ev.node, false);
      agents_[ev.node]->leave_group();
      break;
    case EventKind::TrafficEmit:
      emit_traffic(static_cast<std::size_t>(ev.arg));
      break;
  }
}

void Simulation::transmit(NodeId self, PacketPtr packet, SimTime delay, bool trace_send) {
  if (delay <= SimTime{}) {
    radio_send(self, packet, trace_send);
    return;
  }
  Event ev;
  ev.kind = EventKind::RadioTransmit;
  ev.fire_at = now() + delay;
  ev.node = self;
  ev.arg = trace_send ? 1 : 0;
  ev.packet = std::move(packet);
  queue_.schedule(std::move(ev));
}

void Simulation::radio_send(NodeId self, const PacketPtr& packet, bool trace_send) {
  if (trace_send) trace_packet(TraceOp::Send, self, *packet);
  if (tap_) tap_(self, *packet, now());
  for (const auto& d : radio_->broadcast(self, *packet, now())) {
    Event ev;
    ev.kind = EventKind::RadioDeliver;
    ev.fire_at = d.at;
    ev.node = d.receiver;
    ev.from = self;
    ev.timer_id = d.lost ? 1 : 0;
    ev.arg = d.ticket;
    ev.packet = packet;
    queue_.schedule(std::move(ev));
  }
}

EventHandle Simulation::set_timer(NodeId self, SimTime delay, std::uint32_t timer, std::uint64_t arg) {
  Event ev;
  ev.kind = EventKind::Timer;
  ev.fire_at = now() + delay;
  ev.node = self;
  ev.timer_id = timer;
  ev.arg = arg;
  return queue_.schedule(std::move(ev));
}

void Simulation::cancel_timer(EventHandle h) {
  if (h.valid()) queue_.cancel(h);
}

void Simulation::deliver(NodeId self, const Packet& data) { trace_packet(TraceOp::Receive, self, data); }

void Simulation::drop(NodeId self, const Packet& packet, std::string_view reason) {
  trace_packet(TraceOp::Drop, self, packet, reason);
}

void Simulation::emit_traffic(std::size_t index) {
  VbrSource& src = sources_.at(index);
  if (!src.active_at(now())) return;
  auto e = src.emit(now(), traffic_rng_);
  auto packet = std::make_shared<const Packet>(std::move(e.packet));
  trace_packet(TraceOp::Send, src.node(), *packet);
  agents_[src.node()]->send_data(packet);
  if (e.next < src.end()) {
    Event ev;
    ev.kind = EventKind::TrafficEmit;
    ev.fire_at = e.next;
    ev.node = src.node();
    ev.arg = index;
    queue_.schedule(std::move(ev));
  }
}

void Simulation::trace_packet(TraceOp op, NodeId node, const Packet& p, std::string_view note) {
  TraceRecord r;
  r.op = op;
  r.time = now();
  r.node = node;
  r.proto = p.proto;
  r.kind = p.kind;
  r.pkt = p.id;
  r.size = p.size_bytes;
  r.group = p.group;
  r.note = std::string(note);
  trace_.write(r);
}

void Simulation::trace_session(NodeId node, bool join) {
  TraceRecord r;
  r.op = TraceOp::Session;
  r.time = now();
  r.node = node;
  r.proto = Proto::Data;
  r.kind = join ? MsgKind::Join : MsgKind::Leave;
  r.size = 0;
  trace_.write(r);
}

RunArtifacts run_scenario(const ScenarioConfig& cfg, TraceSink& trace, const SessionPlan* plan,
                          std::ostream* mobility_dump) {
  validate_or_throw(cfg);
  Simulation sim(cfg, trace, plan);
  sim.set_mobility_dump(mobility_dump);
  sim.run();
  return {sim.plan(), sim.source(), sim.events_processed()};
}

}  // namespace vmcast
