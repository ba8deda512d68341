#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "vmcast/protocol.hpp"

namespace vmcast {

struct MaodvConfig {
  SimTime hello_interval = SimTime::from_seconds(1.0);
  std::uint32_t allowed_hello_loss = 3;
  std::uint32_t request_retries = 3;
  /// Reply collection window of the first attempt; doubles per retry.
  SimTime request_wait = SimTime::from_millis(100);
  std::uint32_t request_ttl = 32;
  /// Rebroadcasts (floods and data) are delayed uniformly in [0, max_jitter].
  SimTime max_jitter = SimTime::from_millis(10);
};

/// Tree-based multicast agent.
///
/// A node joins by flooding a join request; attached tree nodes answer with
/// replies that travel the reverse path, and the requester activates the
/// best branch. The group leader floods a hello every interval; tree nodes
/// learn their hop count and leader from their upstream. A node that stops
/// hearing its upstream re-issues the request; if that fails it either
/// becomes leader of its partition (member or source) or tears down its
/// subtree. Data moves only between tree neighbors.
class Maodv final : public MulticastProtocol {
 public:
  enum Timer : std::uint32_t { kHelloTimer = 1, kRequestTimer, kMaintenanceTimer };
  enum ActivateMode : std::uint8_t { kGraft = 0, kHandoff = 1, kUpdate = 2, kFlip = 3 };
  enum PruneMode : std::uint8_t { kPruneUp = 0, kTeardown = 1 };

  Maodv(NodeId self, NodeServices& net, MaodvConfig cfg);

  Proto proto() const override { return Proto::Maodv; }
  void start() override;
  void join_group() override;
  void leave_group() override;
  bool is_member() const override { return member_; }
  void set_source(bool source) override;
  void send_data(const PacketPtr& data) override;
  void receive(const PacketPtr& packet, NodeId from) override;
  void on_timer(std::uint32_t timer, std::uint64_t arg) override;

  bool on_tree() const { return on_tree_; }
  bool is_leader() const { return leader_; }
  std::optional<NodeId> upstream() const {
    return upstream_ == kNoNode ? std::nullopt : std::optional<NodeId>(upstream_);
  }
  std::vector<NodeId> downstream() const;
  NodeId leader_id() const { return leader_id_; }
  std::uint32_t hop_to_leader() const { return hop_; }
  std::uint32_t group_seq() const { return group_seq_; }
  bool join_pending() const { return pending_.has_value(); }

 private:
  struct Reply {
    NodeId replier;
    std::uint32_t group_seq;
    std::uint32_t path_hops;
    std::uint32_t tree_hop;
    NodeId leader;
    NodeId via;
  };
  struct PendingJoin {
    std::uint32_t request_id = 0;
    std::uint32_t attempt = 0;
    bool merge = false;
    EventHandle timer;
    std::vector<Reply> replies;
  };
  struct ReverseRoute {
    std::uint32_t request_id = 0;
    NodeId prev_hop = kNoNode;
    std::map<NodeId, NodeId> toward_replier;  // replier -> next hop
  };
  struct RequestContext {
    bool requester_on_tree = false;
    std::uint32_t hop = 0;
    NodeId leader = kNoNode;
  };

  bool pinned() const { return member_ || source_; }
  SimTime loss_timeout() const { return cfg_.hello_interval * cfg_.allowed_hello_loss; }
  bool attached() const;
  bool eligible_for(const RequestContext& ctx) const;
  static const Reply& best_reply(const std::vector<Reply>& replies);

  void note_heard(NodeId from);
  void start_join(bool merge);
  void send_request();
  void finish_request();
  void activate(const Reply& best);
  void graft_and_flip(NodeId to, const MaodvFields& state);
  void send_flip(NodeId to, NodeId old_leader, NodeId leader, std::uint32_t hop);
  void on_flip(const Packet& p, NodeId from);
  void become_leader();
  void leave_tree();
  void lose_upstream();
  void teardown_downstream();
  void check_prune();
  void set_tree_state(NodeId leader, std::uint32_t hop, bool notify);
  void send_update();

  void on_request(const Packet& p, NodeId from);
  void on_reply(const Packet& p, NodeId from);
  void on_activate(const Packet& p, NodeId from);
  void on_hello(const Packet& p, NodeId from);
  void on_prune(const Packet& p, NodeId from);
  void on_data(const PacketPtr& p, NodeId from);
  void send_prune(NodeId to, PruneMode mode);
  void send_hello();
  void maintenance();

  MaodvConfig cfg_;
  bool member_ = false;
  bool source_ = false;
  bool started_ = false;
  bool on_tree_ = false;
  bool leader_ = false;
  NodeId upstream_ = kNoNode;
  SimTime upstream_heard_;
  SimTime next_merge_;
  std::map<NodeId, SimTime> downstream_;
  NodeId leader_id_ = kNoNode;
  std::uint32_t hop_ = 0;
  std::uint32_t group_seq_ = 0;

  std::unordered_map<NodeId, std::uint32_t> hello_seen_;
  std::unordered_map<NodeId, ReverseRoute> reverse_;
  std::optional<PendingJoin> pending_;
  std::uint32_t next_request_id_ = 0;
  EventHandle hello_timer_;
  DuplicateCache data_seen_;
};

}  // namespace vmcast
