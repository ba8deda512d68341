#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>

#include "vmcast/sim_time.hpp"

namespace vmcast {

using NodeId = std::uint32_t;
using GroupId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
/// next_hop value for link-layer broadcast.
inline constexpr NodeId kBroadcast = kNoNode;
inline constexpr GroupId kDefaultGroup = 1;

enum class Proto : std::uint8_t { Data, Maodv, Puma };

enum class MsgKind : std::uint8_t {
  Video,
  RouteRequest,
  RouteReply,
  Activate,
  GroupHello,
  Prune,
  Announcement,
  Join,
  Leave,
};

std::string_view to_string(Proto p);
std::string_view to_string(MsgKind k);
std::optional<Proto> parse_proto(std::string_view s);
std::optional<MsgKind> parse_kind(std::string_view s);

struct PacketId {
  NodeId origin = kNoNode;
  std::uint64_t seq = 0;

  friend bool operator==(const PacketId&, const PacketId&) = default;
  friend auto operator<=>(const PacketId&, const PacketId&) = default;
};

struct PacketIdHash {
  std::size_t operator()(const PacketId& id) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.origin) << 40) ^ id.seq);
  }
};

/// MAODV control fields. Which fields are meaningful depends on the kind.
struct MaodvFields {
  NodeId origin = kNoNode;   // requester (request/reply/activate) or leader (hello)
  NodeId replier = kNoNode;  // reply/activate
  std::uint32_t request_id = 0;
  std::uint32_t group_seq = 0;
  std::uint32_t hop_count = 0;
  std::uint32_t ttl = 0;
  // Requester's tree context, carried by requests and activations.
  bool requester_on_tree = false;
  std::uint32_t requester_hop = 0;
  NodeId requester_leader = kNoNode;
  // Sender's tree state: hello relays, replies, activations and updates.
  bool on_tree = false;
  std::uint32_t tree_hop = 0;
  NodeId leader = kNoNode;
  // Activate: 0 graft, 1 leader handoff, 2 tree update, 3 path reversal toward a new root.
  // Prune: 0 upward, 1 downward teardown.
  std::uint8_t mode = 0;
};

/// PUMA multicast announcement.
struct AnnouncementFields {
  NodeId core = kNoNode;
  std::uint32_t seq = 0;
  std::uint32_t distance = 0;
  NodeId parent = kNoNode;
  bool mesh_member = false;
};

struct Packet {
  Proto proto = Proto::Data;
  MsgKind kind = MsgKind::Video;
  PacketId id;
  std::uint32_t size_bytes = 0;
  GroupId group = kDefaultGroup;
  SimTime created;
  NodeId next_hop = kBroadcast;
  MaodvFields maodv;
  AnnouncementFields announcement;

  bool is_data() const { return proto == Proto::Data; }
  bool addressed_to(NodeId n) const { return next_hop == kBroadcast || next_hop == n; }
};

using PacketPtr = std::shared_ptr<const Packet>;

}  // namespace vmcast
