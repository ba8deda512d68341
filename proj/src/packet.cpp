#include "vmcast/packet.hpp"

#include <array>
#include <utility>

namespace vmcast {

namespace {

constexpr std::array<std::pair<Proto, std::string_view>, 3> kProtoNames{{
    {Proto::Data, "data"},
    {Proto::Maodv, "maodv"},
    {Proto::Puma, "puma"},
}};

constexpr std::array<std::pair<MsgKind, std::string_view>, 9> kKindNames{{
    {MsgKind::Video, "video"},
    {MsgKind::RouteRequest, "route_request"},
    {MsgKind::RouteReply, "route_reply"},
    {MsgKind::Activate, "activate"},
    {MsgKind::GroupHello, "group_hello"},
    {MsgKind::Prune, "prune"},
    {MsgKind::Announcement, "announcement"},
    {MsgKind::Join, "join"},
    {MsgKind::Leave, "leave"},
}};

}  // namespace

std::string_view to_string(Proto p) {
  for (const auto& [v, name] : kProtoNames)
    if (v == p) return name;
  return "?";
}

std::string_view to_string(MsgKind k) {
  for (const auto& [v, name] : kKindNames)
    if (v == k) return name;
  return "?";
}

std::optional<Proto> parse_proto(std::string_view s) {
  for (const auto& [v, name] : kProtoNames)
    if (name == s) return v;
  return std::nullopt;
}

std::optional<MsgKind> parse_kind(std::string_view s) {
  for (const auto& [v, name] : kKindNames)
    if (name == s) return v;
  return std::nullopt;
}

}  // namespace vmcast
