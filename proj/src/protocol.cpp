#include "vmcast/protocol.hpp"

namespace vmcast {

bool DuplicateCache::insert(const PacketId& id) {
  auto& bits = seen_[id.origin];
  if (id.seq >= bits.size()) bits.resize(std::max<std::size_t>(id.seq + 1, bits.size() * 2), false);
  if (bits[id.seq]) return false;
  bits[id.seq] = true;
  return true;
}

bool DuplicateCache::contains(const PacketId& id) const {
  auto it = seen_.find(id.origin);
  return it != seen_.end() && id.seq < it->second.size() && it->second[id.seq];
}

SimTime MulticastProtocol::jitter(SimTime max) {
  if (max <= SimTime{}) return SimTime{};
  return SimTime::from_micros(net_.protocol_rng().between(0, max.micros()));
}

Packet MulticastProtocol::make_control(Proto proto, MsgKind kind, std::uint32_t size) {
  Packet p;
  p.proto = proto;
  p.kind = kind;
  p.id = {self_, ++control_seq_};
  p.size_bytes = size;
  p.created = now();
  return p;
}

}  // namespace vmcast
