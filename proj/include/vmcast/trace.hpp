#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vmcast/packet.hpp"
#include "vmcast/sim_time.hpp"

namespace vmcast {

enum class TraceOp : std::uint8_t { Send, Receive, Drop, Session };

std::string_view to_string(TraceOp op);

/// One line of a TR trace file:
///
///   <op> <time> <node> <proto> <kind> <pkt_id> <size> <group> <note>
///
/// op is s|r|d|sess, time has six decimals, pkt_id is "origin:seq" or "-"
/// for session records, note is "-" or a drop reason.
struct TraceRecord {
  TraceOp op = TraceOp::Send;
  SimTime time;
  NodeId node = 0;
  Proto proto = Proto::Data;
  MsgKind kind = MsgKind::Video;
  std::optional<PacketId> pkt;
  std::uint32_t size = 0;
  GroupId group = kDefaultGroup;
  std::string note = "-";

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string format_record(const TraceRecord& r);
/// Strict single-line parse. Throws MalformedRecord(line_no).
TraceRecord parse_record(std::string_view line, std::size_t line_no);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void write(const TraceRecord& r) = 0;
};

class TextTraceWriter final : public TraceSink {
 public:
  explicit TextTraceWriter(std::ostream& out) : out_(out) {}
  void write(const TraceRecord& r) override;

 private:
  std::ostream& out_;
  std::string buf_;
};

class VectorTraceSink final : public TraceSink {
 public:
  void write(const TraceRecord& r) override { records.push_back(r); }
  std::vector<TraceRecord> records;
};

class NullTraceSink final : public TraceSink {
 public:
  void write(const TraceRecord&) override {}
};

/// Streaming parser. Rejects a data receive whose packet id has no earlier send.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : in_(in) {}
  std::optional<TraceRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_ = 0;
  std::unordered_set<PacketId, PacketIdHash> sent_;
};

std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> parse_trace_file(const std::string& path);
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

}  // namespace vmcast
