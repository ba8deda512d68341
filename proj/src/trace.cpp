#include "vmcast/trace.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "vmcast/error.hpp"

namespace vmcast {

namespace {

void append_uint(std::string& s, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, end);
}

void append_time(std::string& s, SimTime t) {
  const std::int64_t us = t.micros();
  append_uint(s, static_cast<std::uint64_t>(us / 1000000));
  s.push_back('.');
  char frac[7];
  std::int64_t f = us % 1000000;
  for (int i = 5; i >= 0; --i) {
    frac[i] = static_cast<char>('0' + f % 10);
    f /= 10;
  }
  s.append(frac, 6);
}

template <class T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_time(std::string_view s, SimTime& out) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || s.size() - dot - 1 != 6) return false;
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  if (!parse_uint(s.substr(0, dot), whole) || !parse_uint(s.substr(dot + 1), frac)) return false;
  out = SimTime::from_micros(whole * 1000000 + frac);
  return true;
}

std::optional<TraceOp> parse_op(std::string_view s) {
  if (s == "s") return TraceOp::Send;
  if (s == "r") return TraceOp::Receive;
  if (s == "d") return TraceOp::Drop;
  if (s == "sess") return TraceOp::Session;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(TraceOp op) {
  switch (op) {
    case TraceOp::Send: return "s";
    case TraceOp::Receive: return "r";
    case TraceOp::Drop: return "d";
    case TraceOp::Session: return "sess";
  }
  return "?";
}

std::string format_record(const TraceRecord& r) {
  std::string s;
  s.reserve(64);
  s.append(to_string(r.op));
  s.push_back(' ');
  append_time(s, r.time);
  s.push_back(' ');
  append_uint(s, r.node);
  s.push_back(' ');
  s.append(to_string(r.proto));
  s.push_back(' ');
  s.append(to_string(r.kind));
  s.push_back(' ');
  if (r.pkt) {
    append_uint(s, r.pkt->origin);
    s.push_back(':');
    append_uint(s, r.pkt->seq);
  } else {
    s.push_back('-');
  }
  s.push_back(' ');
  append_uint(s, r.size);
  s.push_back(' ');
  append_uint(s, r.group);
  s.push_back(' ');
  s.append(r.note.empty() ? std::string_view("-") : std::string_view(r.note));
  return s;
}

TraceRecord parse_record(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, 9> f;
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto sp = line.find(' ', pos);
    const auto end = sp == std::string_view::npos ? line.size() : sp;
    if (n == f.size()) throw MalformedRecord(line_no, "too many fields");
    f[n++] = line.substr(pos, end - pos);
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  if (n != f.size()) throw MalformedRecord(line_no, "expected 9 fields, got " + std::to_string(n));

  TraceRecord r;
  auto op = parse_op(f[0]);
  if (!op) throw MalformedRecord(line_no, "unknown op '" + std::string(f[0]) + "'");
  r.op = *op;
  if (!parse_time(f[1], r.time)) throw MalformedRecord(line_no, "bad time '" + std::string(f[1]) + "'");
  if (!parse_uint(f[2], r.node)) throw MalformedRecord(line_no, "bad node");
  auto proto = parse_proto(f[3]);
  if (!proto) throw MalformedRecord(line_no, "unknown proto '" + std::string(f[3]) + "'");
  r.proto = *proto;
  auto kind = parse_kind(f[4]);
  if (!kind) throw MalformedRecord(line_no, "unknown kind '" + std::string(f[4]) + "'");
  r.kind = *kind;
  if (f[5] == "-") {
    if (r.op != TraceOp::Session) throw MalformedRecord(line_no, "missing packet id");
  } else {
    const auto colon = f[5].find(':');
    PacketId id;
    if (colon == std::string_view::npos || !parse_uint(f[5].substr(0, colon), id.origin) ||
        !parse_uint(f[5].substr(colon + 1), id.seq))
      throw MalformedRecord(line_no, "bad packet id '" + std::string(f[5]) + "'");
    r.pkt = id;
  }
  if (!parse_uint(f[6], r.size)) throw MalformedRecord(line_no, "bad size");
  if (!parse_uint(f[7], r.group)) throw MalformedRecord(line_no, "bad group");
  if (f[8].empty()) throw MalformedRecord(line_no, "empty note");
  r.note = std::string(f[8]);
  return r;
}

void TextTraceWriter::write(const TraceRecord& r) {
  buf_ = format_record(r);
  buf_.push_back('\n');
  out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
}

std::optional<TraceRecord> TraceReader::next() {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (buf_.empty()) continue;
    TraceRecord r = parse_record(buf_, line_);
    if (r.proto == Proto::Data && r.pkt) {
      if (r.op == TraceOp::Send) {
        sent_.insert(*r.pkt);
      } else if (r.op == TraceOp::Receive && !sent_.contains(*r.pkt)) {
        throw MalformedRecord(line_, "receive before any send of the packet");
      }
    }
    return r;
  }
  return std::nullopt;
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  TraceReader reader(in);
  std::vector<TraceRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trace file " + path);
  return parse_trace(in);
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  TextTraceWriter w(out);
  for (const auto& r : records) w.write(r);
}

}  // namespace vmcast
