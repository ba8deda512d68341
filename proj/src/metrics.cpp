#include "vmcast/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vmcast/error.hpp"

namespace vmcast {

namespace {
constexpr std::int64_t kOpen = std::numeric_limits<std::int64_t>::max();

bool is_control(const TraceRecord& r) { return r.proto == Proto::Maodv || r.proto == Proto::Puma; }
}  // namespace

void MetricsAccumulator::add(const TraceRecord& r) {
  const std::int64_t t = r.time.micros();
  switch (r.op) {
    case TraceOp::Send:
      if (is_control(r)) {
        ++counts_.control_sent;
      } else if (r.pkt && r.node == r.pkt->origin && created_.emplace(*r.pkt, t).second) {
        emission_times_.push_back(t);
        ++counts_.data_sent;
      }
      break;
    case TraceOp::Receive: {
      if (is_control(r) || !r.pkt) break;
      auto it = created_.find(*r.pkt);
      if (it == created_.end()) break;  // the reader rejects these; vectors may still contain them
      if (!seen_.insert({r.node, *r.pkt}).second) break;
      ++counts_.data_received;
      counts_.received_bytes += r.size;
      counts_.total_delay_us += t - it->second;
      reception_emissions_.emplace_back(r.node, it->second);
      break;
    }
    case TraceOp::Session: {
      auto& list = membership_[r.node];
      if (r.kind == MsgKind::Join) {
        if (list.empty() || list.back().leave_us != kOpen) list.push_back({t, kOpen});
      } else if (r.kind == MsgKind::Leave) {
        if (!list.empty() && list.back().leave_us == kOpen) list.back().leave_us = t;
      }
      break;
    }
    case TraceOp::Drop:
      break;
  }
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport rep;
  MetricsCounts c = counts_;

  std::vector<std::int64_t> times = emission_times_;
  std::sort(times.begin(), times.end());
  for (const auto& [node, list] : membership_) {
    for (const auto& iv : list) {
      auto lo = std::lower_bound(times.begin(), times.end(), iv.join_us);
      auto hi = std::lower_bound(times.begin(), times.end(), iv.leave_us);
      c.expected += static_cast<std::uint64_t>(hi - lo);
    }
  }
  for (const auto& [node, emitted] : reception_emissions_) {
    auto m = membership_.find(node);
    if (m == membership_.end()) continue;
    for (const auto& iv : m->second) {
      if (emitted >= iv.join_us && emitted < iv.leave_us) {
        ++c.counted_received;
        break;
      }
    }
  }
  if (c.counted_received > c.expected) throw std::logic_error("PDR numerator exceeds expected receptions");

  if (c.expected > 0) rep.pdr = static_cast<double>(c.counted_received) / static_cast<double>(c.expected);
  if (c.data_sent > 0) rep.avg_eed_s = static_cast<double>(c.total_delay_us) / 1e6 / static_cast<double>(c.data_sent);
  if (c.data_received > 0) {
    rep.avg_eed_per_received_s = static_cast<double>(c.total_delay_us) / 1e6 / static_cast<double>(c.data_received);
    rep.nrl = static_cast<double>(c.control_sent) / static_cast<double>(c.data_received);
  }
  if (!times.empty()) {
    rep.first_send_us = times.front();
    rep.last_send_us = times.back();
    std::int64_t window = times.back() - times.front();
    if (window > 0) {
      rep.throughput_kbps =
          static_cast<double>(c.received_bytes) / (static_cast<double>(window) / 1e6) * 8.0 / 1024.0;
    }
  }
  rep.counts = c;
  return rep;
}

MetricsReport analyze(const std::vector<TraceRecord>& records) {
  MetricsAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.report();
}

MetricsReport analyze_stream(std::istream& in) {
  TraceReader reader(in);
  MetricsAccumulator acc;
  while (auto r = reader.next()) acc.add(*r);
  return acc.report();
}

MetricsReport analyze_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trace '" + path + "'");
  return analyze_stream(in);
}

double compute_pdr(const std::vector<TraceRecord>& records) {
  auto rep = analyze(records);
  if (!rep.pdr) throw Error(ErrorCode::PdrUndefined, "no packets were expected by any listener");
  return *rep.pdr;
}

double compute_avg_eed(const std::vector<TraceRecord>& records, bool per_received) {
  auto rep = analyze(records);
  auto v = per_received ? rep.avg_eed_per_received_s : rep.avg_eed_s;
  if (!v) throw Error(ErrorCode::EedUndefined, per_received ? "no data packets received" : "no data packets sent");
  return *v;
}

double compute_throughput(const std::vector<TraceRecord>& records) {
  auto rep = analyze(records);
  if (!rep.throughput_kbps) throw Error(ErrorCode::ThroughputUndefined, "zero-length transmission window");
  return *rep.throughput_kbps;
}

double compute_nrl(const std::vector<TraceRecord>& records) {
  auto rep = analyze(records);
  if (!rep.nrl) throw Error(ErrorCode::NrlUndefined, "no data packets received");
  return *rep.nrl;
}

std::string format_csv_row(const ReportRow& row) {
  auto num = [](const std::optional<double>& v, const char* fmt) {
    if (!v) return std::string("nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  return row.scenario + "," + row.protocol + "," + std::to_string(row.listeners) + "," +
         std::to_string(row.sessions) + "," + num(row.metrics.pdr, "%.6f") + "," +
         num(row.metrics.avg_eed_s, "%.6f") + "," + num(row.metrics.throughput_kbps, "%.3f") + "," +
         num(row.metrics.nrl, "%.6f");
}

}  // namespace vmcast
