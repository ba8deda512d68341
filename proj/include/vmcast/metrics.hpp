#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vmcast/trace.hpp"

namespace vmcast {

struct MetricsCounts {
  std::uint64_t data_sent = 0;       // distinct packets emitted at their origin
  std::uint64_t data_received = 0;   // distinct (listener, packet) receptions
  std::uint64_t counted_received = 0;// of those, emitted inside the listener's membership
  std::uint64_t expected = 0;        // sum over listeners of emissions during membership
  std::uint64_t control_sent = 0;    // maodv/puma send records
  std::uint64_t received_bytes = 0;
  std::int64_t total_delay_us = 0;
};

/// The four QoS numbers. A metric is empty when its denominator is zero.
struct MetricsReport {
  std::optional<double> pdr;
  std::optional<double> avg_eed_s;               // total delay / packets sent
  std::optional<double> avg_eed_per_received_s;  // total delay / receptions
  std::optional<double> throughput_kbps;
  std::optional<double> nrl;
  MetricsCounts counts;
  /// Origin send window used by the throughput formula, in microseconds.
  std::int64_t first_send_us = 0;
  std::int64_t last_send_us = 0;
};

/// Single-pass accumulator. Feed records in file order, then call report().
class MetricsAccumulator {
 public:
  void add(const TraceRecord& r);
  MetricsReport report() const;

 private:
  struct Key {
    NodeId node;
    PacketId pkt;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return PacketIdHash{}(k.pkt) * 0x9e3779b97f4a7c15ull ^ k.node;
    }
  };
  struct Interval {
    std::int64_t join_us;
    std::int64_t leave_us;  // INT64_MAX while open
  };

  std::unordered_map<PacketId, std::int64_t, PacketIdHash> created_;
  std::vector<std::int64_t> emission_times_;
  std::unordered_set<Key, KeyHash> seen_;
  std::vector<std::pair<NodeId, std::int64_t>> reception_emissions_;
  std::unordered_map<NodeId, std::vector<Interval>> membership_;
  MetricsCounts counts_;
};

MetricsReport analyze(const std::vector<TraceRecord>& records);
/// Streams a trace; throws MalformedRecord on any bad line.
MetricsReport analyze_stream(std::istream& in);
MetricsReport analyze_file(const std::string& path);

/// Throw the matching *Undefined error when the denominator is zero.
double compute_pdr(const std::vector<TraceRecord>& records);
double compute_avg_eed(const std::vector<TraceRecord>& records, bool per_received = false);
double compute_throughput(const std::vector<TraceRecord>& records);
double compute_nrl(const std::vector<TraceRecord>& records);

struct ReportRow {
  std::string scenario;
  std::string protocol;
  std::size_t listeners = 0;
  std::size_t sessions = 0;
  MetricsReport metrics;
};

inline constexpr const char* kCsvHeader = "scenario,protocol,L,S,pdr,avg_eed_s,throughput_kbps,nrl";
/// Undefined metrics are written as "nan".
std::string format_csv_row(const ReportRow& row);

}  // namespace vmcast
