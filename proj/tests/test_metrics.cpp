#include <chrono>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vmcast/error.hpp"
#include "vmcast/metrics.hpp"
#include "vmcast/rng.hpp"
#include "vmcast/trace.hpp"
#include "metrics_oracle.hpp"

using namespace vmcast;
using namespace vmcast::testing;

namespace {
SimTime ms(std::int64_t v) { return SimTime::from_millis(v); }
}  // namespace

TEST_CASE("oracle equivalence on 200 random mini-traces") {
  RngStream rng(2024, StreamLabel::Traffic);
  for (int iter = 0; iter < 200; ++iter) {
    auto trace = random_trace(rng);
    REQUIRE(trace.size() <= 1000);
    Oracle o(trace);

    // Through the text format, as the analyzer reads real files.
    std::stringstream text;
    write_trace(text, trace);
    auto rep = analyze_stream(text);
    const auto& c = rep.counts;
    INFO("iteration " << iter);
    CHECK(c.data_sent == o.sent);
    CHECK(c.data_received == o.received);
    CHECK(c.counted_received == o.counted);
    CHECK(c.expected == o.expected);
    CHECK(c.control_sent == o.control);
    CHECK(c.received_bytes == o.bytes);
    CHECK(c.total_delay_us == o.delay_us);

    if (o.expected > 0) {
      REQUIRE(rep.pdr);
      CHECK(close(*rep.pdr, static_cast<double>(o.counted) / static_cast<double>(o.expected)));
      CHECK(*rep.pdr <= 1.0);
    } else {
      CHECK_FALSE(rep.pdr);
      CHECK_THROWS_AS(compute_pdr(trace), Error);
    }
    if (o.sent > 0) {
      REQUIRE(rep.avg_eed_s);
      CHECK(close(*rep.avg_eed_s, static_cast<double>(o.delay_us) / 1e6 / static_cast<double>(o.sent)));
    } else {
      CHECK_FALSE(rep.avg_eed_s);
    }
    if (o.received > 0) {
      REQUIRE(rep.nrl);
      CHECK(close(*rep.nrl, static_cast<double>(o.control) / static_cast<double>(o.received)));
    } else {
      CHECK_FALSE(rep.nrl);
    }
    if (o.last > o.first) {
      REQUIRE(rep.throughput_kbps);
      double expect = static_cast<double>(o.bytes) / (static_cast<double>(o.last - o.first) / 1e6) * 8.0 / 1024.0;
      CHECK(close(*rep.throughput_kbps, expect));
    } else {
      CHECK_FALSE(rep.throughput_kbps);
    }
    // Pure function of the trace.
    auto again = analyze(trace);
    CHECK(again.counts.expected == c.expected);
    CHECK(again.counts.total_delay_us == c.total_delay_us);
  }
}

TEST_CASE("PDR: one listener, 100 emitted, 85 received") {
  std::vector<TraceRecord> t{sess(SimTime{}, 1, true)};
  for (std::uint64_t i = 0; i < 100; ++i) {
    t.push_back(send(ms(10 * static_cast<std::int64_t>(i) + 1), 0, {0, i}));
    if (i < 85) t.push_back(recv(ms(10 * static_cast<std::int64_t>(i) + 5), 1, {0, i}));
  }
  CHECK(compute_pdr(t) == doctest::Approx(0.85));
}

TEST_CASE("PDR counts duplicates once and ignores emissions outside membership") {
  std::vector<TraceRecord> t{send(ms(1), 0, {0, 0}), sess(ms(2), 1, true), send(ms(3), 0, {0, 1}),
                             recv(ms(4), 1, {0, 0}), recv(ms(4), 1, {0, 1}), recv(ms(5), 1, {0, 1}),
                             sess(ms(6), 1, false), send(ms(7), 0, {0, 2})};
  auto rep = analyze(t);
  CHECK(rep.counts.expected == 1);
  CHECK(rep.counts.counted_received == 1);
  CHECK(*rep.pdr == 1.0);
  CHECK(rep.counts.data_received == 2);
}

TEST_CASE("PDR undefined when no listener was ever active") {
  std::vector<TraceRecord> t{send(ms(1), 0, {0, 0})};
  CHECK_THROWS_AS(compute_pdr(t), Error);
  try {
    compute_pdr(t);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PdrUndefined);
  }
}

TEST_CASE("average delay uses the sent-packet denominator") {
  SUBCASE("single packet") {
    std::vector<TraceRecord> t{send(ms(0), 0, {0, 0}), recv(ms(50), 1, {0, 0})};
    CHECK(compute_avg_eed(t) == doctest::Approx(0.050));
  }
  SUBCASE("two packets, 40 and 60 ms") {
    std::vector<TraceRecord> t{send(ms(0), 0, {0, 0}), send(ms(10), 0, {0, 1}), recv(ms(40), 1, {0, 0}),
                               recv(ms(70), 1, {0, 1})};
    CHECK(compute_avg_eed(t) == doctest::Approx(0.050));
  }
  SUBCASE("two packets, one received after 60 ms") {
    std::vector<TraceRecord> t{send(ms(0), 0, {0, 0}), send(ms(10), 0, {0, 1}), recv(ms(70), 1, {0, 1})};
    CHECK(compute_avg_eed(t) == doctest::Approx(0.030));
    CHECK(compute_avg_eed(t, true) == doctest::Approx(0.060));
  }
  SUBCASE("nothing sent") {
    std::vector<TraceRecord> t{sess(ms(0), 1, true)};
    CHECK_THROWS_AS(compute_avg_eed(t), Error);
  }
}

TEST_CASE("throughput counts received bytes over the origin send window") {
  std::vector<TraceRecord> t;
  for (std::uint64_t i = 0; i < 1000; ++i) t.push_back(send(ms(10 * static_cast<std::int64_t>(i)), 0, {0, i}));
  t.push_back(send(ms(10000), 0, {0, 1000}));
  for (std::uint64_t i = 0; i < 1000; ++i) t.push_back(recv(ms(10001), 1, {0, i}));
  std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  // 1000 x 512 bytes over 10 s.
  CHECK(compute_throughput(t) == doctest::Approx(400.0));

  std::vector<TraceRecord> none{send(ms(0), 0, {0, 0}), send(ms(1000), 0, {0, 1})};
  CHECK(compute_throughput(none) == 0.0);
  std::vector<TraceRecord> instant{send(ms(0), 0, {0, 0})};
  CHECK_THROWS_AS(compute_throughput(instant), Error);
}

TEST_CASE("NRL is control sends per distinct reception") {
  std::vector<TraceRecord> t;
  for (std::uint64_t i = 0; i < 100; ++i) t.push_back(control(ms(0), 3, i));
  for (std::uint64_t i = 0; i < 100; ++i) t.push_back(send(ms(1), 0, {0, i}));
  for (std::uint64_t i = 0; i < 100; ++i)
    for (NodeId n = 1; n <= 4; ++n) t.push_back(recv(ms(2), n, {0, i}));
  CHECK(compute_nrl(t) == doctest::Approx(0.25));

  std::vector<TraceRecord> quiet{send(ms(0), 0, {0, 0}), recv(ms(1), 1, {0, 0})};
  CHECK(compute_nrl(quiet) == 0.0);
  std::vector<TraceRecord> deaf{send(ms(0), 0, {0, 0})};
  CHECK_THROWS_AS(compute_nrl(deaf), Error);
}

TEST_CASE("trace text round trip") {
  std::vector<TraceRecord> t{sess(ms(0), 4, true), send(SimTime::from_micros(12000350), 0, {0, 7}, 300),
                             control(ms(20), 2, 9), recv(ms(30), 4, {0, 7}, 300)};
  TraceRecord drop = send(ms(40), 5, {0, 7}, 300);
  drop.op = TraceOp::Drop;
  drop.note = "noroute";
  t.push_back(drop);
  std::stringstream s;
  write_trace(s, t);
  CHECK(s.str().find("s 12.000350 0 data video 0:7 300 1 -") != std::string::npos);
  auto back = parse_trace(s);
  CHECK(back == t);
}

TEST_CASE("parser rejects malformed input with the line number") {
  SUBCASE("truncated final line") {
    std::stringstream s("s 0.000000 0 data video 0:0 512 1 -\nr 0.001000 1 data vid");
    try {
      parse_trace(s);
      FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("receive before send") {
    std::stringstream s("r 0.001000 1 data video 0:0 512 1 -\n");
    CHECK_THROWS_AS(parse_trace(s), MalformedRecord);
  }
  SUBCASE("bad time") {
    std::stringstream s("s 0.0001 0 data video 0:0 512 1 -\n");
    CHECK_THROWS_AS(parse_trace(s), MalformedRecord);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(parse_trace_file("/nonexistent/trace.tr"), Error); }
}

TEST_CASE("one million records parse in under two seconds") {
  std::stringstream s;
  std::vector<TraceRecord> batch;
  for (std::uint64_t i = 0; i < 500000; ++i) {
    batch.push_back(send(SimTime::from_micros(static_cast<std::int64_t>(i) * 100), 0, {0, i}));
    batch.push_back(recv(SimTime::from_micros(static_cast<std::int64_t>(i) * 100 + 50), 1, {0, i}));
  }
  write_trace(s, batch);
  auto start = std::chrono::steady_clock::now();
  TraceReader reader(s);
  std::size_t n = 0;
  while (reader.next()) ++n;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(n == 1000000);
  MESSAGE("parsed 10^6 records in " << secs << " s");
  CHECK(secs < 2.0);
}

TEST_CASE("CSV row formatting") {
  ReportRow row{"puma-L10-S5-seed7", "puma", 10, 5, {}};
  row.metrics.pdr = 0.5;
  row.metrics.avg_eed_s = 0.05;
  row.metrics.throughput_kbps = 400;
  CHECK(format_csv_row(row) == "puma-L10-S5-seed7,puma,10,5,0.500000,0.050000,400.000,nan");
}
