#include "vmcast/batch.hpp"

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vmcast/error.hpp"
#include "vmcast/simulator.hpp"

namespace vmcast {

namespace {

class MeasuringSink final : public TraceSink {
 public:
  explicit MeasuringSink(std::ostream* out) {
    if (out) writer_.emplace(*out);
  }
  void write(const TraceRecord& r) override {
    if (writer_) writer_->write(r);
    acc_.add(r);
  }
  MetricsReport report() const { return acc_.report(); }

 private:
  std::optional<TextTraceWriter> writer_;
  MetricsAccumulator acc_;
};

std::optional<double> parse_metric(std::string_view s, std::size_t line) {
  if (s == "nan") return std::nullopt;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw MalformedRecord(line, "bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw MalformedRecord(line, "bad count '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<ScenarioConfig> paper_matrix(std::uint64_t seed, const ScenarioConfig& base) {
  std::vector<ScenarioConfig> out;
  for (std::size_t L : {10, 20, 40, 60}) {
    for (std::size_t S : {5, 10, 20}) {
      for (ProtocolKind p : {ProtocolKind::Maodv, ProtocolKind::Puma}) {
        ScenarioConfig c = base;
        c.protocol = p;
        c.listeners = L;
        c.sessions = S;
        c.seed = seed;
        out.push_back(c);
      }
    }
  }
  return out;
}

std::vector<ScenarioConfig> expand_repetitions(const std::vector<ScenarioConfig>& scenarios, std::size_t reps) {
  std::vector<ScenarioConfig> out;
  for (std::size_t r = 0; r < reps; ++r) {
    for (ScenarioConfig c : scenarios) {
      c.seed += r;
      out.push_back(c);
    }
  }
  return out;
}

ReportRow run_and_measure(const ScenarioConfig& cfg, const std::string& trace_path) {
  std::ofstream file;
  if (!trace_path.empty()) {
    file.open(trace_path);
    if (!file) throw Error(ErrorCode::Io, "cannot write trace '" + trace_path + "'");
  }
  MeasuringSink sink(trace_path.empty() ? nullptr : &file);
  run_scenario(cfg, sink);
  if (file.is_open()) {
    file.flush();
    if (!file) throw Error(ErrorCode::Io, "write failed for '" + trace_path + "'");
  }
  return {scenario_id(cfg), std::string(to_string(cfg.protocol)), cfg.listeners, cfg.sessions, sink.report()};
}

MatrixOutcome run_matrix(const std::vector<ScenarioConfig>& scenarios, const MatrixOptions& opts) {
  std::set<std::string> ids;
  for (const auto& c : scenarios) {
    if (!ids.insert(scenario_id(c)).second)
      throw Error(ErrorCode::InvalidScenario, "duplicate scenario id '" + scenario_id(c) + "'");
  }
  if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);

  std::vector<std::optional<ReportRow>> rows(scenarios.size());
  std::vector<std::optional<std::string>> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const auto& cfg = scenarios[i];
      const std::string id = scenario_id(cfg);
      std::string trace_path;
      if (!opts.out_dir.empty() && opts.keep_traces)
        trace_path = (std::filesystem::path(opts.out_dir) / (id + ".tr")).string();
      try {
        rows[i] = run_and_measure(cfg, trace_path);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        opts.progress(errors[i] ? id + ": FAILED " + *errors[i] : format_csv_row(*rows[i]));
      }
    }
  };
  std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.workers, scenarios.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  MatrixOutcome out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (rows[i]) out.rows.push_back(std::move(*rows[i]));
    if (errors[i]) out.failures.push_back({scenario_id(scenarios[i]), *errors[i]});
  }
  if (!opts.out_dir.empty()) {
    auto path = std::filesystem::path(opts.out_dir) / "report.csv";
    std::ofstream csv(path);
    if (!csv) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    csv << format_csv(out.rows);
  }
  return out;
}

std::string format_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += format_csv_row(r) + "\n";
  return out;
}

std::vector<ReportRow> parse_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw MalformedRecord(1, "unexpected CSV header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 8) throw MalformedRecord(line_no, "expected 8 columns");
    ReportRow r;
    r.scenario = std::string(f[0]);
    r.protocol = std::string(f[1]);
    if (r.protocol != "maodv" && r.protocol != "puma") throw MalformedRecord(line_no, "unknown protocol");
    r.listeners = parse_count(f[2], line_no);
    r.sessions = parse_count(f[3], line_no);
    r.metrics.pdr = parse_metric(f[4], line_no);
    r.metrics.avg_eed_s = parse_metric(f[5], line_no);
    r.metrics.throughput_kbps = parse_metric(f[6], line_no);
    r.metrics.nrl = parse_metric(f[7], line_no);
    rows.push_back(std::move(r));
  }
  if (line_no == 0) throw MalformedRecord(1, "empty CSV");
  return rows;
}

}  // namespace vmcast
