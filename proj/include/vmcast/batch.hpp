#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vmcast/config.hpp"
#include "vmcast/metrics.hpp"

namespace vmcast {

/// The 24-scenario grid: listeners {10, 20, 40, 60} x sessions {5, 10, 20}
/// x {maodv, puma}, all sharing `seed` so each protocol pair sees the same
/// mobility and session plan.
std::vector<ScenarioConfig> paper_matrix(std::uint64_t seed, const ScenarioConfig& base = {});

/// Repeats every scenario `reps` times with seeds seed, seed+1, ...
std::vector<ScenarioConfig> expand_repetitions(const std::vector<ScenarioConfig>& scenarios, std::size_t reps);

struct MatrixOptions {
  /// Directory for traces and report.csv. Empty keeps nothing on disk.
  std::string out_dir;
  bool keep_traces = true;
  std::size_t workers = 1;
  std::function<void(const std::string& line)> progress;
};

struct MatrixFailure {
  std::string scenario;
  std::string message;
};

struct MatrixOutcome {
  std::vector<ReportRow> rows;  // input order, failed scenarios omitted
  std::vector<MatrixFailure> failures;
};

/// Runs every scenario (ids must be unique) and writes report.csv when an
/// output directory is given. A failing scenario is recorded and the batch
/// continues.
MatrixOutcome run_matrix(const std::vector<ScenarioConfig>& scenarios, const MatrixOptions& opts);

/// Runs one scenario and analyzes its trace on the fly. When `trace_path`
/// is non-empty the trace is also written there.
ReportRow run_and_measure(const ScenarioConfig& cfg, const std::string& trace_path);

std::string format_csv(const std::vector<ReportRow>& rows);
/// Reads rows back; undefined metrics become empty optionals.
std::vector<ReportRow> parse_csv(std::istream& in);

}  // namespace vmcast
