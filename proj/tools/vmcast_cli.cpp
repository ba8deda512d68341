#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vmcast/vmcast.h"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

struct ConfigDeleter {
  void operator()(vmc_config* c) const { vmc_config_destroy(c); }
};
struct ReportDeleter {
  void operator()(vmc_report* r) const { vmc_report_destroy(r); }
};
struct StringDeleter {
  void operator()(char* s) const { vmc_string_free(s); }
};
using ConfigPtr = std::unique_ptr<vmc_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<vmc_report, ReportDeleter>;
using CString = std::unique_ptr<char, StringDeleter>;

struct ApiError {
  vmc_status status;
  std::string message;
};

void check(vmc_status s) {
  if (s != VMC_OK) throw ApiError{s, vmc_last_error()};
}

std::string default_out_dir() {
  const char* env = std::getenv("VMCAST_OUT_DIR");
  return env && *env ? env : "vmcast-out";
}

/// Scenario flags shared by run and matrix. Unset flags leave the config alone.
struct ScenarioFlags {
  std::vector<std::string> sets;
  std::optional<std::string> protocol;
  std::optional<std::size_t> listeners;
  std::optional<std::size_t> sessions;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::size_t> nodes;

  void attach(CLI::App* app, bool with_seed) {
    app->add_option("--set", sets, "Override a config value, key=value (dotted keys)");
    app->add_option("--protocol", protocol, "maodv or puma");
    app->add_option("-L,--listeners", listeners, "Simultaneous listeners");
    app->add_option("-S,--sessions", sessions, "Sessions per listener node");
    app->add_option("--duration", duration, "Simulated seconds");
    app->add_option("--nodes", nodes, "Vehicle count");
    if (with_seed) app->add_option("--seed", seed, "Random seed");
  }

  void apply(vmc_config* cfg) const {
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ApiError{VMC_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'"};
      check(vmc_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    if (protocol) check(vmc_config_set(cfg, "protocol", protocol->c_str()));
    if (listeners) check(vmc_config_set(cfg, "listeners", std::to_string(*listeners).c_str()));
    if (sessions) check(vmc_config_set(cfg, "sessions", std::to_string(*sessions).c_str()));
    if (seed) check(vmc_config_set(cfg, "seed", std::to_string(*seed).c_str()));
    if (nodes) check(vmc_config_set(cfg, "nodes", std::to_string(*nodes).c_str()));
    if (duration) {
      std::ostringstream s;
      s.precision(17);
      s << *duration;
      check(vmc_config_set(cfg, "duration", s.str().c_str()));
    }
  }
};

ConfigPtr load_or_default(const std::string& path) {
  vmc_config* raw = nullptr;
  if (path.empty()) {
    check(vmc_config_create(&raw));
  } else {
    check(vmc_config_load(path.c_str(), &raw));
  }
  return ConfigPtr(raw);
}

void require_valid(const vmc_config* cfg) {
  char* errs = nullptr;
  vmc_status s = vmc_config_validate(cfg, &errs);
  CString holder(errs);
  if (s != VMC_OK) throw ApiError{s, errs ? errs : vmc_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ApiError{VMC_ERR_IO, "cannot open '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_metrics(const vmc_report* rep) {
  struct Item {
    vmc_metric m;
    const char* name;
    const char* unit;
  };
  const Item items[] = {{VMC_METRIC_PDR, "pdr", ""},
                        {VMC_METRIC_AVG_EED, "avg_eed", " s"},
                        {VMC_METRIC_AVG_EED_PER_RECEIVED, "avg_eed_per_received", " s"},
                        {VMC_METRIC_THROUGHPUT, "throughput", " Kbps"},
                        {VMC_METRIC_NRL, "nrl", ""}};
  for (const auto& it : items) {
    double v = 0;
    if (vmc_report_metric(rep, it.m, &v) == VMC_OK) {
      std::printf("%-22s %.6f%s\n", it.name, v, it.unit);
    } else {
      std::printf("%-22s undefined (%s)\n", it.name, vmc_last_error());
    }
  }
  vmc_counts c{};
  check(vmc_report_counts(rep, &c));
  std::printf("%-22s %llu\n%-22s %llu\n%-22s %llu\n%-22s %llu\n", "data_sent",
              static_cast<unsigned long long>(c.data_sent), "data_received",
              static_cast<unsigned long long>(c.data_received), "expected", static_cast<unsigned long long>(c.expected),
              "control_sent", static_cast<unsigned long long>(c.control_sent));
}

void progress_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vmcast: vehicular multicast simulator (tree and mesh protocols)"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one scenario and report its metrics");
  std::string run_config, run_out, run_trace, run_mobility, run_plan_in, run_plan_out;
  bool run_no_trace = false;
  ScenarioFlags run_flags;
  run->add_option("-c,--config", run_config, "Scenario config (JSON)");
  run_flags.attach(run, true);
  run->add_option("-o,--out", run_out, "Output directory (default $VMCAST_OUT_DIR or ./vmcast-out)");
  run->add_option("--trace", run_trace, "Trace file path (default <out>/<scenario>.tr)");
  run->add_flag("--no-trace", run_no_trace, "Do not write a trace file");
  run->add_option("--mobility-dump", run_mobility, "Write vehicle positions per tick");
  run->add_option("--plan-in", run_plan_in, "Replay a session plan");
  run->add_option("--plan-out", run_plan_out, "Write the session plan used");

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Run a batch of scenarios and write report.csv");
  std::vector<std::string> matrix_configs;
  std::string matrix_out;
  bool paper = false, no_traces = false, matrix_trends = false;
  std::uint64_t matrix_seed = 1;
  std::size_t reps = 1, workers = 1;
  ScenarioFlags matrix_flags;
  matrix->add_option("-c,--config", matrix_configs, "Scenario configs; with --paper-matrix the first is the base");
  matrix->add_flag("--paper-matrix", paper, "Run the 24-scenario listener/session grid for both protocols");
  matrix->add_option("--seed", matrix_seed, "Base seed");
  matrix->add_option("--reps", reps, "Repetitions; seeds seed, seed+1, ...")->check(CLI::PositiveNumber);
  matrix->add_option("-j,--workers", workers, "Parallel scenarios")->check(CLI::PositiveNumber);
  matrix->add_option("-o,--out", matrix_out, "Output directory (default $VMCAST_OUT_DIR or ./vmcast-out)");
  matrix->add_flag("--no-traces", no_traces, "Keep only report.csv");
  matrix->add_flag("--trends", matrix_trends, "Evaluate the protocol trends afterwards");
  matrix_flags.attach(matrix, false);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Compute the QoS metrics of a trace file");
  std::string analyze_trace;
  bool analyze_csv = false;
  analyze->add_option("trace", analyze_trace, "TR trace file")->required();
  analyze->add_flag("--csv", analyze_csv, "Print a report CSV row instead");

  // trends
  auto* trends = app.add_subcommand("trends", "Check protocol comparison trends over a report CSV");
  std::string trends_csv;
  trends->add_option("csv", trends_csv, "report.csv")->required();

  // config
  auto* config = app.add_subcommand("config", "Print the effective scenario config as JSON");
  std::string config_path;
  ScenarioFlags config_flags;
  config->add_option("-c,--config", config_path, "Scenario config (JSON)");
  config_flags.attach(config, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_or_default(run_config);
      run_flags.apply(cfg.get());
      require_valid(cfg.get());
      char* id_raw = nullptr;
      check(vmc_config_scenario_id(cfg.get(), &id_raw));
      CString id(id_raw);
      std::string out_dir = run_out.empty() ? default_out_dir() : run_out;
      std::string trace = run_trace;
      if (trace.empty() && !run_no_trace) {
        std::filesystem::create_directories(out_dir);
        trace = (std::filesystem::path(out_dir) / (std::string(id.get()) + ".tr")).string();
      }
      vmc_run_options opts{};
      opts.trace_path = run_no_trace ? nullptr : trace.c_str();
      opts.mobility_path = run_mobility.empty() ? nullptr : run_mobility.c_str();
      opts.plan_in_path = run_plan_in.empty() ? nullptr : run_plan_in.c_str();
      opts.plan_out_path = run_plan_out.empty() ? nullptr : run_plan_out.c_str();
      vmc_report* raw = nullptr;
      check(vmc_run(cfg.get(), &opts, &raw));
      ReportPtr rep(raw);
      char* row_raw = nullptr;
      check(vmc_report_csv_row(rep.get(), &row_raw));
      CString row(row_raw);
      std::printf("%s\n%s\n", vmc_csv_header(), row.get());
      if (opts.trace_path) std::fprintf(stderr, "trace: %s\n", opts.trace_path);
      return 0;
    }

    if (*matrix) {
      std::vector<ConfigPtr> owned;
      if (matrix_configs.empty()) owned.push_back(load_or_default(""));
      for (const auto& p : matrix_configs) owned.push_back(load_or_default(p));
      for (auto& c : owned) matrix_flags.apply(c.get());
      if (!paper && matrix->count("--seed")) {
        for (auto& c : owned) check(vmc_config_set(c.get(), "seed", std::to_string(matrix_seed).c_str()));
      }
      std::vector<const vmc_config*> list;
      for (auto& c : owned) list.push_back(c.get());
      std::string out_dir = matrix_out.empty() ? default_out_dir() : matrix_out;
      vmc_matrix_options mo{};
      mo.out_dir = out_dir.c_str();
      mo.paper_matrix = paper ? 1 : 0;
      mo.seed = matrix_seed;
      mo.reps = reps;
      mo.workers = workers;
      mo.keep_traces = no_traces ? 0 : 1;
      mo.progress = progress_line;
      char* csv_raw = nullptr;
      std::size_t failed = 0;
      check(vmc_matrix_run(list.data(), list.size(), &mo, &csv_raw, &failed));
      CString csv(csv_raw);
      std::fprintf(stderr, "report: %s\n", (std::filesystem::path(out_dir) / "report.csv").string().c_str());
      if (failed > 0) std::fprintf(stderr, "%zu scenario(s) failed:\n%s", failed, vmc_last_error());
      int code = failed > 0 ? kExitFailed : 0;
      if (matrix_trends) {
        char* table_raw = nullptr;
        int ok = 0;
        check(vmc_trends(csv.get(), &table_raw, &ok));
        CString table(table_raw);
        std::printf("%s", table.get());
        if (!ok) code = kExitFailed;
      }
      return code;
    }

    if (*analyze) {
      vmc_report* raw = nullptr;
      check(vmc_analyze(analyze_trace.c_str(), &raw));
      ReportPtr rep(raw);
      if (analyze_csv) {
        char* row_raw = nullptr;
        check(vmc_report_csv_row(rep.get(), &row_raw));
        CString row(row_raw);
        std::printf("%s\n%s\n", vmc_csv_header(), row.get());
      } else {
        print_metrics(rep.get());
      }
      return 0;
    }

    if (*trends) {
      std::string text = read_file(trends_csv);
      char* table_raw = nullptr;
      int ok = 0;
      check(vmc_trends(text.c_str(), &table_raw, &ok));
      CString table(table_raw);
      std::printf("%s", table.get());
      return ok ? 0 : kExitFailed;
    }

    if (*config) {
      auto cfg = load_or_default(config_path);
      config_flags.apply(cfg.get());
      char* json_raw = nullptr;
      check(vmc_config_to_json(cfg.get(), &json_raw));
      CString json(json_raw);
      std::printf("%s", json.get());
      char* errs = nullptr;
      vmc_status s = vmc_config_validate(cfg.get(), &errs);
      CString holder(errs);
      if (s != VMC_OK) {
        std::fprintf(stderr, "invalid:\n%s", errs ? errs : "");
        return kExitFailed;
      }
      return 0;
    }
  } catch (const ApiError& e) {
    std::fprintf(stderr, "error (%s): %s\n", vmc_status_name(e.status), e.message.c_str());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return 0;
}
