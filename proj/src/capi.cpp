#include "vmcast/vmcast.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <new>
#include <set>
#include <sstream>

#include "vmcast/batch.hpp"
#include "vmcast/config.hpp"
#include "vmcast/error.hpp"
#include "vmcast/metrics.hpp"
#include "vmcast/simulator.hpp"
#include "vmcast/trends.hpp"

struct vmc_config {
  vmcast::ScenarioConfig cfg;
};

struct vmc_report {
  vmcast::ReportRow row;
};

namespace {

thread_local std::string g_last_error;

vmc_status status_of(vmcast::ErrorCode c) {
  using vmcast::ErrorCode;
  switch (c) {
    case ErrorCode::PastEvent: return VMC_ERR_PAST_EVENT;
    case ErrorCode::EmptyFleet: return VMC_ERR_EMPTY_FLEET;
    case ErrorCode::InvalidScenario: return VMC_ERR_INVALID_SCENARIO;
    case ErrorCode::InvalidPlan: return VMC_ERR_INVALID_PLAN;
    case ErrorCode::MalformedRecord: return VMC_ERR_MALFORMED_RECORD;
    case ErrorCode::PdrUndefined: return VMC_ERR_PDR_UNDEFINED;
    case ErrorCode::EedUndefined: return VMC_ERR_EED_UNDEFINED;
    case ErrorCode::ThroughputUndefined: return VMC_ERR_THROUGHPUT_UNDEFINED;
    case ErrorCode::NrlUndefined: return VMC_ERR_NRL_UNDEFINED;
    case ErrorCode::IncompleteMatrix: return VMC_ERR_INCOMPLETE_MATRIX;
    case ErrorCode::Io: return VMC_ERR_IO;
    case ErrorCode::BudgetExceeded: return VMC_ERR_BUDGET_EXCEEDED;
  }
  return VMC_ERR_INTERNAL;
}

vmc_status fail(vmc_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
vmc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const vmcast::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VMC_ERR_INTERNAL, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(VMC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(VMC_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define VMC_REQUIRE(cond, what) \
  if (!(cond)) return fail(VMC_ERR_INVALID_ARGUMENT, what)

class RunSink final : public vmcast::TraceSink {
 public:
  explicit RunSink(std::ostream* out) {
    if (out) writer_.emplace(*out);
  }
  void write(const vmcast::TraceRecord& r) override {
    if (writer_) writer_->write(r);
    acc_.add(r);
  }
  vmcast::MetricsReport report() const { return acc_.report(); }

 private:
  std::optional<vmcast::TextTraceWriter> writer_;
  vmcast::MetricsAccumulator acc_;
};

}  // namespace

extern "C" {

const char* vmc_version(void) { return "1.0.0"; }

const char* vmc_status_name(vmc_status status) {
  switch (status) {
    case VMC_OK: return "ok";
    case VMC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VMC_ERR_PAST_EVENT: return "past event";
    case VMC_ERR_EMPTY_FLEET: return "empty fleet";
    case VMC_ERR_INVALID_SCENARIO: return "invalid scenario";
    case VMC_ERR_INVALID_PLAN: return "invalid session plan";
    case VMC_ERR_MALFORMED_RECORD: return "malformed record";
    case VMC_ERR_PDR_UNDEFINED: return "PDR undefined";
    case VMC_ERR_EED_UNDEFINED: return "average delay undefined";
    case VMC_ERR_THROUGHPUT_UNDEFINED: return "throughput undefined";
    case VMC_ERR_NRL_UNDEFINED: return "NRL undefined";
    case VMC_ERR_INCOMPLETE_MATRIX: return "incomplete matrix";
    case VMC_ERR_IO: return "I/O error";
    case VMC_ERR_BUDGET_EXCEEDED: return "wall-clock budget exceeded";
    case VMC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* vmc_last_error(void) { return g_last_error.c_str(); }

void vmc_string_free(char* s) { std::free(s); }

vmc_status vmc_config_create(vmc_config** out) {
  VMC_REQUIRE(out, "out is NULL");
  return guarded([&] {
    *out = new vmc_config{};
    return VMC_OK;
  });
}

void vmc_config_destroy(vmc_config* cfg) { delete cfg; }

vmc_status vmc_config_clone(const vmc_config* cfg, vmc_config** out) {
  VMC_REQUIRE(cfg && out, "NULL argument");
  return guarded([&] {
    *out = new vmc_config{cfg->cfg};
    return VMC_OK;
  });
}

vmc_status vmc_config_load(const char* path, vmc_config** out) {
  VMC_REQUIRE(path && out, "NULL argument");
  return guarded([&] {
    auto c = vmcast::load_config(path);
    *out = new vmc_config{c};
    return VMC_OK;
  });
}

vmc_status vmc_config_from_json(const char* json, vmc_config** out) {
  VMC_REQUIRE(json && out, "NULL argument");
  return guarded([&] {
    auto c = vmcast::config_from_json(json);
    *out = new vmc_config{c};
    return VMC_OK;
  });
}

vmc_status vmc_config_save(const vmc_config* cfg, const char* path) {
  VMC_REQUIRE(cfg && path, "NULL argument");
  return guarded([&] {
    vmcast::save_config(path, cfg->cfg);
    return VMC_OK;
  });
}

vmc_status vmc_config_to_json(const vmc_config* cfg, char** out) {
  VMC_REQUIRE(cfg && out, "NULL argument");
  return guarded([&] {
    *out = dup_string(vmcast::to_json(cfg->cfg));
    return VMC_OK;
  });
}

vmc_status vmc_config_set(vmc_config* cfg, const char* key, const char* value) {
  VMC_REQUIRE(cfg && key && value, "NULL argument");
  return guarded([&] {
    vmcast::set_config_value(cfg->cfg, key, value);
    return VMC_OK;
  });
}

vmc_status vmc_config_get(const vmc_config* cfg, const char* key, char** out) {
  VMC_REQUIRE(cfg && key && out, "NULL argument");
  return guarded([&] {
    *out = dup_string(vmcast::get_config_value(cfg->cfg, key));
    return VMC_OK;
  });
}

vmc_status vmc_config_validate(const vmc_config* cfg, char** errors) {
  VMC_REQUIRE(cfg, "config is NULL");
  return guarded([&] {
    auto errs = vmcast::validate(cfg->cfg);
    if (errors) *errors = nullptr;
    if (errs.empty()) return VMC_OK;
    std::string joined;
    for (const auto& e : errs) joined += e + "\n";
    if (errors) *errors = dup_string(joined);
    return fail(VMC_ERR_INVALID_SCENARIO, joined);
  });
}

vmc_status vmc_config_scenario_id(const vmc_config* cfg, char** out) {
  VMC_REQUIRE(cfg && out, "NULL argument");
  return guarded([&] {
    *out = dup_string(vmcast::scenario_id(cfg->cfg));
    return VMC_OK;
  });
}

vmc_status vmc_run(const vmc_config* cfg, const vmc_run_options* opts, vmc_report** out) {
  VMC_REQUIRE(cfg && out, "NULL argument");
  return guarded([&] {
    vmc_run_options o{};
    if (opts) o = *opts;
    std::ofstream trace, mobility;
    if (o.trace_path) {
      trace.open(o.trace_path);
      if (!trace) return fail(VMC_ERR_IO, std::string("cannot write trace '") + o.trace_path + "'");
    }
    if (o.mobility_path) {
      mobility.open(o.mobility_path);
      if (!mobility) return fail(VMC_ERR_IO, std::string("cannot write mobility dump '") + o.mobility_path + "'");
    }
    std::optional<vmcast::SessionPlan> plan;
    if (o.plan_in_path) {
      std::ifstream in(o.plan_in_path);
      if (!in) return fail(VMC_ERR_IO, std::string("cannot open session plan '") + o.plan_in_path + "'");
      plan = vmcast::read_session_plan(in);
    }
    RunSink sink(o.trace_path ? &trace : nullptr);
    auto art = vmcast::run_scenario(cfg->cfg, sink, plan ? &*plan : nullptr, o.mobility_path ? &mobility : nullptr);
    if (o.plan_out_path) {
      std::ofstream p(o.plan_out_path);
      if (!p) return fail(VMC_ERR_IO, std::string("cannot write session plan '") + o.plan_out_path + "'");
      vmcast::write_session_plan(p, art.plan);
    }
    if (trace.is_open() && !trace.flush()) return fail(VMC_ERR_IO, "trace write failed");
    const auto& c = cfg->cfg;
    *out = new vmc_report{
        {vmcast::scenario_id(c), std::string(vmcast::to_string(c.protocol)), c.listeners, c.sessions, sink.report()}};
    return VMC_OK;
  });
}

vmc_status vmc_analyze(const char* trace_path, vmc_report** out) {
  VMC_REQUIRE(trace_path && out, "NULL argument");
  return guarded([&] {
    std::ifstream in(trace_path);
    if (!in) return fail(VMC_ERR_IO, std::string("cannot open trace '") + trace_path + "'");
    vmcast::TraceReader reader(in);
    vmcast::MetricsAccumulator acc;
    std::string protocol = "unknown";
    std::map<vmcast::NodeId, std::size_t> joins;
    while (auto r = reader.next()) {
      acc.add(*r);
      if (protocol == "unknown" && (r->proto == vmcast::Proto::Maodv || r->proto == vmcast::Proto::Puma))
        protocol = std::string(vmcast::to_string(r->proto));
      if (r->op == vmcast::TraceOp::Session && r->kind == vmcast::MsgKind::Join) ++joins[r->node];
    }
    std::size_t sessions = 0;
    for (const auto& [_, n] : joins) sessions = std::max(sessions, n);
    *out = new vmc_report{{std::filesystem::path(trace_path).stem().string(), protocol, joins.size(), sessions,
                           acc.report()}};
    return VMC_OK;
  });
}

void vmc_report_destroy(vmc_report* report) { delete report; }

vmc_status vmc_report_metric(const vmc_report* report, vmc_metric metric, double* out) {
  VMC_REQUIRE(report && out, "NULL argument");
  const auto& m = report->row.metrics;
  std::optional<double> v;
  vmc_status undefined = VMC_ERR_INVALID_ARGUMENT;
  switch (metric) {
    case VMC_METRIC_PDR: v = m.pdr; undefined = VMC_ERR_PDR_UNDEFINED; break;
    case VMC_METRIC_AVG_EED: v = m.avg_eed_s; undefined = VMC_ERR_EED_UNDEFINED; break;
    case VMC_METRIC_AVG_EED_PER_RECEIVED: v = m.avg_eed_per_received_s; undefined = VMC_ERR_EED_UNDEFINED; break;
    case VMC_METRIC_THROUGHPUT: v = m.throughput_kbps; undefined = VMC_ERR_THROUGHPUT_UNDEFINED; break;
    case VMC_METRIC_NRL: v = m.nrl; undefined = VMC_ERR_NRL_UNDEFINED; break;
    default: return fail(VMC_ERR_INVALID_ARGUMENT, "unknown metric");
  }
  if (!v) return fail(undefined, vmc_status_name(undefined));
  *out = *v;
  return VMC_OK;
}

vmc_status vmc_report_counts(const vmc_report* report, vmc_counts* out) {
  VMC_REQUIRE(report && out, "NULL argument");
  const auto& c = report->row.metrics.counts;
  *out = {c.data_sent, c.data_received, c.counted_received, c.expected, c.control_sent, c.received_bytes};
  return VMC_OK;
}

vmc_status vmc_report_csv_row(const vmc_report* report, char** out) {
  VMC_REQUIRE(report && out, "NULL argument");
  return guarded([&] {
    *out = dup_string(vmcast::format_csv_row(report->row));
    return VMC_OK;
  });
}

const char* vmc_csv_header(void) { return vmcast::kCsvHeader; }

vmc_status vmc_matrix_run(const vmc_config* const* configs, size_t n, const vmc_matrix_options* opts, char** csv,
                          size_t* failed) {
  VMC_REQUIRE(opts, "options are NULL");
  VMC_REQUIRE(n == 0 || configs, "configs are NULL");
  return guarded([&] {
    std::vector<vmcast::ScenarioConfig> list;
    if (opts->paper_matrix) {
      vmcast::ScenarioConfig base = n > 0 && configs[0] ? configs[0]->cfg : vmcast::ScenarioConfig{};
      list = vmcast::paper_matrix(opts->seed, base);
    } else {
      for (size_t i = 0; i < n; ++i) {
        if (!configs[i]) return fail(VMC_ERR_INVALID_ARGUMENT, "config entry is NULL");
        list.push_back(configs[i]->cfg);
      }
    }
    if (list.empty()) return fail(VMC_ERR_INVALID_ARGUMENT, "no scenarios to run");
    list = vmcast::expand_repetitions(list, opts->reps == 0 ? 1 : opts->reps);

    std::string errors;
    for (const auto& c : list) {
      auto errs = vmcast::validate(c);
      for (const auto& e : errs) errors += vmcast::scenario_id(c) + ": " + e + "\n";
    }
    if (!errors.empty()) return fail(VMC_ERR_INVALID_SCENARIO, errors);

    vmcast::MatrixOptions mo;
    mo.out_dir = opts->out_dir ? opts->out_dir : "";
    mo.keep_traces = opts->keep_traces != 0;
    mo.workers = opts->workers == 0 ? 1 : opts->workers;
    if (opts->progress) {
      auto fn = opts->progress;
      void* user = opts->user;
      mo.progress = [fn, user](const std::string& line) { fn(line.c_str(), user); };
    }
    auto outcome = vmcast::run_matrix(list, mo);
    if (csv) *csv = dup_string(vmcast::format_csv(outcome.rows));
    if (failed) *failed = outcome.failures.size();
    if (!outcome.failures.empty()) {
      std::string msg;
      for (const auto& f : outcome.failures) msg += f.scenario + ": " + f.message + "\n";
      g_last_error = msg;
    }
    return VMC_OK;
  });
}

vmc_status vmc_trends(const char* csv_text, char** table, int* all_passed) {
  VMC_REQUIRE(csv_text, "csv is NULL");
  return guarded([&] {
    std::istringstream in(csv_text);
    auto rows = vmcast::parse_csv(in);
    auto results = vmcast::report_trends(rows);
    std::ostringstream out;
    vmcast::print_trends(out, results);
    if (table) *table = dup_string(out.str());
    if (all_passed) *all_passed = vmcast::all_passed(results) ? 1 : 0;
    return VMC_OK;
  });
}

}  // extern "C"
