#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "vmcast/batch.hpp"
#include "vmcast/config.hpp"
#include "vmcast/error.hpp"
#include "vmcast/trends.hpp"

using namespace vmcast;
namespace fs = std::filesystem;

namespace {
bool mentions(const std::vector<std::string>& errors, const std::string& text) {
  for (const auto& e : errors)
    if (e.find(text) != std::string::npos) return true;
  return false;
}

ScenarioConfig small() {
  ScenarioConfig c;
  c.nodes = 64;
  c.duration_s = 12;
  return c;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("vmcast-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ReportRow row(const std::string& proto, std::size_t L, std::size_t S, int seed, double pdr, double thr, double nrl,
              double eed = 0.05) {
  ReportRow r;
  r.protocol = proto;
  r.listeners = L;
  r.sessions = S;
  r.scenario = proto + "-L" + std::to_string(L) + "-S" + std::to_string(S) + "-seed" + std::to_string(seed);
  r.metrics.pdr = pdr;
  r.metrics.throughput_kbps = thr;
  r.metrics.nrl = nrl;
  r.metrics.avg_eed_s = eed;
  return r;
}

/// A report that satisfies every trend.
std::vector<ReportRow> good_report(int seeds = 3) {
  std::vector<ReportRow> rows;
  for (int seed = 7; seed < 7 + seeds; ++seed)
    for (std::size_t L : {10, 20, 40, 60})
      for (std::size_t S : {5, 10, 20}) {
        double l = static_cast<double>(L);
        rows.push_back(row("maodv", L, S, seed, 0.6, 100.0 + 10.0 * l, 0.3 + 0.01 * static_cast<double>(S)));
        rows.push_back(row("puma", L, S, seed, 0.9, 40.0 * l, 5.0 / l));
      }
  return rows;
}

const TrendResult& find(const std::vector<TrendResult>& r, const std::string& name) {
  for (const auto& t : r)
    if (t.name == name) return t;
  FAIL("missing trend " << name);
  return r.front();
}
}  // namespace

TEST_CASE("defaults match the reference scenario") {
  ScenarioConfig c;
  CHECK(c.nodes == 100);
  CHECK(c.duration_s == 600);
  CHECK(c.area_length_m == 10000);
  CHECK(c.area_width_m == 1000);
  CHECK(c.radio.range_m == 1000);
  CHECK(validate(c).empty());
}

TEST_CASE("validation examples") {
  ScenarioConfig c;
  c.listeners = 60;
  CHECK(validate(c).empty());

  c.listeners = 200;
  auto errs = validate(c);
  CHECK(mentions(errs, "listeners exceed nodes"));
  try {
    validate_or_throw(c);
    FAIL("expected InvalidScenario");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidScenario);
  }

  ScenarioConfig d;
  d.duration_s = 0;
  CHECK_FALSE(validate(d).empty());

  // Every violation is reported at once.
  ScenarioConfig e;
  e.listeners = 200;
  e.duration_s = 0;
  e.sessions = 0;
  CHECK(validate(e).size() >= 3);
}

TEST_CASE("config text round trip") {
  ScenarioConfig c;
  c.protocol = ProtocolKind::Puma;
  c.listeners = 40;
  c.sessions = 20;
  c.seed = 0xfeedfacecafebeefULL;
  c.radio.loss_probability = 0.125;
  c.puma.source_is_member = true;
  c.maodv.hello_interval = SimTime::from_millis(1500);
  CHECK(config_from_json(to_json(c)) == c);

  auto dir = scratch("config");
  save_config((dir / "c.json").string(), c);
  CHECK(load_config((dir / "c.json").string()) == c);
  fs::remove_all(dir);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(config_from_json(R"({"nodez": 3})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"protocol": "olsr"})"), Error);
  CHECK_THROWS_AS(config_from_json("{"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/vmcast.json"), Error);
}

TEST_CASE("dotted overrides") {
  ScenarioConfig c;
  set_config_value(c, "listeners", "20");
  set_config_value(c, "puma.announce_period", "2.5");
  set_config_value(c, "protocol", "puma");
  CHECK(c.listeners == 20);
  CHECK(c.puma.announce_period == SimTime::from_millis(2500));
  CHECK(c.protocol == ProtocolKind::Puma);
  CHECK(get_config_value(c, "listeners") == "20");
  CHECK_THROWS_AS(set_config_value(c, "no.such.key", "1"), Error);
  CHECK_THROWS_AS(set_config_value(c, "listeners", "many"), Error);
  CHECK(scenario_id(c) == "puma-L20-S5-seed1");
}

TEST_CASE("paper matrix has 24 paired scenarios") {
  auto m = paper_matrix(7);
  CHECK(m.size() == 24);
  std::set<std::string> ids;
  for (const auto& c : m) {
    ids.insert(scenario_id(c));
    CHECK(c.seed == 7);
    CHECK(validate(c).empty());
  }
  CHECK(ids.size() == 24);
  for (std::size_t L : {10, 20, 40, 60})
    for (std::size_t S : {5, 10, 20}) {
      ScenarioConfig k;
      k.listeners = L;
      k.sessions = S;
      k.seed = 7;
      k.protocol = ProtocolKind::Maodv;
      CHECK(ids.count(scenario_id(k)) == 1);
      k.protocol = ProtocolKind::Puma;
      CHECK(ids.count(scenario_id(k)) == 1);
    }
}

TEST_CASE("repetitions offset the seed") {
  ScenarioConfig c;
  c.seed = 7;
  auto r = expand_repetitions({c}, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].seed == 7);
  CHECK(r[1].seed == 8);
  CHECK(r[2].seed == 9);
}

TEST_CASE("matrix run writes traces and a deterministic report") {
  auto dir = scratch("matrix");
  MatrixOptions opts;
  opts.out_dir = (dir / "a").string();
  opts.workers = 2;
  auto a = run_matrix(paper_matrix(7, small()), opts);
  CHECK(a.failures.empty());
  CHECK(a.rows.size() == 24);
  std::size_t traces = 0;
  for (const auto& f : fs::directory_iterator(opts.out_dir)) traces += f.path().extension() == ".tr" ? 1 : 0;
  CHECK(traces == 24);
  REQUIRE(fs::exists(fs::path(opts.out_dir) / "report.csv"));

  opts.out_dir = (dir / "b").string();
  opts.workers = 1;
  run_matrix(paper_matrix(7, small()), opts);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv"));

  std::istringstream csv(slurp(dir / "a" / "report.csv"));
  auto back = parse_csv(csv);
  REQUIRE(back.size() == 24);
  CHECK(back[0].scenario == a.rows[0].scenario);
  fs::remove_all(dir);
}

TEST_CASE("a failing scenario is recorded and the batch continues") {
  auto base = small();
  auto bad = base;
  bad.listeners = 500;
  bad.seed = 3;
  MatrixOptions opts;
  auto out = run_matrix({base, bad}, opts);
  CHECK(out.rows.size() == 1);
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].message.find("listeners exceed nodes") != std::string::npos);
}

TEST_CASE("duplicate scenario ids are refused") {
  MatrixOptions opts;
  CHECK_THROWS_AS(run_matrix({small(), small()}, opts), Error);
}

TEST_CASE("trend report on a conforming matrix passes") {
  auto res = report_trends(good_report());
  std::ostringstream table;
  print_trends(table, res);
  INFO(table.str());
  CHECK(all_passed(res));
  CHECK(find(res, "PDR ordering").status == TrendStatus::Pass);
  std::ostringstream out;
  print_trends(out, res);
  CHECK(out.str().find("PASS") != std::string::npos);
}

TEST_CASE("inverted throughput fails and names the cells") {
  auto rows = good_report();
  for (auto& r : rows)
    if (r.listeners == 40 && r.sessions == 10) *r.metrics.throughput_kbps = r.protocol == "puma" ? 1.0 : 1000.0;
  auto res = report_trends(rows);
  const auto& t = find(res, "throughput ordering");
  CHECK(t.status == TrendStatus::Fail);
  CHECK(t.detail.find("L=40") != std::string::npos);
  CHECK(t.detail.find("S=10") != std::string::npos);
  CHECK_FALSE(all_passed(res));
}

TEST_CASE("PDR ordering fails when one cell is inverted in most seeds") {
  auto rows = good_report();
  for (auto& r : rows)
    if (r.listeners == 10 && r.sessions == 5 && r.protocol == "maodv" && r.scenario.find("seed9") == std::string::npos)
      r.metrics.pdr = 0.95;
  CHECK(find(report_trends(rows), "PDR ordering").status == TrendStatus::Fail);
}

TEST_CASE("one protocol only is an incomplete matrix") {
  std::vector<ReportRow> rows;
  for (const auto& r : good_report())
    if (r.protocol == "puma") rows.push_back(r);
  try {
    report_trends(rows);
    FAIL("expected IncompleteMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteMatrix);
  }
  CHECK_THROWS_AS(report_trends({}), Error);
}

TEST_CASE("malformed CSV is rejected") {
  std::istringstream bad(std::string(kCsvHeader) + "\nfoo,puma,x,5,0.1,0.1,1,1\n");
  CHECK_THROWS_AS(parse_csv(bad), Error);
}
