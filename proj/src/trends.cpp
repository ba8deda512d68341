#include "vmcast/trends.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "vmcast/error.hpp"

namespace vmcast {

std::string_view to_string(TrendStatus s) {
  switch (s) {
    case TrendStatus::Pass: return "PASS";
    case TrendStatus::Fail: return "FAIL";
    case TrendStatus::Skip: return "SKIP";
  }
  return "?";
}

namespace {

struct Pair {
  const ReportRow* maodv = nullptr;
  const ReportRow* puma = nullptr;
};
using Cell = std::pair<std::size_t, std::size_t>;  // (L, S)
using Grid = std::map<Cell, std::map<std::uint64_t, Pair>>;

std::uint64_t seed_of(const std::string& id) {
  auto pos = id.rfind("-seed");
  if (pos == std::string::npos) return 0;
  try {
    return std::stoull(id.substr(pos + 5));
  } catch (const std::exception&) {
    return 0;
  }
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string cell_name(const Cell& c) { return "L=" + std::to_string(c.first) + ",S=" + std::to_string(c.second); }

using Getter = std::optional<double> MetricsReport::*;

/// Mean over seeds; empty if any seed lacks the value.
std::optional<double> mean(const std::map<std::uint64_t, Pair>& seeds, bool puma, Getter g) {
  double sum = 0;
  for (const auto& [_, p] : seeds) {
    const auto& v = (puma ? p.puma : p.maodv)->metrics.*g;
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / static_cast<double>(seeds.size());
}

void append(std::string& detail, const std::string& item) {
  if (!detail.empty()) detail += "; ";
  detail += item;
}

TrendResult majority(const Grid& grid, const std::string& name, Getter g, std::size_t min_l) {
  TrendResult r{name, TrendStatus::Pass, ""};
  std::size_t cells = 0;
  std::string failed;
  for (const auto& [cell, seeds] : grid) {
    if (cell.first < min_l) continue;
    ++cells;
    std::size_t wins = 0;
    for (const auto& [_, p] : seeds) {
      const auto& a = p.puma->metrics.*g;
      const auto& b = p.maodv->metrics.*g;
      if (a && b && *a > *b) ++wins;
    }
    if (wins * 2 <= seeds.size())
      append(failed, cell_name(cell) + " (puma ahead in " + std::to_string(wins) + "/" + std::to_string(seeds.size()) +
                         " seeds)");
  }
  if (cells == 0) return {name, TrendStatus::Skip, "no qualifying cells"};
  if (!failed.empty()) {
    r.status = TrendStatus::Fail;
    r.detail = "failed: " + failed;
  } else {
    r.detail = "puma ahead in " + std::to_string(cells) + "/" + std::to_string(cells) + " cells";
  }
  return r;
}

}  // namespace

std::vector<TrendResult> report_trends(const std::vector<ReportRow>& rows) {
  Grid grid;
  for (const auto& row : rows) {
    Pair& p = grid[{row.listeners, row.sessions}][seed_of(row.scenario)];
    (row.protocol == "puma" ? p.puma : p.maodv) = &row;
  }
  if (grid.empty()) throw Error(ErrorCode::IncompleteMatrix, "report has no rows");
  std::string missing;
  for (const auto& [cell, seeds] : grid) {
    for (const auto& [seed, p] : seeds) {
      if (!p.puma || !p.maodv)
        append(missing, cell_name(cell) + " seed " + std::to_string(seed) + " lacks " + (p.puma ? "maodv" : "puma"));
    }
  }
  if (!missing.empty()) throw Error(ErrorCode::IncompleteMatrix, "incomplete matrix: " + missing);

  std::map<Cell, double> thr[2], nrl[2], eed[2];
  std::string undefined;
  for (const auto& [cell, seeds] : grid) {
    for (int p = 0; p < 2; ++p) {
      auto t = mean(seeds, p == 1, &MetricsReport::throughput_kbps);
      auto n = mean(seeds, p == 1, &MetricsReport::nrl);
      auto e = mean(seeds, p == 1, &MetricsReport::avg_eed_s);
      if (t) thr[p][cell] = *t;
      if (n) nrl[p][cell] = *n;
      if (e) eed[p][cell] = *e;
    }
  }

  std::vector<TrendResult> out;
  out.push_back(majority(grid, "throughput ordering", &MetricsReport::throughput_kbps, 20));

  {
    TrendResult r{"throughput scaling", TrendStatus::Pass, ""};
    bool any = false;
    for (const auto& [cell, _] : grid) {
      if (cell.first != 10) continue;
      Cell hi{60, cell.second};
      if (!grid.count(hi)) continue;
      if (!thr[0].count(cell) || !thr[1].count(cell) || !thr[0].count(hi) || !thr[1].count(hi)) continue;
      any = true;
      double fp = thr[1][hi] / thr[1][cell];
      double fm = thr[0][hi] / thr[0][cell];
      bool ok = fp >= 2.5 && fm < fp;
      append(r.detail, "S=" + std::to_string(cell.second) + ": puma x" + fmt("%.2f", fp) + ", maodv x" +
                           fmt("%.2f", fm) + (ok ? "" : " FAIL"));
      if (!ok) r.status = TrendStatus::Fail;
    }
    if (!any) r = {"throughput scaling", TrendStatus::Skip, "needs L=10 and L=60 rows"};
    out.push_back(r);
  }

  {
    TrendResult r{"NRL trends", TrendStatus::Pass, ""};
    std::string bad;
    std::map<std::size_t, std::vector<std::size_t>> ls_by_s, ss_by_l;
    for (const auto& [cell, _] : grid) {
      ls_by_s[cell.second].push_back(cell.first);
      ss_by_l[cell.first].push_back(cell.second);
    }
    std::size_t checks = 0;
    for (const auto& [s, ls] : ls_by_s) {
      for (std::size_t i = 1; i < ls.size(); ++i) {
        Cell a{ls[i - 1], s}, b{ls[i], s};
        if (!nrl[1].count(a) || !nrl[1].count(b)) continue;
        ++checks;
        if (nrl[1][b] > 1.1 * nrl[1][a])
          append(bad, "puma rises " + cell_name(a) + "->" + cell_name(b) + " (" + fmt("%.3f", nrl[1][a]) + "->" +
                          fmt("%.3f", nrl[1][b]) + ")");
      }
      Cell lo{10, s}, hi{60, s};
      if (nrl[1].count(lo) && nrl[1].count(hi)) {
        ++checks;
        if (!(nrl[1][hi] < 0.5 * nrl[1][lo]))
          append(bad, "puma S=" + std::to_string(s) + " L=60/L=10 ratio " + fmt("%.2f", nrl[1][hi] / nrl[1][lo]));
      }
    }
    for (const auto& [l, ss] : ss_by_l) {
      for (std::size_t i = 1; i < ss.size(); ++i) {
        Cell a{l, ss[i - 1]}, b{l, ss[i]};
        if (!nrl[0].count(a) || !nrl[0].count(b)) continue;
        ++checks;
        if (nrl[0][b] < nrl[0][a] / 1.1)
          append(bad, "maodv falls " + cell_name(a) + "->" + cell_name(b) + " (" + fmt("%.3f", nrl[0][a]) + "->" +
                          fmt("%.3f", nrl[0][b]) + ")");
      }
    }
    if (checks == 0) {
      r = {"NRL trends", TrendStatus::Skip, "not enough L or S values"};
    } else if (!bad.empty()) {
      r.status = TrendStatus::Fail;
      r.detail = bad;
    } else {
      r.detail = std::to_string(checks) + " comparisons hold";
    }
    out.push_back(r);
  }

  {
    TrendResult r = majority(grid, "PDR ordering", &MetricsReport::pdr, 0);
    std::string range;
    for (const auto& row : rows) {
      if (!row.metrics.pdr || *row.metrics.pdr <= 0.0 || *row.metrics.pdr > 1.0)
        append(range, row.scenario + " pdr outside (0, 1]");
    }
    if (!range.empty()) {
      r.status = TrendStatus::Fail;
      append(r.detail, range);
    }
    out.push_back(r);
  }

  {
    TrendResult r{"delay band", TrendStatus::Pass, ""};
    std::size_t outside = 0, total = 0;
    double lo = 1e300, hi = -1e300;
    std::vector<double> diffs;
    for (const auto& [cell, _] : grid) {
      for (int p = 0; p < 2; ++p) {
        if (!eed[p].count(cell)) {
          ++outside;
          ++total;
          continue;
        }
        double v = eed[p][cell];
        ++total;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (v < 0.020 || v > 0.120) ++outside;
      }
      if (eed[0].count(cell) && eed[1].count(cell)) diffs.push_back(std::abs(eed[1][cell] - eed[0][cell]));
    }
    double median = 0;
    if (!diffs.empty()) {
      std::sort(diffs.begin(), diffs.end());
      std::size_t n = diffs.size();
      median = n % 2 ? diffs[n / 2] : (diffs[n / 2 - 1] + diffs[n / 2]) / 2;
    }
    r.detail = std::to_string(total - outside) + "/" + std::to_string(total) + " cell means in [0.020, 0.120] s (range " +
               fmt("%.4f", lo) + ".." + fmt("%.4f", hi) + " s); median |puma-maodv| " + fmt("%.4f", median) + " s";
    if (outside > 0 || diffs.empty() || median >= 0.015) r.status = TrendStatus::Fail;
    out.push_back(r);
  }
  return out;
}

bool all_passed(const std::vector<TrendResult>& results) {
  return std::none_of(results.begin(), results.end(), [](const TrendResult& r) { return r.status == TrendStatus::Fail; });
}

void print_trends(std::ostream& out, const std::vector<TrendResult>& results) {
  for (const auto& r : results) out << to_string(r.status) << "  " << r.name << ": " << r.detail << "\n";
}

}  // namespace vmcast
