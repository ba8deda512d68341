#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vmcast/metrics.hpp"

namespace vmcast {

enum class TrendStatus { Pass, Fail, Skip };
std::string_view to_string(TrendStatus s);

struct TrendResult {
  std::string name;
  TrendStatus status = TrendStatus::Skip;
  std::string detail;
};

/// Evaluates the qualitative protocol comparisons over a report:
/// throughput ordering, throughput scaling, NRL trends, PDR ordering and the
/// delay band. Seeds are read from the "-seed<N>" suffix of scenario ids.
/// Throws Error(IncompleteMatrix) unless every (L, S, seed) row of one
/// protocol has its counterpart.
std::vector<TrendResult> report_trends(const std::vector<ReportRow>& rows);

bool all_passed(const std::vector<TrendResult>& results);
void print_trends(std::ostream& out, const std::vector<TrendResult>& results);

}  // namespace vmcast
