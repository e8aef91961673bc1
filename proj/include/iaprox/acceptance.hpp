#pragma once

// The desk-scale acceptance suite: one result per criterion, each with a
// pass flag, a one-line measurement and its wall time.

#include <functional>
#include <string>
#include <vector>

namespace iaprox::acceptance {

struct CriterionResult
{
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Report
{
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
};

/// "PASS  3  title | detail (0.12 s)".
std::string format_line(CriterionResult const &r);

/// Runs criteria 1..13 in order; `on_result` sees each result as it lands.
Report run_all(std::function<void(CriterionResult const &)> const &on_result = {});

} // namespace iaprox::acceptance
