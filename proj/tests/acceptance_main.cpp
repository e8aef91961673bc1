#include "iaprox/acceptance.hpp"

#include <cstdio>

int main()
{
  auto const report = iaprox::acceptance::run_all([](iaprox::acceptance::CriterionResult const &r) {
    std::printf("%s\n", iaprox::acceptance::format_line(r).c_str());
    std::fflush(stdout);
  });
  std::size_t passed = 0;
  for (auto const &c : report.criteria) {
    passed += c.pass ? 1 : 0;
  }
  std::printf("%zu/%zu criteria pass\n", passed, report.criteria.size());
  return report.all_pass() ? 0 : 1;
}
