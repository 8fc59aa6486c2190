// Acceptance criteria: one PASS/FAIL line each; nonzero exit if any fails.

#include <iostream>

#include "ghostmg/verify.hpp"

int main() {
  int failures = 0;
  std::size_t k = 0;
  for (const auto& f : ghostmg::acceptance_criteria()) {
    ++k;
    const auto r = ghostmg::run_guarded(f, "criterion " + std::to_string(k));
    if (!r.pass) ++failures;
    std::cout << ghostmg::format_line(k, r) << std::endl;
  }
  std::cout << (k - failures) << " of " << k << " criteria pass\n";
  return failures == 0 ? 0 : 1;
}
