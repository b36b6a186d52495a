// One line per acceptance criterion; exit status 1 if any fails.

#include <iostream>

#include "sfw/verify.hpp"

int main() {
  int failed = 0;
  for (const auto& check : sfw::verify::all_checks()) {
    const auto r = sfw::verify::timed(check);
    std::cout << sfw::verify::format_line(r) << std::endl;
    failed += r.passed ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
