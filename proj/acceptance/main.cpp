// Runs the listed acceptance criteria (all of them when none are given) and
// prints one PASS/FAIL line each. Exit status is nonzero if any fails.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "criteria.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (int id = 1; id <= 10; ++id) ids.push_back(id);
  }
  bool all = true;
  for (const int id : ids) {
    const auto outcome = ctbpq::acceptance::run_criterion(id);
    ctbpq::acceptance::print(std::cout, outcome);
    all = all && outcome.pass;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
