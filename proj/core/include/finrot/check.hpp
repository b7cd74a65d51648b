#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace finrot {

// Outcome of one acceptance criterion. notes carries measured margins and,
// when pass is false, a description of every violated requirement.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0;
  std::vector<std::string> notes;
};

// Runs the acceptance suite (all eleven criteria, or the ids in `only`).
// Criteria are independent; an exception inside one is caught and recorded as
// a failure of that criterion alone. Tolerances and time budgets are pinned
// as constants in the implementation. Criteria 9 and 10 share one set of
// trained models, built once on first use.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {});

// One pass/fail line per criterion plus a summary; true when all passed.
bool print_report(const std::vector<CriterionResult>& results, std::FILE* out = stdout);

} // namespace finrot
