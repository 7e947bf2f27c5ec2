//===-- oracle.hpp - Brute-force cross-check of a comparison --------------===//
//
// Re-derives pairs, register/memory/effect differences and classifications
// of a finished comparison by exhaustive enumeration (brute_force_sat) and
// reports every disagreement. Only usable when the inputs fit the
// enumeration budget.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/compare.hpp"

#include <string>
#include <vector>

namespace duet {

struct OracleCheck {
  size_t pairs_checked = 0;    // (pre, post) terminal combinations
  size_t diffs_checked = 0;    // register, memory and effect entries
  size_t classes_checked = 0;
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

/// Throws BudgetExceeded when the declared inputs exceed max_bits.
OracleCheck oracle_check(const Harness &h, const ComparisonResult &cr,
                         unsigned max_bits = kDefaultOracleBits);

} // namespace duet
