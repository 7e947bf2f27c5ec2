//===-- cfg.hpp - Static block structure ---------------------------------===//

#pragma once

#include "duet/isa.hpp"

#include <set>

namespace duet {

/// Entry, every in-range branch/call target, and every in-range successor
/// of a block-ending instruction.
std::set<uint32_t> block_leaders(const Program &p);

struct StaticCfg {
  std::vector<uint32_t> block_starts; // sorted leaders
  std::vector<std::pair<size_t, size_t>> edges; // block index pairs
  size_t components = 0;

  size_t block_of(uint32_t pc) const;
};

StaticCfg build_cfg(const Program &p);

/// M = E - N + 2P over build_cfg(p).
unsigned cyclomatic_complexity(const Program &p);

} // namespace duet
