//===-- cfg.cpp - Block leaders and cyclomatic complexity ----------------===//

#include "duet/cfg.hpp"

#include <algorithm>
#include <numeric>

namespace duet {

std::set<uint32_t> block_leaders(const Program &p) {
  std::set<uint32_t> leaders;
  const uint32_t n = static_cast<uint32_t>(p.code.size());
  if (p.entry < n)
    leaders.insert(p.entry);
  for (uint32_t pc = 0; pc < n; ++pc) {
    Opcode op = p.code[pc].op;
    if (!ends_block(op))
      continue;
    if (auto t = p.target_of(pc))
      leaders.insert(*t);
    if (pc + 1 < n)
      leaders.insert(pc + 1);
  }
  return leaders;
}

size_t StaticCfg::block_of(uint32_t pc) const {
  auto it = std::upper_bound(block_starts.begin(), block_starts.end(), pc);
  return static_cast<size_t>(it - block_starts.begin()) - 1;
}

StaticCfg build_cfg(const Program &p) {
  StaticCfg cfg;
  std::set<uint32_t> leaders = block_leaders(p);
  // Code before the first leader still forms a (dead) block.
  leaders.insert(0);
  cfg.block_starts.assign(leaders.begin(), leaders.end());
  const size_t nb = cfg.block_starts.size();
  const uint32_t n = static_cast<uint32_t>(p.code.size());

  for (size_t b = 0; b < nb; ++b) {
    uint32_t end = b + 1 < nb ? cfg.block_starts[b + 1] : n;
    uint32_t last = end - 1;
    Opcode op = p.code[last].op;
    std::set<size_t> succ;
    switch (op) {
    case Opcode::Halt:
    case Opcode::Ret:
      break;
    case Opcode::Jmp:
      if (auto t = p.target_of(last))
        succ.insert(cfg.block_of(*t));
      break;
    case Opcode::Beqz:
    case Opcode::Bnez:
    case Opcode::Call:
      if (auto t = p.target_of(last))
        succ.insert(cfg.block_of(*t));
      if (end < n)
        succ.insert(b + 1);
      break;
    default:
      if (end < n)
        succ.insert(b + 1);
      break;
    }
    for (size_t s : succ)
      cfg.edges.emplace_back(b, s);
  }

  // Weakly connected components by union-find.
  std::vector<size_t> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](size_t x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : cfg.edges)
    parent[find(a)] = find(b);
  for (size_t i = 0; i < nb; ++i)
    if (find(i) == i)
      ++cfg.components;
  return cfg;
}

unsigned cyclomatic_complexity(const Program &p) {
  StaticCfg cfg = build_cfg(p);
  long m = long(cfg.edges.size()) - long(cfg.block_starts.size()) +
           2 * long(cfg.components);
  return static_cast<unsigned>(std::max(1l, m));
}

} // namespace duet
