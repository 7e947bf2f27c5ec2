//===-- interp.hpp - Concrete reference interpreter ----------------------===//
//
// The interpreter defines the ground-truth semantics of the ISA. Every
// soundness check of the symbolic layer replays models through it.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/isa.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace duet {

struct MachineConfig {
  /// Valid data addresses are [mem_lo, mem_hi); word accesses must fit.
  uint32_t mem_lo = 0;
  uint32_t mem_hi = 0x10000;
  uint32_t call_depth_max = 64;

  bool valid_word(uint32_t addr) const {
    return addr >= mem_lo && uint64_t(addr) + 4 <= mem_hi;
  }
};

using ChannelBytes = std::map<uint32_t, std::vector<uint8_t>>;

struct MachineState {
  std::array<uint32_t, kNumRegs> regs{};
  std::map<uint32_t, uint8_t> mem;
  uint32_t pc = 0;
  std::vector<uint32_t> call_stack;
  ChannelBytes channels_out;
  std::map<uint32_t, size_t> channels_in_cursor;

  uint8_t byte(uint32_t addr) const {
    auto it = mem.find(addr);
    return it == mem.end() ? 0 : it->second;
  }
  uint32_t load32(uint32_t addr) const;
  void store32(uint32_t addr, uint32_t value);

  bool operator==(const MachineState &) const = default;
};

enum class StopReason { Halt, Trap, StepLimit, InputExhausted };

const char *to_string(StopReason r);

/// Replaces a CALL to the hooked target. The hook may change registers and
/// outputs; execution resumes at the instruction after the CALL.
using ConcreteHook = std::function<void(MachineState &)>;

struct RunOptions {
  uint64_t step_limit = 1'000'000;
  MachineConfig machine;
  std::map<uint32_t, ConcreteHook> hooks;
  bool record_trace = false;
  /// Overrides Program::entry when set.
  std::optional<uint32_t> entry;
};

struct ConcreteRun {
  MachineState state;
  StopReason reason = StopReason::Halt;
  std::string trap_reason;
  uint64_t steps = 0;
  /// pcs of executed instructions, in order, when RunOptions::record_trace.
  std::vector<uint32_t> trace;
};

/// Runs p from its entry. The data segment is loaded first and init_mem is
/// overlaid on top of it.
ConcreteRun run_concrete(const Program &p, const ChannelBytes &inputs,
                         const std::array<uint32_t, kNumRegs> &init_regs,
                         const std::map<uint32_t, uint8_t> &init_mem,
                         const RunOptions &opts);

} // namespace duet
