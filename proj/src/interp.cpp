//===-- interp.cpp - Concrete reference interpreter ----------------------===//

#include "duet/interp.hpp"

namespace duet {

uint32_t MachineState::load32(uint32_t addr) const {
  uint32_t v = 0;
  for (uint32_t i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(byte(addr + i)) << (8 * i);
  return v;
}

void MachineState::store32(uint32_t addr, uint32_t value) {
  for (uint32_t i = 0; i < 4; ++i)
    mem[addr + i] = static_cast<uint8_t>(value >> (8 * i));
}

const char *to_string(StopReason r) {
  switch (r) {
  case StopReason::Halt:
    return "halt";
  case StopReason::Trap:
    return "trap";
  case StopReason::StepLimit:
    return "step-limit";
  case StopReason::InputExhausted:
    return "input-exhausted";
  }
  return "?";
}

ConcreteRun run_concrete(const Program &p, const ChannelBytes &inputs,
                         const std::array<uint32_t, kNumRegs> &init_regs,
                         const std::map<uint32_t, uint8_t> &init_mem,
                         const RunOptions &opts) {
  ConcreteRun run;
  MachineState &m = run.state;
  m.regs = init_regs;
  for (size_t i = 0; i < p.data.size(); ++i)
    m.mem[p.data_base + static_cast<uint32_t>(i)] = p.data[i];
  for (const auto &[addr, b] : init_mem)
    m.mem[addr] = b;
  m.pc = opts.entry.value_or(p.entry);

  const uint32_t n = static_cast<uint32_t>(p.code.size());
  auto trap = [&](std::string why) {
    run.reason = StopReason::Trap;
    run.trap_reason = std::move(why);
    return run;
  };
  auto jump = [&](uint32_t pc, int32_t rel) -> bool {
    int64_t t = int64_t(pc) + rel;
    if (t < 0 || t >= int64_t(n))
      return false;
    m.pc = static_cast<uint32_t>(t);
    return true;
  };

  while (true) {
    if (m.pc >= n)
      return trap("pc out of range");
    if (run.steps >= opts.step_limit) {
      run.reason = StopReason::StepLimit;
      return run;
    }
    const Instruction &ins = p.code[m.pc];
    const uint32_t pc = m.pc;
    auto &r = m.regs;
    const uint32_t a = r[ins.rs], b = r[ins.rt];

    // Input exhaustion stops before the IN executes.
    if (ins.op == Opcode::In) {
      uint32_t ch = static_cast<uint32_t>(ins.imm);
      size_t cur = m.channels_in_cursor[ch];
      auto it = inputs.find(ch);
      if (it == inputs.end() || cur >= it->second.size()) {
        run.reason = StopReason::InputExhausted;
        return run;
      }
    }

    ++run.steps;
    if (opts.record_trace)
      run.trace.push_back(pc);
    m.pc = pc + 1;

    switch (ins.op) {
    case Opcode::Halt:
      m.pc = pc;
      run.reason = StopReason::Halt;
      return run;
    case Opcode::Const:
      r[ins.rd] = static_cast<uint32_t>(ins.imm);
      break;
    case Opcode::Mov:
      r[ins.rd] = a;
      break;
    case Opcode::Add:
      r[ins.rd] = a + b;
      break;
    case Opcode::Sub:
      r[ins.rd] = a - b;
      break;
    case Opcode::Mul:
      r[ins.rd] = a * b;
      break;
    case Opcode::And:
      r[ins.rd] = a & b;
      break;
    case Opcode::Or:
      r[ins.rd] = a | b;
      break;
    case Opcode::Xor:
      r[ins.rd] = a ^ b;
      break;
    case Opcode::Shl:
      r[ins.rd] = a << (b & 31);
      break;
    case Opcode::Shrl:
      r[ins.rd] = a >> (b & 31);
      break;
    case Opcode::Shra:
      r[ins.rd] = static_cast<uint32_t>(static_cast<int32_t>(a) >> (b & 31));
      break;
    case Opcode::Addi:
      r[ins.rd] = a + static_cast<uint32_t>(ins.imm);
      break;
    case Opcode::Cmpeq:
      r[ins.rd] = a == b;
      break;
    case Opcode::Cmplts:
      r[ins.rd] = static_cast<int32_t>(a) < static_cast<int32_t>(b);
      break;
    case Opcode::Cmpltu:
      r[ins.rd] = a < b;
      break;
    case Opcode::Beqz:
      if (a == 0 && !jump(pc, ins.imm))
        return trap("invalid jump target");
      break;
    case Opcode::Bnez:
      if (a != 0 && !jump(pc, ins.imm))
        return trap("invalid jump target");
      break;
    case Opcode::Jmp:
      if (!jump(pc, ins.imm))
        return trap("invalid jump target");
      break;
    case Opcode::Load: {
      uint32_t addr = a + static_cast<uint32_t>(ins.imm);
      if (!opts.machine.valid_word(addr))
        return trap("invalid memory access");
      r[ins.rd] = m.load32(addr);
      break;
    }
    case Opcode::Store: {
      uint32_t addr = a + static_cast<uint32_t>(ins.imm);
      if (!opts.machine.valid_word(addr))
        return trap("invalid memory access");
      m.store32(addr, b);
      break;
    }
    case Opcode::Call: {
      int64_t t = int64_t(pc) + ins.imm;
      if (t < 0 || t >= int64_t(n))
        return trap("invalid jump target");
      if (auto h = opts.hooks.find(static_cast<uint32_t>(t)); h != opts.hooks.end()) {
        h->second(m);
        m.pc = pc + 1;
        break;
      }
      if (m.call_stack.size() >= opts.machine.call_depth_max)
        return trap("call stack overflow");
      m.call_stack.push_back(pc + 1);
      m.pc = static_cast<uint32_t>(t);
      break;
    }
    case Opcode::Ret:
      if (m.call_stack.empty())
        return trap("call stack underflow");
      m.pc = m.call_stack.back();
      m.call_stack.pop_back();
      break;
    case Opcode::Out:
      m.channels_out[static_cast<uint32_t>(ins.imm)].push_back(
          static_cast<uint8_t>(a));
      break;
    case Opcode::In: {
      uint32_t ch = static_cast<uint32_t>(ins.imm);
      size_t &cur = m.channels_in_cursor[ch];
      r[ins.rd] = inputs.at(ch)[cur++];
      break;
    }
    }
  }
}

} // namespace duet
