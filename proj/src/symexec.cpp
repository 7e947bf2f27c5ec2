//===-- symexec.cpp - Forking symbolic executor --------------------------===//

#include "duet/symexec.hpp"

#include "duet/cfg.hpp"
#include "duet/error.hpp"

#include <deque>

namespace duet {

const char *to_string(TerminalKind k) {
  switch (k) {
  case TerminalKind::Halted:
    return "halted";
  case TerminalKind::AssertFailed:
    return "assert-failed";
  case TerminalKind::PostconditionFailed:
    return "postcondition-failed";
  case TerminalKind::ErrorDirective:
    return "error-directive";
  case TerminalKind::Trap:
    return "trap";
  case TerminalKind::LoopBound:
    return "loop-bound";
  case TerminalKind::InputExhausted:
    return "input-exhausted";
  }
  return "?";
}

std::optional<TerminalKind> terminal_kind_from_string(std::string_view s) {
  for (TerminalKind k : {TerminalKind::Halted, TerminalKind::AssertFailed,
                         TerminalKind::PostconditionFailed, TerminalKind::ErrorDirective,
                         TerminalKind::Trap, TerminalKind::LoopBound,
                         TerminalKind::InputExhausted})
    if (s == to_string(k))
      return k;
  return std::nullopt;
}

bool is_error_kind(TerminalKind k) {
  return k == TerminalKind::Trap || k == TerminalKind::AssertFailed ||
         k == TerminalKind::PostconditionFailed || k == TerminalKind::ErrorDirective;
}

const char *to_string(EffectSource s) {
  switch (s) {
  case EffectSource::Out:
    return "out";
  case EffectSource::Hook:
    return "hook";
  case EffectSource::Directive:
    return "directive";
  }
  return "?";
}

const char *to_string(EventKind k) {
  switch (k) {
  case EventKind::Instr:
    return "instr";
  case EventKind::RegWrite:
    return "reg-write";
  case EventKind::MemRead:
    return "mem-read";
  case EventKind::MemWrite:
    return "mem-write";
  case EventKind::Effect:
    return "effect";
  case EventKind::Hook:
    return "hook";
  case EventKind::Directive:
    return "directive";
  case EventKind::Breakpoint:
    return "breakpoint";
  }
  return "?";
}

namespace {

const char *const kFlagNames[] = {"error",         "hook-call",            "loop-bound",
                                  "assert-failed", "postcondition-failed", "error-directive"};

std::string hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

Term to_byte(Term e) {
  if (e.width() == 8)
    return e;
  return e.width() > 8 ? mk_extract(e, 7, 0) : mk_zext(e, 8);
}

Term to_word(Term e) { return e.width() == 32 ? e : mk_zext(e, 32); }

} // namespace

std::vector<std::string> flag_names(uint32_t flags) {
  std::vector<std::string> out;
  for (unsigned i = 0; i < 6; ++i)
    if (flags & (1u << i))
      out.emplace_back(kFlagNames[i]);
  return out;
}

uint32_t flag_from_name(std::string_view name) {
  for (unsigned i = 0; i < 6; ++i)
    if (name == kFlagNames[i])
      return 1u << i;
  return 0;
}

// --- SymState --------------------------------------------------------------

Term SymState::byte(uint32_t addr) const {
  auto it = mem.find(addr);
  return it == mem.end() ? mk_const(0, 8) : it->second;
}

Term SymState::read(uint32_t addr, unsigned bytes) const {
  std::vector<Term> bs;
  for (unsigned k = 0; k < bytes; ++k)
    bs.push_back(byte(addr + k));
  if (bytes == 1)
    return bs[0];
  // Bytes that are consecutive slices of one term recompose to that term.
  if (bs[0].kind() == Kind::Extract && bs[0].lo() % 8 == 0) {
    Term src = bs[0].kid(0);
    unsigned lo = bs[0].lo();
    bool ok = lo + 8 * bytes <= src.width();
    for (unsigned k = 1; ok && k < bytes; ++k)
      ok = bs[k].kind() == Kind::Extract && bs[k].kid(0) == src && bs[k].lo() == lo + 8 * k &&
           bs[k].hi() == lo + 8 * k + 7;
    if (ok)
      return lo == 0 && src.width() == 8 * bytes ? src : mk_extract(src, lo + 8 * bytes - 1, lo);
  }
  const unsigned w = 8 * bytes;
  Term acc = mk_zext(bs[0], w);
  for (unsigned k = 1; k < bytes; ++k)
    acc = mk_or(acc, mk_shl(mk_zext(bs[k], w), mk_const(8 * k, w)));
  return acc;
}

std::vector<Term> SymState::effects_on(uint32_t channel) const {
  std::vector<Term> out;
  for (const auto &e : effects)
    if (e.channel == channel)
      out.push_back(e.payload);
  return out;
}

std::set<uint32_t> SymState::channels() const {
  std::set<uint32_t> out;
  for (const auto &e : effects)
    out.insert(e.channel);
  return out;
}

std::vector<uint32_t> RunResult::path_to(uint32_t id) const {
  std::vector<uint32_t> path;
  std::optional<uint32_t> cur = id;
  while (cur) {
    path.push_back(*cur);
    cur = tree.at(*cur).parent;
  }
  return {path.rbegin(), path.rend()};
}

const SymState *RunResult::terminal_at(uint32_t node_id) const {
  for (const auto &t : terminals)
    if (t.node_id == node_id)
      return &t;
  return nullptr;
}

// --- Executor --------------------------------------------------------------

Executor::Executor(const Harness &h, Side side, SolverSession &solver)
    : h_(h), side_(side), prog_(h.program(side)), solver_(solver),
      leaders_(leaders_of(h, side)) {}

uint32_t Executor::new_node(uint32_t parent, uint32_t pc) {
  ExecNode n;
  n.id = static_cast<uint32_t>(nodes_.size());
  if (parent != UINT32_MAX) {
    n.parent = parent;
    nodes_[parent].children.push_back(n.id);
  }
  n.start_pc = pc;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

void Executor::count_state() {
  if (++states_created_ > h_.max_states)
    throw ExplorationLimit(std::string(to_string(side_)) + ": more than " +
                           std::to_string(h_.max_states) + " states; raise max_states or "
                           "tighten preconditions");
}

void Executor::add_constraint(SymState &s, Term c) {
  if (c.is_true())
    return;
  s.constraints.push_back(c);
  nodes_[s.node_id].constraints.push_back(c);
}

void Executor::event(const SymState &s, EventKind k, std::string text) {
  nodes_[s.node_id].events.push_back({k, s.pc, std::move(text)});
}

void Executor::terminate(SymState &s, TerminalKind k, std::string reason) {
  s.terminal = k;
  s.reason = std::move(reason);
  ExecNode &n = nodes_[s.node_id];
  n.terminal = k;
  n.reason = s.reason;
  switch (k) {
  case TerminalKind::Trap:
    n.flags |= kFlagError;
    break;
  case TerminalKind::LoopBound:
    n.flags |= kFlagLoopBound;
    break;
  case TerminalKind::AssertFailed:
    n.flags |= kFlagAssertFailed;
    break;
  case TerminalKind::PostconditionFailed:
    n.flags |= kFlagPostconditionFailed;
    break;
  case TerminalKind::ErrorDirective:
    n.flags |= kFlagErrorDirective;
    break;
  default:
    break;
  }
}

bool Executor::feasible(const std::vector<Term> &constraints) {
  for (Term c : constraints)
    if (c.is_false())
      return false;
  return solver_.check(Query(constraints)).result.sat;
}

PredEnv state_env(const Harness &h, const SymState &s) {
  PredEnv env;
  env.reg = [&s](unsigned i) { return s.regs[i]; };
  env.mem = [&s](uint32_t a, unsigned bytes) { return s.read(a, bytes); };
  env.ident = [&h](std::string_view n) -> std::optional<Term> {
    if (auto w = h.var_width(n))
      return mk_var(n, *w);
    return std::nullopt;
  };
  return env;
}

PredEnv Executor::env_for(const SymState &s) const { return state_env(h_, s); }

SymState Executor::initial_state() {
  SymState s;
  for (auto &r : s.regs)
    r = mk_const(0, 32);
  const Program &p = prog_;
  for (size_t i = 0; i < p.data.size(); ++i)
    s.mem[p.data_base + uint32_t(i)] = mk_const(p.data[i], 8);
  for (const auto &m : h_.init_memory)
    for (size_t i = 0; i < m.bytes.size(); ++i)
      s.mem[m.addr + uint32_t(i)] = mk_const(m.bytes[i], 8);
  for (const auto &in : h_.inputs) {
    Term v = mk_var(in.name, in.width);
    if (in.reg)
      s.regs[*in.reg] = to_word(v);
    if (in.mem_addr) {
      if (in.width <= 8)
        s.mem[*in.mem_addr] = to_byte(v);
      else
        for (unsigned k = 0; k < in.width / 8; ++k)
          s.mem[*in.mem_addr + k] = mk_extract(v, 8 * k + 7, 8 * k);
    }
  }
  s.pc = h_.spec(side_).entry_pc;
  s.node_id = new_node(UINT32_MAX, s.pc);
  count_state();
  PredEnv env = env_for(s);
  for (const auto &pre : h_.preconditions)
    add_constraint(s, pre.build(env));
  if (!feasible(s.constraints))
    throw ConfigError("/preconditions", "preconditions are unsatisfiable");
  s.block_history.push_back(s.pc);
  s.visit_counts[s.pc] = 1;
  return s;
}

void Executor::arrive(SymState &s, bool fresh_node) {
  if (!leaders_.count(s.pc))
    return;
  if (!fresh_node) {
    uint32_t id = new_node(s.node_id, s.pc);
    s.parent_id = s.node_id;
    s.node_id = id;
  }
  s.block_history.push_back(s.pc);
  if (++s.visit_counts[s.pc] > h_.loop_bound)
    terminate(s, TerminalKind::LoopBound,
              "block " + std::to_string(s.pc) + " visited more than " +
                  std::to_string(h_.loop_bound) + " times");
}

void Executor::write_reg(SymState &s, unsigned r, Term v) {
  s.regs[r] = v;
  event(s, EventKind::RegWrite, "r" + std::to_string(r) + " = " + pretty_short(v));
}

void Executor::emit(SymState &s, uint32_t ch, Term payload, EffectSource src) {
  s.effects.push_back({ch, payload, s.node_id, src});
  event(s, EventKind::Effect, "ch" + std::to_string(ch) + " <- " + pretty_short(payload));
}

std::optional<uint32_t> Executor::concretize(const SymState &s, Term addr) {
  if (addr.is_const())
    return addr.value();
  VarSet extra = free_vars(addr);
  CheckResult r = solver_.check(Query(s.constraints, extra));
  if (!r.result.sat)
    return std::nullopt;
  uint32_t v = eval_or_zero(addr, r.result.model);
  std::vector<Term> other = s.constraints;
  other.push_back(mk_ne(addr, mk_const(v, 32)));
  if (solver_.check(Query(other)).result.sat)
    return std::nullopt;
  return v;
}

std::vector<SymState> Executor::check_condition(SymState s, Term cond, TerminalKind fail_kind,
                                                const std::string &message) {
  if (cond.is_true())
    return {std::move(s)};
  std::vector<Term> ok = s.constraints, bad = s.constraints;
  ok.push_back(cond);
  bad.push_back(mk_not(cond));
  const bool ok_sat = feasible(ok), bad_sat = feasible(bad);
  if (ok_sat && bad_sat) {
    SymState cont = s, fail = std::move(s);
    for (SymState *c : {&cont, &fail}) {
      c->parent_id = c->node_id;
      c->node_id = new_node(c->node_id, c->pc);
      count_state();
    }
    add_constraint(cont, cond);
    add_constraint(fail, mk_not(cond));
    terminate(fail, fail_kind, message);
    std::vector<SymState> out;
    out.push_back(std::move(cont));
    out.push_back(std::move(fail));
    return out;
  }
  if (ok_sat)
    return {std::move(s)};
  if (bad_sat) {
    terminate(s, fail_kind, message);
    return {std::move(s)};
  }
  return {};
}

std::vector<SymState> Executor::apply_directives(SymState s) {
  std::vector<SymState> states;
  states.push_back(std::move(s));
  for (const Directive &d : h_.directives_of(side_)) {
    if (d.pc != states.front().pc || d.kind == DirectiveKind::Postcondition)
      continue;
    std::vector<SymState> next;
    for (SymState &st : states) {
      if (st.terminal) {
        next.push_back(std::move(st));
        continue;
      }
      std::string label = std::string(to_string(d.kind)) + (d.expr ? " " + d.expr->text() : "");
      event(st, EventKind::Directive, label);
      switch (d.kind) {
      case DirectiveKind::Assume: {
        Term c = d.expr->build(env_for(st));
        std::vector<Term> cs = st.constraints;
        cs.push_back(c);
        if (feasible(cs)) {
          add_constraint(st, c);
          next.push_back(std::move(st));
        }
        break;
      }
      case DirectiveKind::Assert: {
        Term c = d.expr->build(env_for(st));
        for (auto &r : check_condition(std::move(st), c, TerminalKind::AssertFailed,
                                       d.message.empty() ? "assertion failed: " + d.expr->text()
                                                         : d.message))
          next.push_back(std::move(r));
        break;
      }
      case DirectiveKind::Error:
        terminate(st, TerminalKind::ErrorDirective,
                  d.message.empty() ? "error directive at " + d.location : d.message);
        next.push_back(std::move(st));
        break;
      case DirectiveKind::VirtualPrint:
        emit(st, 2, to_byte(d.expr->build(env_for(st), std::nullopt)), EffectSource::Directive);
        next.push_back(std::move(st));
        break;
      case DirectiveKind::BreakpointLog: {
        std::string snap = d.message.empty() ? "" : d.message + ":";
        for (unsigned r = 0; r < kNumRegs; ++r)
          snap += " r" + std::to_string(r) + "=" + pretty_short(st.regs[r], 60);
        event(st, EventKind::Breakpoint, snap);
        next.push_back(std::move(st));
        break;
      }
      case DirectiveKind::Postcondition:
        break;
      }
    }
    states = std::move(next);
    if (states.empty())
      break;
  }
  return states;
}

std::vector<SymState> Executor::fork(SymState s, Term cond, uint32_t taken_pc, bool taken_valid) {
  const uint32_t pc = s.pc;
  auto go = [&](SymState &st, bool taken, bool fresh) {
    if (taken && !taken_valid) {
      terminate(st, TerminalKind::Trap, "invalid jump target");
      return;
    }
    st.pc = taken ? taken_pc : pc + 1;
    arrive(st, fresh);
  };
  if (cond.is_const()) {
    go(s, cond.is_true(), false);
    return {std::move(s)};
  }
  std::vector<Term> ct = s.constraints, cf = s.constraints;
  ct.push_back(cond);
  cf.push_back(mk_not(cond));
  const bool t_sat = feasible(ct), f_sat = feasible(cf);
  if (t_sat && f_sat) {
    std::vector<SymState> out;
    for (bool taken : {true, false}) {
      SymState c = s;
      c.parent_id = s.node_id;
      c.node_id = new_node(s.node_id, taken ? (taken_valid ? taken_pc : pc) : pc + 1);
      count_state();
      add_constraint(c, taken ? cond : mk_not(cond));
      go(c, taken, true);
      out.push_back(std::move(c));
    }
    return out;
  }
  if (!t_sat && !f_sat)
    return {};
  add_constraint(s, t_sat ? cond : mk_not(cond));
  go(s, t_sat, false);
  return {std::move(s)};
}

std::vector<SymState> Executor::step(SymState s) {
  if (!s.directives_done) {
    s.directives_done = true;
    std::vector<SymState> out = apply_directives(std::move(s));
    if (out.size() != 1 || out[0].terminal)
      return out;
    s = std::move(out[0]);
  }
  const uint32_t n = static_cast<uint32_t>(prog_.code.size());
  if (s.pc >= n) {
    terminate(s, TerminalKind::Trap, "pc out of range");
    return {std::move(s)};
  }
  const uint32_t pc = s.pc;
  const Instruction &ins = prog_.code[pc];

  if (ins.op == Opcode::In) {
    uint32_t ch = uint32_t(ins.imm);
    if (s.in_cursors[ch] >= h_.max_in_bytes) {
      terminate(s, TerminalKind::InputExhausted,
                "channel " + std::to_string(ch) + " read past " +
                    std::to_string(h_.max_in_bytes) + " bytes");
      return {std::move(s)};
    }
  }

  ExecNode &node = nodes_[s.node_id];
  if (!node.first_pc)
    node.first_pc = pc;
  node.last_pc = pc;
  event(s, EventKind::Instr, std::to_string(pc) + ": " + disassemble(ins));
  s.directives_done = false;

  const Term a = s.regs[ins.rs], b = s.regs[ins.rt];
  auto next = [&]() -> std::vector<SymState> {
    s.pc = pc + 1;
    arrive(s, false);
    return {std::move(s)};
  };
  auto trap = [&](std::string why) -> std::vector<SymState> {
    terminate(s, TerminalKind::Trap, std::move(why));
    return {std::move(s)};
  };
  auto shamt = [&]() { return mk_and(b, mk_const(31, 32)); };

  switch (ins.op) {
  case Opcode::Halt:
    terminate(s, TerminalKind::Halted, "halt");
    return {std::move(s)};
  case Opcode::Const:
    write_reg(s, ins.rd, mk_const(uint32_t(ins.imm), 32));
    return next();
  case Opcode::Mov:
    write_reg(s, ins.rd, a);
    return next();
  case Opcode::Add:
    write_reg(s, ins.rd, mk_add(a, b));
    return next();
  case Opcode::Sub:
    write_reg(s, ins.rd, mk_sub(a, b));
    return next();
  case Opcode::Mul:
    write_reg(s, ins.rd, mk_mul(a, b));
    return next();
  case Opcode::And:
    write_reg(s, ins.rd, mk_and(a, b));
    return next();
  case Opcode::Or:
    write_reg(s, ins.rd, mk_or(a, b));
    return next();
  case Opcode::Xor:
    write_reg(s, ins.rd, mk_xor(a, b));
    return next();
  case Opcode::Shl:
    write_reg(s, ins.rd, mk_shl(a, shamt()));
    return next();
  case Opcode::Shrl:
    write_reg(s, ins.rd, mk_lshr(a, shamt()));
    return next();
  case Opcode::Shra:
    write_reg(s, ins.rd, mk_ashr(a, shamt()));
    return next();
  case Opcode::Addi:
    write_reg(s, ins.rd, mk_add(a, mk_const(uint32_t(ins.imm), 32)));
    return next();
  case Opcode::Cmpeq:
    write_reg(s, ins.rd, mk_zext(mk_eq(a, b), 32));
    return next();
  case Opcode::Cmplts:
    write_reg(s, ins.rd, mk_zext(mk_slt(a, b), 32));
    return next();
  case Opcode::Cmpltu:
    write_reg(s, ins.rd, mk_zext(mk_ult(a, b), 32));
    return next();
  case Opcode::Beqz:
  case Opcode::Bnez: {
    Term z = mk_eq(a, mk_const(0, 32));
    auto t = prog_.target_of(pc);
    return fork(std::move(s), ins.op == Opcode::Beqz ? z : mk_not(z), t.value_or(0),
                t.has_value());
  }
  case Opcode::Jmp: {
    auto t = prog_.target_of(pc);
    if (!t)
      return trap("invalid jump target");
    s.pc = *t;
    arrive(s, false);
    return {std::move(s)};
  }
  case Opcode::Load:
  case Opcode::Store: {
    Term at = mk_add(a, mk_const(uint32_t(ins.imm), 32));
    auto addr = concretize(s, at);
    if (!addr)
      return trap("unconstrained address");
    if (!h_.machine.valid_word(*addr))
      return trap("invalid memory access");
    if (ins.op == Opcode::Load) {
      Term v = s.read(*addr, 4);
      event(s, EventKind::MemRead, "m32[" + hex(*addr) + "] -> " + pretty_short(v));
      write_reg(s, ins.rd, v);
    } else {
      for (unsigned k = 0; k < 4; ++k) {
        s.mem[*addr + k] = mk_extract(b, 8 * k + 7, 8 * k);
        s.written.insert(*addr + k);
      }
      event(s, EventKind::MemWrite, "m32[" + hex(*addr) + "] <- " + pretty_short(b));
    }
    return next();
  }
  case Opcode::Call: {
    auto t = prog_.target_of(pc);
    if (!t)
      return trap("invalid jump target");
    for (const Hook &hk : h_.hooks_of(side_)) {
      if (hk.pc != *t)
        continue;
      uint32_t k = s.hook_cursors[hk.name]++;
      nodes_[s.node_id].flags |= kFlagHookCall;
      event(s, EventKind::Hook, hk.name + " #" + std::to_string(k));
      PredEnv env = env_for(s);
      if (hk.effect)
        emit(s, *hk.effect_channel, to_byte(hk.effect->build(env, std::nullopt)),
             EffectSource::Hook);
      Term ret = hk.ret ? hk.ret->build(env, std::nullopt) : mk_var(hk.var_name(k), hk.ret_width);
      write_reg(s, 0, to_word(ret));
      return next();
    }
    if (s.call_stack.size() >= h_.call_depth_max)
      return trap("call stack overflow");
    s.call_stack.push_back({pc + 1, *t});
    s.pc = *t;
    arrive(s, false);
    return {std::move(s)};
  }
  case Opcode::Ret: {
    if (s.call_stack.empty())
      return trap("call stack underflow");
    Frame f = s.call_stack.back();
    s.call_stack.pop_back();
    s.pc = f.return_pc;
    std::vector<SymState> states;
    states.push_back(std::move(s));
    for (const Directive &d : h_.directives_of(side_)) {
      if (d.kind != DirectiveKind::Postcondition || d.pc != f.callee)
        continue;
      std::vector<SymState> nxt;
      for (SymState &st : states) {
        if (st.terminal) {
          nxt.push_back(std::move(st));
          continue;
        }
        event(st, EventKind::Directive, "postcondition " + d.expr->text());
        Term c = d.expr->build(env_for(st));
        for (auto &r : check_condition(std::move(st), c, TerminalKind::PostconditionFailed,
                                       d.message.empty() ? "postcondition failed: " + d.expr->text()
                                                         : d.message))
          nxt.push_back(std::move(r));
      }
      states = std::move(nxt);
    }
    for (SymState &st : states)
      if (!st.terminal)
        arrive(st, states.size() > 1);
    return states;
  }
  case Opcode::Out:
    emit(s, uint32_t(ins.imm), mk_extract(a, 7, 0), EffectSource::Out);
    return next();
  case Opcode::In: {
    uint32_t ch = uint32_t(ins.imm);
    uint32_t k = s.in_cursors[ch]++;
    write_reg(s, ins.rd, mk_zext(mk_var("in" + std::to_string(ch) + "_" + std::to_string(k), 8), 32));
    return next();
  }
  }
  return trap("invalid opcode");
}

RunResult Executor::finish(std::vector<SymState> terminals) {
  RunResult r;
  r.side = side_;
  std::sort(terminals.begin(), terminals.end(),
            [](const SymState &x, const SymState &y) { return x.node_id < y.node_id; });
  for (auto &n : nodes_)
    n.dropped = true;
  for (const auto &t : terminals) {
    std::optional<uint32_t> cur = t.node_id;
    while (cur && nodes_[*cur].dropped) {
      nodes_[*cur].dropped = false;
      cur = nodes_[*cur].parent;
    }
  }
  for (auto &n : nodes_) {
    std::vector<uint32_t> live;
    for (uint32_t c : n.children)
      if (!nodes_[c].dropped)
        live.push_back(c);
    n.children = std::move(live);
  }
  r.tree = nodes_;
  r.terminals = std::move(terminals);
  StaticCfg cfg = build_cfg(prog_);
  r.blocks = cfg.block_starts.size();
  r.cyclomatic = cyclomatic_complexity(prog_);
  r.states_created = states_created_;
  return r;
}

RunResult execute_complete(const Harness &h, Side side, SolverSession &solver) {
  Executor ex(h, side, solver);
  std::deque<SymState> frontier;
  frontier.push_back(ex.initial_state());
  std::vector<SymState> terminals;
  while (!frontier.empty()) {
    SymState s = std::move(frontier.front());
    frontier.pop_front();
    if (s.terminal) {
      terminals.push_back(std::move(s));
      continue;
    }
    for (SymState &c : ex.step(std::move(s)))
      frontier.push_back(std::move(c));
  }
  return ex.finish(std::move(terminals));
}

} // namespace duet
