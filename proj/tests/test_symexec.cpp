#include "duet/error.hpp"
#include "duet/symexec.hpp"

#include "fixture.hpp"

#include <gtest/gtest.h>

using namespace duet;
using namespace duet::testgen;
using nlohmann::json;

namespace {

RunResult run(const Harness &h, Side side = Side::Pre) {
  SolverSession s(h.max_bits, h.caches);
  return execute_complete(h, side, s);
}

VarSet declared(const Harness &h) {
  VarSet vs;
  for (const auto &in : h.inputs)
    vs[in.name] = in.width;
  return vs;
}

bool holds(const SymState &t, const Assignment &a) {
  for (Term c : t.constraints)
    if (!eval_or_zero(c, a))
      return false;
  return true;
}

StopReason expected_stop(TerminalKind k) {
  switch (k) {
  case TerminalKind::Trap:
    return StopReason::Trap;
  case TerminalKind::InputExhausted:
    return StopReason::InputExhausted;
  default:
    return StopReason::Halt;
  }
}

// Replays a model of the terminal's path constraints and checks that the
// concrete run follows the same blocks and ends in the same state.
void check_replay(const Harness &h, Side side, const SymState &t) {
  SatResult r = is_sat(Query(t.constraints, declared(h)), 64);
  ASSERT_TRUE(r.sat) << "terminal " << t.node_id << " has infeasible constraints";
  ConcreteRun cr = replay(h, side, r.model);
  std::vector<uint32_t> hist = block_history_of(leaders_of(h, side), cr);
  if (t.terminal == TerminalKind::LoopBound) {
    ASSERT_LE(t.block_history.size(), hist.size());
    EXPECT_TRUE(std::equal(t.block_history.begin(), t.block_history.end(), hist.begin()));
    return;
  }
  EXPECT_EQ(hist, t.block_history);
  EXPECT_EQ(cr.reason, expected_stop(*t.terminal)) << t.reason << " / " << cr.trap_reason;
  if (t.terminal == TerminalKind::Trap)
    EXPECT_EQ(cr.trap_reason, t.reason);
  for (unsigned i = 0; i < kNumRegs; ++i)
    EXPECT_EQ(eval_or_zero(t.regs[i], r.model), cr.state.regs[i]) << "r" << i;
  for (uint32_t ch : {0u, 1u}) {
    std::vector<uint8_t> sym;
    for (Term e : t.effects_on(ch))
      sym.push_back(uint8_t(eval_or_zero(e, r.model)));
    auto it = cr.state.channels_out.find(ch);
    EXPECT_EQ(sym, it == cr.state.channels_out.end() ? std::vector<uint8_t>{} : it->second);
  }
  for (uint32_t a : t.written)
    EXPECT_EQ(eval_or_zero(t.byte(a), r.model), cr.state.byte(a)) << "byte " << a;
}

json random_config() {
  json j;
  j["inputs"] = json::parse(kRandomProgramInputs);
  j["loop_bound"] = 3;
  j["max_in_bytes"] = 2;
  j["max_states"] = 5000;
  j["solver"] = {{"max_bits", 64}};
  return j;
}

} // namespace

TEST(SymExec, StraightLineHasOneHaltedTerminal) {
  Harness h = make_harness("const r1, 5\nadd r2, r1, r1\nout 0, r2\nhalt");
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  const SymState &t = r.terminals[0];
  EXPECT_EQ(t.terminal, TerminalKind::Halted);
  EXPECT_TRUE(t.constraints.empty());
  EXPECT_EQ(t.regs[2], mk_const(10, 32));
  ASSERT_EQ(t.effects.size(), 1u);
  EXPECT_EQ(t.effects[0].payload, mk_const(10, 8));
  EXPECT_EQ(r.tree.size(), 1u);
}

TEST(SymExec, TwoIndependentBitsGiveFourPaths) {
  Harness h = make_harness(R"(
    beqz r1, a
    out 0, r1
  a: beqz r2, b
    out 0, r2
  b: halt)",
                           {{"inputs", json::parse(R"([
      {"name": "p", "width": 1, "bind": {"reg": 1}},
      {"name": "q", "width": 1, "bind": {"reg": 2}}])")}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 4u);
  std::set<std::pair<uint32_t, uint32_t>> seen;
  for (const auto &t : r.terminals) {
    EXPECT_EQ(t.terminal, TerminalKind::Halted);
    SatResult m = is_sat(Query(t.constraints, declared(h)));
    ASSERT_TRUE(m.sat);
    seen.insert({m.model["p"], m.model["q"]});
    EXPECT_EQ(t.effects.size(), m.model["p"] + m.model["q"]);
    check_replay(h, Side::Pre, t);
  }
  EXPECT_EQ(seen.size(), 4u);
  for (size_t i = 1; i < r.terminals.size(); ++i)
    EXPECT_LT(r.terminals[i - 1].node_id, r.terminals[i].node_id);
}

TEST(SymExec, InfiniteLoopStopsAtBound) {
  Harness h = make_harness("l: jmp l", {{"loop_bound", 32}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  const SymState &t = r.terminals[0];
  EXPECT_EQ(t.terminal, TerminalKind::LoopBound);
  EXPECT_EQ(t.block_history.size(), 33u);
  EXPECT_EQ(t.visit_counts.at(0), 33u);
  EXPECT_TRUE(r.node(t.node_id).flags & kFlagLoopBound);
}

TEST(SymExec, InputDependentLoopForksPerIteration) {
  // Counts r1 down to zero; x < 5 keeps every path under the bound.
  Harness h = make_harness(R"(
  top: beqz r1, done
    addi r1, r1, -1
    addi r0, r0, 1
    jmp top
  done: halt)",
                           {{"inputs", json::parse(kRandomProgramInputs)},
                            {"preconditions", {"x <u 5"}}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 5u);
  for (const auto &t : r.terminals) {
    EXPECT_EQ(t.terminal, TerminalKind::Halted);
    SatResult m = is_sat(Query(t.constraints, declared(h)));
    ASSERT_TRUE(m.sat);
    EXPECT_EQ(eval_or_zero(t.regs[0], m.model), m.model["x"]);
    check_replay(h, Side::Pre, t);
  }
}

TEST(SymExec, BranchOnConstantDoesNotFork) {
  Harness h = make_harness("const r1, 0\nbeqz r1, t\nout 0, r1\nt: halt");
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_TRUE(r.terminals[0].effects.empty());
  EXPECT_EQ(r.states_created, 1u);
}

TEST(SymExec, OneSidedBranchKeepsImpliedConstraint) {
  Harness h = make_harness("beqz r1, t\nhalt\nt: halt",
                           {{"inputs", json::parse(kRandomProgramInputs)},
                            {"preconditions", {"x == 0"}}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].pc, 2u);
  EXPECT_EQ(r.terminals[0].constraints.size(), 2u);
}

TEST(SymExec, AssertForksIntoFailureTerminal) {
  Harness h = make_harness("out 0, r1\nhalt",
                           {{"inputs", json::parse(kRandomProgramInputs)},
                            {"directives",
                             {{"pre",
                               {{{"kind", "assert"}, {"location", "1"}, {"expr", "x <u 10"}}}}}}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 2u);
  int failed = 0;
  for (const auto &t : r.terminals) {
    SatResult m = is_sat(Query(t.constraints, declared(h)));
    ASSERT_TRUE(m.sat);
    if (t.terminal == TerminalKind::AssertFailed) {
      ++failed;
      EXPECT_GE(m.model["x"], 10u);
      EXPECT_TRUE(r.node(t.node_id).flags & kFlagAssertFailed);
      EXPECT_EQ(t.effects.size(), 1u);
    } else {
      EXPECT_EQ(t.terminal, TerminalKind::Halted);
      EXPECT_LT(m.model["x"], 10u);
    }
  }
  EXPECT_EQ(failed, 1);
}

TEST(SymExec, AssertThatAlwaysHoldsDoesNotFork) {
  Harness h = make_harness("halt", {{"inputs", json::parse(kRandomProgramInputs)},
                                    {"directives",
                                     {{"pre",
                                       {{{"kind", "assert"},
                                         {"location", "0"},
                                         {"expr", "x <=u 255"}}}}}}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].terminal, TerminalKind::Halted);
}

TEST(SymExec, AssumeDiscardsAndConstrains) {
  json dirs = {{"pre",
                {{{"kind", "assume"}, {"location", "t"}, {"expr", "x == 1"}},
                 {{"kind", "assume"}, {"location", "1"}, {"expr", "x == 7"}}}}};
  Harness h = make_harness("beqz r1, t\nhalt\nt: halt",
                           {{"inputs", json::parse(kRandomProgramInputs)}, {"directives", dirs}});
  RunResult r = run(h);
  // The taken side needs x == 0 and x == 1, so it is discarded.
  ASSERT_EQ(r.terminals.size(), 1u);
  SatResult m = is_sat(Query(r.terminals[0].constraints));
  ASSERT_TRUE(m.sat);
  EXPECT_EQ(m.model["x"], 7u);
  size_t dropped = 0;
  for (const auto &n : r.tree)
    dropped += n.dropped;
  EXPECT_EQ(dropped, 1u);
  for (const auto &n : r.tree)
    for (uint32_t c : n.children)
      EXPECT_FALSE(r.node(c).dropped);
}

TEST(SymExec, ErrorAndVirtualPrintDirectives) {
  json dirs = {{"pre",
                {{{"kind", "virtual-print"}, {"location", "0"}, {"expr", "x + 1"}},
                 {{"kind", "error"}, {"location", "1"}, {"message", "unreachable"}}}}};
  Harness h = make_harness("nop: addi r0, r0, 0\nhalt",
                           {{"inputs", json::parse(kRandomProgramInputs)}, {"directives", dirs}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  const SymState &t = r.terminals[0];
  EXPECT_EQ(t.terminal, TerminalKind::ErrorDirective);
  EXPECT_EQ(t.reason, "unreachable");
  ASSERT_EQ(t.effects_on(2).size(), 1u);
  EXPECT_EQ(t.effects[0].source, EffectSource::Directive);
  EXPECT_EQ(eval(t.effects[0].payload, {{"x", 4}}), 5u);
}

TEST(SymExec, PostconditionCheckedOnReturn) {
  const char *prog = R"(
  main: call f
    halt
  f: add r0, r1, r1
    ret)";
  json dirs = {{"pre", {{{"kind", "postcondition"}, {"location", "f"}, {"expr", "r0 <u 100"}}}}};
  Harness h =
      make_harness(prog, {{"inputs", json::parse(kRandomProgramInputs)}, {"directives", dirs}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 2u);
  int failed = 0;
  for (const auto &t : r.terminals) {
    if (t.terminal == TerminalKind::PostconditionFailed) {
      ++failed;
      EXPECT_EQ(t.pc, 1u);
      SatResult m = is_sat(Query(t.constraints));
      ASSERT_TRUE(m.sat);
      EXPECT_GE(2 * m.model["x"], 100u);
    } else {
      check_replay(h, Side::Pre, t);
    }
  }
  EXPECT_EQ(failed, 1);
}

TEST(SymExec, HookReturnsFreshVariable) {
  const char *prog = R"(
  main: call getc
    out 0, r0
    call getc
    add r0, r0, r0
    halt
  getc: halt)";
  json hooks = {{"pre", {{{"name", "getc"}, {"target", "getc"}, {"width", 8},
                          {"effect", {{"channel", 3}, {"expr", "r1"}}}}}}};
  Harness h = make_harness(prog, {{"inputs", json::parse(kRandomProgramInputs)}, {"hooks", hooks}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  const SymState &t = r.terminals[0];
  EXPECT_EQ(t.terminal, TerminalKind::Halted);
  Assignment a{{"x", 9}, {"hook_getc_0", 3}, {"hook_getc_1", 200}};
  EXPECT_EQ(eval(t.regs[0], a), 400u);
  EXPECT_EQ(eval(t.effects_on(0).at(0), a), 3u);
  ASSERT_EQ(t.effects_on(3).size(), 2u);
  EXPECT_EQ(eval(t.effects_on(3)[0], a), 9u);
  EXPECT_EQ(t.effects_on(3)[0].width(), 8u);
  EXPECT_TRUE(r.node(0).flags & kFlagHookCall);
  ConcreteRun cr = replay(h, Side::Pre, a);
  EXPECT_EQ(cr.state.regs[0], 400u);
  EXPECT_EQ(cr.state.channels_out[3], (std::vector<uint8_t>{9, 9}));
}

TEST(SymExec, SymbolicAddressTrapsUnlessPinned) {
  const char *prog = "load r0, [r1+0x100]\nhalt";
  Harness loose = make_harness(prog, {{"inputs", json::parse(kRandomProgramInputs)}});
  RunResult r = run(loose);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].terminal, TerminalKind::Trap);
  EXPECT_EQ(r.terminals[0].reason, "unconstrained address");

  Harness pinned = make_harness(prog, {{"inputs", json::parse(kRandomProgramInputs)},
                                       {"preconditions", {"x == 4"}},
                                       {"init_memory", {{{"addr", 0x104}, {"bytes", {1, 2}}}}}});
  r = run(pinned);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].terminal, TerminalKind::Halted);
  EXPECT_EQ(r.terminals[0].regs[0], mk_const(0x201, 32));
}

TEST(SymExec, MemoryInputRoundTripsThroughLoad) {
  Harness h = make_harness("load r0, [r7+0x100]\nhalt",
                           {{"inputs", json::parse(R"([{"name": "w", "width": 32,
                                                         "bind": {"mem": 256}}])")}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].regs[0], mk_var("w", 32));
}

TEST(SymExec, TrapsMatchInterpreter) {
  struct Case {
    const char *prog;
    const char *reason;
  } cases[] = {
      {"ret", "call stack underflow"},
      {"const r1, 0\nload r0, [r1+0xfffe]", "invalid memory access"},
      {"addi r0, r0, 1", "pc out of range"},
      {"f: call f", "call stack overflow"},
  };
  for (const auto &c : cases) {
    Harness h = make_harness(c.prog, {{"loop_bound", 1000}});
    RunResult r = run(h);
    ASSERT_EQ(r.terminals.size(), 1u) << c.prog;
    EXPECT_EQ(r.terminals[0].terminal, TerminalKind::Trap);
    EXPECT_EQ(r.terminals[0].reason, c.reason);
    check_replay(h, Side::Pre, r.terminals[0]);
  }
}

TEST(SymExec, InputExhaustion) {
  Harness h = make_harness("in r0, 0\nin r1, 0\nhalt", {{"max_in_bytes", 1}});
  RunResult r = run(h);
  ASSERT_EQ(r.terminals.size(), 1u);
  EXPECT_EQ(r.terminals[0].terminal, TerminalKind::InputExhausted);
  EXPECT_EQ(r.terminals[0].regs[0], mk_zext(mk_var("in0_0", 8), 32));
}

TEST(SymExec, UnsatisfiablePreconditionsRejected) {
  Harness h = make_harness("halt", {{"inputs", json::parse(kRandomProgramInputs)},
                                    {"preconditions", {"x == 1", "x == 2"}}});
  EXPECT_THROW(run(h), ConfigError);
}

TEST(SymExec, StateCeilingThrows) {
  std::string prog;
  for (int i = 0; i < 8; ++i)
    prog += "in r0, 0\nbeqz r0, l" + std::to_string(i) + "\nl" + std::to_string(i) + ": ";
  prog += "halt";
  Harness h = make_harness(prog, {{"max_in_bytes", 8}, {"max_states", 50}, {"solver", {{"max_bits", 64}}}});
  EXPECT_THROW(run(h), ExplorationLimit);
  h.max_states = 1000;
  EXPECT_EQ(run(h).terminals.size(), 256u);
}

TEST(SymExec, NodesStartAtLeadersAndForks) {
  Harness h = make_harness("top: beqz r1, top2\nhalt\ntop2: addi r1, r1, 0\nhalt",
                           {{"inputs", json::parse(kRandomProgramInputs)}});
  RunResult r = run(h);
  ASSERT_EQ(r.tree.size(), 3u);
  EXPECT_EQ(r.tree[0].children, (std::vector<uint32_t>{1, 2}));
  EXPECT_EQ(r.tree[1].start_pc, 2u);
  EXPECT_EQ(r.tree[2].start_pc, 1u);
  EXPECT_EQ(r.path_to(2), (std::vector<uint32_t>{0, 2}));
  EXPECT_EQ(r.tree[1].constraints.size(), 1u);
}

// Random programs: every terminal's path condition replays to the same
// path and state, and random inputs satisfy exactly one path condition.
TEST(SymExecProperty, PathConditionsAreSoundAndPartitionInputs) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::string prog = random_program(rng, 8 + rng.below(9));
    Harness h = make_harness(prog, random_config());
    RunResult r;
    try {
      r = run(h);
    } catch (const ExplorationLimit &) {
      continue;
    }
    ASSERT_FALSE(r.terminals.empty()) << prog;
    for (const auto &t : r.terminals) {
      SCOPED_TRACE(prog);
      check_replay(h, Side::Pre, t);
      // Effects are attached to nodes along the path, in path order.
      std::vector<uint32_t> path = r.path_to(t.node_id);
      size_t pos = 0;
      for (const auto &e : t.effects) {
        while (pos < path.size() && path[pos] != e.node)
          ++pos;
        EXPECT_LT(pos, path.size()) << "effect node off path";
      }
    }
    for (int k = 0; k < 40; ++k) {
      Assignment a{{"x", rng.value(8)}, {"y", rng.value(8)},
                   {"in0_0", rng.value(8)}, {"in0_1", rng.value(8)}};
      int n = 0;
      for (const auto &t : r.terminals)
        n += holds(t, a);
      EXPECT_EQ(n, 1) << prog;
    }
    ++checked;
  }
  EXPECT_GE(checked, 250);
}

TEST(SymExecProperty, ReadRecomposesSlices) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    SymState s;
    Term w = mk_var("w", 32);
    for (unsigned k = 0; k < 4; ++k)
      s.mem[0x10 + k] = mk_extract(w, 8 * k + 7, 8 * k);
    if (rng.coin())
      s.mem[0x10 + rng.below(4)] = mk_const(rng.value(8), 8);
    uint32_t v = rng.next();
    Assignment a{{"w", v}};
    for (unsigned off = 0; off < 3; ++off)
      for (unsigned n : {1u, 2u, 4u}) {
        uint64_t want = 0;
        for (unsigned k = 0; k < n; ++k)
          want |= uint64_t(eval_or_zero(s.byte(0x10 + off + k), a)) << (8 * k);
        EXPECT_EQ(eval(s.read(0x10 + off, n), a), want);
      }
  }
  SymState s;
  Term w = mk_var("w", 32);
  for (unsigned k = 0; k < 4; ++k)
    s.mem[k] = mk_extract(w, 8 * k + 7, 8 * k);
  EXPECT_EQ(s.read(0, 4), w);
  EXPECT_EQ(s.read(1, 2), mk_extract(w, 23, 8));
}
