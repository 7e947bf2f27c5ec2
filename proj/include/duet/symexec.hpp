//===-- symexec.hpp - Forking symbolic executor --------------------------===//
//
// States carry term-valued registers and byte memory over the shared input
// variables. Every fork asks the solver which sides are feasible, so each
// live state's path constraints are satisfiable. The execution tree has one
// node per basic block visit: a node starts at a fork child or on arrival at
// a block leader.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/harness.hpp"
#include "duet/solver.hpp"
#include "duet/term.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace duet {

enum class TerminalKind {
  Halted,
  AssertFailed,
  PostconditionFailed,
  ErrorDirective,
  Trap,
  LoopBound,
  InputExhausted,
};
const char *to_string(TerminalKind k);
std::optional<TerminalKind> terminal_kind_from_string(std::string_view s);
/// Trap, failed assert/postcondition and error directives.
bool is_error_kind(TerminalKind k);

enum class EffectSource { Out, Hook, Directive };
const char *to_string(EffectSource s);

struct EffectRecord {
  uint32_t channel = 0;
  Term payload; // width 8
  uint32_t node = 0;
  EffectSource source = EffectSource::Out;
};

struct Frame {
  uint32_t return_pc = 0;
  uint32_t callee = 0;
};

struct SymState {
  std::array<Term, kNumRegs> regs;
  std::map<uint32_t, Term> mem; // byte terms; absent bytes read as zero
  std::set<uint32_t> written;
  uint32_t pc = 0;
  std::vector<Term> constraints;
  std::vector<Frame> call_stack;
  std::vector<EffectRecord> effects; // in emission order, all channels
  std::vector<uint32_t> block_history;
  std::map<uint32_t, uint32_t> visit_counts;
  std::map<uint32_t, uint32_t> in_cursors;
  std::map<std::string, uint32_t> hook_cursors;
  uint32_t node_id = 0;
  std::optional<uint32_t> parent_id;
  std::optional<TerminalKind> terminal;
  std::string reason;
  bool directives_done = false; // directives at pc already applied

  Term byte(uint32_t addr) const;
  /// Little-endian read of 1, 2 or 4 bytes.
  Term read(uint32_t addr, unsigned bytes) const;
  std::vector<Term> effects_on(uint32_t channel) const;
  std::set<uint32_t> channels() const;
};

enum NodeFlag : uint32_t {
  kFlagError = 1u << 0,
  kFlagHookCall = 1u << 1,
  kFlagLoopBound = 1u << 2,
  kFlagAssertFailed = 1u << 3,
  kFlagPostconditionFailed = 1u << 4,
  kFlagErrorDirective = 1u << 5,
};
std::vector<std::string> flag_names(uint32_t flags);
uint32_t flag_from_name(std::string_view name);

enum class EventKind { Instr, RegWrite, MemRead, MemWrite, Effect, Hook, Directive, Breakpoint };
const char *to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::Instr;
  uint32_t pc = 0;
  std::string text;
};

struct ExecNode {
  uint32_t id = 0;
  std::optional<uint32_t> parent;
  std::vector<uint32_t> children;
  uint32_t start_pc = 0;
  std::optional<uint32_t> first_pc, last_pc; // executed instruction range
  std::vector<Term> constraints;             // added at this node
  std::vector<Event> events;
  uint32_t flags = 0;
  std::optional<TerminalKind> terminal;
  std::string reason;
  bool dropped = false; // no terminal descendant (discarded or never resumed)
};

struct RunResult {
  Side side = Side::Pre;
  std::vector<SymState> terminals; // ascending node id
  std::vector<ExecNode> tree;      // indexed by node id
  size_t blocks = 0;
  unsigned cyclomatic = 0;
  size_t states_created = 0;

  const ExecNode &node(uint32_t id) const { return tree.at(id); }
  /// Root-to-node path of node ids.
  std::vector<uint32_t> path_to(uint32_t id) const;
  const SymState *terminal_at(uint32_t node_id) const;
};

/// Registers, memory and shared variables of s for predicate building.
PredEnv state_env(const Harness &h, const SymState &s);

class Executor {
public:
  Executor(const Harness &h, Side side, SolverSession &solver);

  /// Root state: inputs installed, preconditions appended. Throws
  /// ConfigError when the preconditions are unsatisfiable.
  SymState initial_state();

  /// Advances a non-terminal state by one instruction, applying directives
  /// at its pc first. Returns zero successors (discarded), one, or the
  /// feasible children of a fork.
  std::vector<SymState> step(SymState s);

  /// Marks dropped nodes and packages the terminals.
  RunResult finish(std::vector<SymState> terminals);

  /// Registers, memory and declared inputs of s for predicate building.
  PredEnv env_for(const SymState &s) const;

  bool feasible(const std::vector<Term> &constraints);
  const std::vector<ExecNode> &nodes() const { return nodes_; }
  size_t states_created() const { return states_created_; }
  Side side() const { return side_; }
  const std::set<uint32_t> &leaders() const { return leaders_; }

private:
  uint32_t new_node(uint32_t parent, uint32_t pc);
  void count_state();
  void add_constraint(SymState &s, Term c);
  void event(const SymState &s, EventKind k, std::string text);
  void terminate(SymState &s, TerminalKind k, std::string reason);
  std::vector<SymState> apply_directives(SymState s);
  std::vector<SymState> check_condition(SymState s, Term cond, TerminalKind fail_kind,
                                        const std::string &message);
  std::vector<SymState> fork(SymState s, Term cond, uint32_t taken_pc, bool taken_valid);
  void arrive(SymState &s, bool fresh_node);
  std::optional<uint32_t> concretize(const SymState &s, Term addr);
  void write_reg(SymState &s, unsigned r, Term v);
  void emit(SymState &s, uint32_t ch, Term payload, EffectSource src);

  const Harness &h_;
  Side side_;
  const Program &prog_;
  SolverSession &solver_;
  std::set<uint32_t> leaders_;
  std::vector<ExecNode> nodes_;
  size_t states_created_ = 0;
};

/// Breadth-first exploration until no live states remain.
RunResult execute_complete(const Harness &h, Side side, SolverSession &solver);

} // namespace duet
