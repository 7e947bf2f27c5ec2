//===-- harness.hpp - Comparison session configuration -------------------===//
//
// A harness names the two programs, declares the shared input variables and
// where they live, and attaches directives, hooks and observables. Loading
// resolves every location and parses every predicate up front so that bad
// configurations fail before exploration starts.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/interp.hpp"
#include "duet/isa.hpp"
#include "duet/pred.hpp"
#include "duet/solver.hpp"
#include "duet/term.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace duet {

enum class Side { Pre = 0, Post = 1 };
const char *to_string(Side s);

struct InputDecl {
  std::string name;
  unsigned width = 8;
  std::optional<unsigned> reg;       // bound to a register (zero-extended)
  std::optional<uint32_t> mem_addr;  // or to little-endian bytes in memory
};

struct MemInit {
  uint32_t addr = 0;
  std::vector<uint8_t> bytes;
};

enum class DirectiveKind { BreakpointLog, Assume, Assert, Postcondition, VirtualPrint, Error };
const char *to_string(DirectiveKind k);
std::optional<DirectiveKind> directive_kind_from_string(std::string_view s);

struct Directive {
  DirectiveKind kind = DirectiveKind::Assert;
  std::string location;
  uint32_t pc = 0;             // resolved location
  std::optional<PredExpr> expr; // condition, or byte payload for virtual-print
  std::string message;
};

struct Hook {
  std::string name;
  std::string target;
  uint32_t pc = 0;           // resolved call target
  unsigned ret_width = 8;    // width of the fresh return variable
  std::optional<PredExpr> ret; // replaces the fresh variable when set
  std::optional<uint32_t> effect_channel;
  std::optional<PredExpr> effect;

  std::string var_name(uint32_t call_index) const {
    return "hook_" + name + "_" + std::to_string(call_index);
  }
};

struct RegSlice {
  unsigned reg = 0;
  unsigned hi = 31, lo = 0;
};

struct MemRegion {
  uint32_t addr = 0;
  uint32_t len = 0;
};

struct Observables {
  std::vector<RegSlice> registers;
  /// Empty means every written address is observed.
  std::vector<MemRegion> memory;
  /// Empty means every channel with effects is observed.
  std::vector<uint32_t> channels;

  bool observes_addr(uint32_t a) const;
  bool observes_channel(uint32_t ch) const;
};

enum class Termination { Complete, Coverage, Cyclomatic };

struct Heuristics {
  Termination termination = Termination::Complete;
  double coverage = 1.0;
  /// 0 selects FIFO (trivial); otherwise the n-gram window length.
  unsigned ngram = 0;
};

struct ProgramSpec {
  std::string path; // as written in the config
  std::string entry;
  Program program;
  uint32_t entry_pc = 0;
};

struct Property {
  bool agree = false;          // all observable registers and memory agree
  std::optional<PredExpr> expr; // pair predicate using pre./post. names
  bool enabled() const { return agree || expr.has_value(); }
};

struct Harness {
  std::string base_dir;
  ProgramSpec programs[2];
  std::vector<InputDecl> inputs;
  std::vector<MemInit> init_memory;
  std::vector<PredExpr> preconditions;
  std::vector<Directive> directives[2];
  std::vector<Hook> hooks[2];
  unsigned loop_bound = 32;
  unsigned call_depth_max = 64;
  unsigned max_in_bytes = 4;
  bool concolic = false;
  Heuristics heuristics;
  Observables observables;
  unsigned max_bits = kDefaultSolverBits;
  bool caches = true;
  size_t max_states = 10000;
  MachineConfig machine;
  Property property;

  const ProgramSpec &spec(Side s) const { return programs[int(s)]; }
  const Program &program(Side s) const { return programs[int(s)].program; }
  const std::vector<Directive> &directives_of(Side s) const { return directives[int(s)]; }
  const std::vector<Hook> &hooks_of(Side s) const { return hooks[int(s)]; }

  const InputDecl *find_input(std::string_view name) const;
  /// Width of a shared variable: declared inputs, IN bytes, hook returns.
  std::optional<unsigned> var_width(std::string_view name) const;
};

/// Parses and validates a configuration. Relative program paths resolve
/// against base_dir. Comments (// and /* */) are accepted.
Harness parse_harness(const nlohmann::json &j, const std::string &base_dir = ".");
Harness load_harness(const std::string &path);
Harness parse_harness_text(std::string_view text, const std::string &base_dir = ".");

/// Commented configuration skeleton.
std::string harness_template();

/// Stable digest of the configuration text, for report metadata.
std::string config_digest(std::string_view text);

/// Concrete inputs for replaying a model through run_concrete: initial
/// registers and memory from the input bindings, IN channel bytes, and hooks
/// that reproduce the symbolic hook semantics. Variables the model does not
/// mention read as zero.
struct ReplayInputs {
  std::array<uint32_t, kNumRegs> regs{};
  std::map<uint32_t, uint8_t> mem;
  ChannelBytes channels;
  RunOptions options;
};
ReplayInputs replay_inputs(const Harness &h, Side side, const Assignment &model);

/// Runs the program concretely under the model with a recorded trace.
ConcreteRun replay(const Harness &h, Side side, const Assignment &model,
                   uint64_t step_limit = 1'000'000);

/// Block leaders of one side: the static leaders plus the configured entry.
std::set<uint32_t> leaders_of(const Harness &h, Side side);

/// Block-leader arrivals along a concrete trace.
std::vector<uint32_t> block_history_of(const std::set<uint32_t> &leaders,
                                       const std::vector<uint32_t> &trace);
/// As above; a run that stopped on input exhaustion also arrived at the
/// unexecuted IN instruction.
std::vector<uint32_t> block_history_of(const std::set<uint32_t> &leaders, const ConcreteRun &run);

} // namespace duet
