//===-- concolic.hpp - Joint concolic exploration ------------------------===//
//
// Both programs run under the same sequence of concrete inputs. At a fork
// the child whose constraints the state's input satisfies stays active and
// the siblings are deferred; a later input that satisfies a deferred state
// activates it in whichever program it belongs to. After every round each
// logged input has been followed to a terminal in both programs, which is
// what keeps every produced terminal paired.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/harness.hpp"
#include "duet/symexec.hpp"

#include <set>
#include <vector>

namespace duet {

struct StepSplit {
  std::vector<SymState> active;
  std::vector<SymState> deferred;
};

/// A child is active iff the input satisfies all of its constraints.
StepSplit concolic_step_children(std::vector<SymState> children, const Assignment &input);

struct DeferredState {
  SymState state;
  Side side = Side::Pre;
  uint64_t seq = 0; // creation order, for FIFO selection
};

struct ConcolicSession {
  std::vector<Assignment> inputs; // input log; inputs[0] is the initial input
  std::vector<DeferredState> deferred[2];
  std::vector<SymState> terminals[2];
  std::set<uint32_t> covered[2];
  std::set<std::vector<uint32_t>> explored_paths[2]; // distinct terminal histories
  std::set<std::vector<uint32_t>> seen_ngrams;
  Side turn = Side::Pre;
  size_t blocks[2] = {0, 0};
  unsigned cyclomatic[2] = {0, 0};
  uint64_t next_seq = 0;

  bool deferred_empty() const { return deferred[0].empty() && deferred[1].empty(); }
  double coverage(Side s) const;
  /// Records a terminal's blocks, path and n-grams.
  void note_terminal(Side s, const SymState &t, unsigned ngram);
};

/// Called when both active frontiers are empty.
bool termination_should_stop(const ConcolicSession &session, const Heuristics &h);

/// Distinct length-n windows of a history.
std::set<std::vector<uint32_t>> ngrams(const std::vector<uint32_t> &history, unsigned n);

/// Removes and returns the next candidate: the turn's deferred set, or the
/// other one when it is empty. FIFO for ngram == 0, otherwise the state with
/// the most unseen n-grams (FIFO among ties). Flips the turn.
DeferredState pick_candidate(ConcolicSession &session, const Heuristics &h);

struct ConcolicResult {
  RunResult runs[2];
  std::vector<Assignment> inputs;
  /// Input index that drove each terminal, parallel to runs[s].terminals.
  std::vector<size_t> terminal_inputs[2];
  size_t rounds = 0;
  bool stopped_early = false; // heuristic fired with deferred states left

  const RunResult &run(Side s) const { return runs[int(s)]; }
};

ConcolicResult execute_concolic(const Harness &h, SolverSession &solver);

} // namespace duet
