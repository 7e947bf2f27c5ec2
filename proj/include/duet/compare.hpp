//===-- compare.hpp - Pairing and diffing terminal states ----------------===//
//
// Two terminal states are compatible when some input drives both programs
// to them, i.e. the conjunction of their path constraints is satisfiable.
// Compatible pairs are then diffed on the observables: a register slice,
// memory byte or effect differs when the joint constraints admit an input
// under which the two values are unequal.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/concolic.hpp"
#include "duet/harness.hpp"
#include "duet/solver.hpp"
#include "duet/symexec.hpp"

#include <optional>
#include <vector>

namespace duet {

struct CompatiblePair {
  size_t pre_index = 0; // into the pre run's terminals
  size_t post_index = 0;
  uint32_t pre_node = 0;
  uint32_t post_node = 0;
  Assignment witness; // satisfies both constraint sets
  CacheHit how = CacheHit::Solved;
};

/// Pre terminals outer, post terminals inner, both in node order, through
/// the session's caches.
std::vector<CompatiblePair> compatible_pairs(const RunResult &pre, const RunResult &post,
                                             SolverSession &solver);

/// Cache-free OpenMP variant; same pairs (witnesses may differ).
std::vector<CompatiblePair> compatible_pairs_parallel(const RunResult &pre, const RunResult &post,
                                                      unsigned max_bits);

enum class Classification { Equivalent, PreRefinesPost, PostRefinesPre, Overlapping };
const char *to_string(Classification c);
std::optional<Classification> classification_from_string(std::string_view s);

struct ClassifyResult {
  Classification kind = Classification::Equivalent;
  std::optional<Assignment> pre_only;  // reaches the pre leaf but not the post leaf
  std::optional<Assignment> post_only; // and the converse
};

/// Compares the input sets of two compatible states.
ClassifyResult classify(const SymState &pre, const SymState &post, SolverSession &solver);

struct RegisterDiff {
  RegSlice slice;
  Term pre, post;
  bool differs = false;
  Assignment witness;
};

struct MemoryDiff {
  uint32_t addr = 0;
  Term pre, post;
  bool written_pre = false, written_post = false;
  bool differs = false;
  Assignment witness;

  bool written_by_one() const { return written_pre != written_post; }
};

enum class EffectStatus { Equal, Differs, OnlyPre, OnlyPost };
const char *to_string(EffectStatus s);

struct EffectPosition {
  std::optional<size_t> pre; // index into the channel's payload sequence
  std::optional<size_t> post;
  EffectStatus status = EffectStatus::Equal;
  Assignment witness; // when Differs
};

struct ChannelDiff {
  uint32_t channel = 0;
  std::vector<Term> pre, post;
  std::vector<EffectPosition> positions;
  bool differs() const;
};

struct DiffReport {
  std::vector<RegisterDiff> registers;
  std::vector<MemoryDiff> memory;
  std::vector<ChannelDiff> channels;
  ClassifyResult classification;

  bool registers_differ() const;
  bool memory_differs() const;
  bool channel_differs(uint32_t ch) const;
  bool any_difference() const;
};

/// Diffs one compatible pair. pair_witness is the pair's joint model; it
/// serves as the witness when two distinct constants are compared.
DiffReport diff_pair(const SymState &pre, const SymState &post, const Observables &obs,
                     SolverSession &solver, const Assignment &pair_witness = {});

/// Shared input of a compatible pair, total over the declared inputs (and
/// any IN or hook variable the constraints mention). nullopt if not a pair.
std::optional<Assignment> concretize(const Harness &h, const SymState &pre, const SymState &post,
                                     SolverSession &solver);

/// Agreement of every observable register slice and of every observable
/// byte written by either state.
Term agreement_predicate(const Harness &h, const SymState &pre, const SymState &post);

/// The harness property for one pair: agreement and/or the pair expression.
Term property_predicate(const Harness &h, const SymState &pre, const SymState &post);

struct Counterexample {
  size_t pair = 0; // index into the pair list
  Assignment input;
};

/// One counterexample per pair whose joint constraints admit a violation.
std::vector<Counterexample> check_relative_property(const Harness &h, const RunResult &pre,
                                                    const RunResult &post,
                                                    const std::vector<CompatiblePair> &pairs,
                                                    SolverSession &solver);

struct StatsSnapshot {
  uint64_t solved = 0, core_hits = 0, model_hits = 0, minimize_solves = 0;
  bool operator==(const StatsSnapshot &) const = default;
};
StatsSnapshot snapshot(const SolverStats &s);

struct ComparisonResult {
  RunResult runs[2];
  std::vector<CompatiblePair> pairs;
  std::vector<DiffReport> diffs; // parallel to pairs
  std::vector<Counterexample> counterexamples;
  bool concolic = false;
  std::vector<Assignment> inputs_log;
  StatsSnapshot stats;

  const RunResult &run(Side s) const { return runs[int(s)]; }
  const SymState &pre_of(const CompatiblePair &p) const { return runs[0].terminals[p.pre_index]; }
  const SymState &post_of(const CompatiblePair &p) const { return runs[1].terminals[p.post_index]; }
};

/// Explores both programs (complete or concolic, per the harness), pairs,
/// diffs, classifies and checks the configured property.
ComparisonResult run_comparison(const Harness &h, SolverSession &solver);
ComparisonResult run_comparison(const Harness &h);

} // namespace duet
