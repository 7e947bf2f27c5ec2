//===-- solver.hpp - Satisfiability of width-1 term conjunctions ---------===//
//
// is_sat bit-blasts the clauses to CNF and runs the CDCL solver, using one
// selector literal per clause so that unsatisfiable queries come with a
// core. brute_force_sat enumerates every assignment and is the reference
// the other entry points are tested against.
//
// Clause identity for the core cache is the interned term id, so a clause
// that recurs verbatim in another query is recognised without solving.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/term.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace duet {

inline constexpr unsigned kDefaultSolverBits = 24;
inline constexpr unsigned kDefaultOracleBits = 20;

struct Query {
  std::vector<Term> clauses; // each of width 1
  VarSet vars;               // domain; always covers the clauses' variables

  Query() = default;
  /// Domain is the clauses' free variables plus `extra`.
  explicit Query(std::vector<Term> cs, const VarSet &extra = {});

  unsigned total_bits() const;
};

struct SatResult {
  bool sat = false;
  Assignment model;         // total over the query domain when sat
  std::vector<size_t> core; // clause indices when unsat, ascending
};

/// Throws BudgetExceeded when q.total_bits() > max_bits.
SatResult is_sat(const Query &q, unsigned max_bits = kDefaultSolverBits);

/// Exhaustive search. Variables are ordered by name and the first one
/// varies fastest; the model is the lowest satisfying index in that order.
/// An unsat result reports every clause as the core.
SatResult brute_force_sat(const Query &q, unsigned max_bits = kDefaultOracleBits);
/// Same result as brute_force_sat, enumerating in parallel with OpenMP.
SatResult brute_force_sat_parallel(const Query &q,
                                   unsigned max_bits = kDefaultOracleBits);

/// Deletion-based shrinking of an unsat query's core. Every clause of the
/// result is necessary: dropping any one of them makes the rest satisfiable.
/// Throws Error when q is satisfiable.
std::vector<size_t> minimize_core(const Query &q,
                                  unsigned max_bits = kDefaultSolverBits);

/// Number of is_sat calls made by this process (instrumentation).
uint64_t is_sat_call_count();

/// Clauses compiled to a flat instruction list for fast repeated evaluation.
class CompiledTerms {
public:
  CompiledTerms(const std::vector<Term> &roots, const VarSet &vars);

  /// values[i] is the value of the i-th variable in name order.
  /// Returns true iff every root evaluates to non-zero.
  bool all_true(const uint32_t *values, uint32_t *scratch) const;
  /// Evaluates root i into out[i].
  void eval_all(const uint32_t *values, uint32_t *scratch, uint32_t *out) const;

  size_t scratch_size() const { return ops_.size(); }
  size_t num_vars() const { return var_widths_.size(); }
  const std::vector<unsigned> &var_widths() const { return var_widths_; }
  const std::vector<std::string> &var_names() const { return var_names_; }

private:
  struct Op {
    Kind kind;
    uint8_t width, kid_width, hi, lo;
    uint32_t a, b, c; // operand slots, constant value, or variable index
  };
  void exec(const uint32_t *values, uint32_t *slots) const;

  std::vector<Op> ops_;
  std::vector<uint32_t> roots_;
  std::vector<unsigned> var_widths_;
  std::vector<std::string> var_names_;
};

/// Decodes an enumeration index into values, first variable fastest.
void index_to_values(uint64_t index, const std::vector<unsigned> &widths,
                     uint32_t *values);

class CoreCache {
public:
  /// Returns a cached core contained in the sorted id set, if any.
  std::optional<std::vector<uint64_t>> find_subset(const std::vector<uint64_t> &ids) const;
  void insert(std::vector<uint64_t> core_ids);
  size_t size() const;
  std::vector<std::vector<uint64_t>> entries() const;

private:
  mutable std::mutex mu_;
  std::vector<std::vector<uint64_t>> cores_;
};

class ModelCache {
public:
  explicit ModelCache(size_t capacity = 256) : capacity_(capacity) {}

  /// First cached model (most recent first) under which every clause holds;
  /// missing variables read as zero. A hit moves the entry to the front.
  std::optional<Assignment> find_satisfying(const std::vector<Term> &clauses);
  void insert(const Assignment &m);
  size_t size() const;
  size_t capacity() const { return capacity_; }

private:
  mutable std::mutex mu_;
  size_t capacity_;
  std::deque<Assignment> models_;
};

enum class CacheHit { CoreHit, ModelHit, Solved };
const char *to_string(CacheHit h);

struct SolverStats {
  std::atomic<uint64_t> solved{0};
  std::atomic<uint64_t> core_hits{0};
  std::atomic<uint64_t> model_hits{0};
  /// is_sat calls spent minimizing cores harvested from unsat verdicts.
  std::atomic<uint64_t> minimize_solves{0};
};

struct CheckResult {
  SatResult result;
  CacheHit kind = CacheHit::Solved;
};

/// Sorted, de-duplicated clause ids of a query.
std::vector<uint64_t> clause_ids(const std::vector<Term> &clauses);

/// Cache-aware satisfiability check. The verdict always equals is_sat(q).
/// Unsat verdicts from the solver have their core minimized and cached.
CheckResult check_with_caches(const Query &q, CoreCache &cores, ModelCache &models,
                              unsigned max_bits = kDefaultSolverBits,
                              SolverStats *stats = nullptr);

/// Bundles caches, budget and statistics for one comparison session.
class SolverSession {
public:
  explicit SolverSession(unsigned max_bits = kDefaultSolverBits,
                         bool caches_enabled = true, size_t model_capacity = 256)
      : max_bits_(max_bits), caches_enabled_(caches_enabled),
        models_(model_capacity) {}

  CheckResult check(const Query &q);
  CheckResult check(std::vector<Term> clauses) { return check(Query(std::move(clauses))); }

  unsigned max_bits() const { return max_bits_; }
  bool caches_enabled() const { return caches_enabled_; }
  SolverStats &stats() { return stats_; }
  const SolverStats &stats() const { return stats_; }
  CoreCache &cores() { return cores_; }
  ModelCache &models() { return models_; }

private:
  unsigned max_bits_;
  bool caches_enabled_;
  CoreCache cores_;
  ModelCache models_;
  SolverStats stats_;
};

/// QF_BV rendering of a query for cross-checking with external solvers.
std::string to_smtlib(const Query &q);

} // namespace duet
