//===-- sat.hpp - CDCL SAT solver ----------------------------------------===//
//
// Two-watched-literal propagation, first-UIP learning, VSIDS with phase
// saving and Luby restarts. Solving under assumptions reports the subset of
// assumptions responsible for unsatisfiability.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <vector>

namespace duet::sat {

/// Literal encoding: 2*var for the positive literal, 2*var+1 for its negation.
using Lit = uint32_t;

inline Lit mk_lit(uint32_t var, bool negated = false) { return 2 * var + (negated ? 1 : 0); }
inline Lit neg(Lit l) { return l ^ 1; }
inline uint32_t var_of(Lit l) { return l >> 1; }
inline bool is_neg(Lit l) { return l & 1; }

class Solver {
public:
  Solver();

  uint32_t new_var();
  uint32_t num_vars() const { return static_cast<uint32_t>(assigns_.size()); }

  /// Adds a clause; returns false once the formula is unsatisfiable at the
  /// top level.
  bool add_clause(std::vector<Lit> lits);

  /// Returns true when satisfiable under the assumptions.
  bool solve(const std::vector<Lit> &assumptions = {});

  /// Value of a variable in the last model.
  bool model_value(uint32_t var) const { return model_[var]; }

  /// After an unsatisfiable solve: assumptions whose conjunction is
  /// already contradictory with the clauses.
  const std::vector<Lit> &failed_assumptions() const { return conflict_; }

  uint64_t conflicts() const { return stat_conflicts_; }

private:
  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
  };
  struct Watcher {
    uint32_t cref;
    Lit blocker;
  };

  enum : uint8_t { kTrue = 0, kFalse = 1, kUndef = 2 };

  uint8_t value(Lit l) const {
    uint8_t v = assigns_[var_of(l)];
    return v == kUndef ? uint8_t(kUndef) : uint8_t(v ^ uint8_t(is_neg(l)));
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void attach(uint32_t cref);
  void enqueue(Lit l, int64_t reason);
  int64_t propagate();
  void analyze(int64_t confl, std::vector<Lit> &learnt, int &bt_level);
  void analyze_final(Lit p);
  void cancel_until(int level);
  Lit pick_branch();
  void bump(uint32_t v);
  void decay() { var_inc_ *= 1.0 / 0.95; }

  // Binary max-heap over activity.
  void heap_insert(uint32_t v);
  void heap_up(size_t i);
  void heap_down(size_t i);
  uint32_t heap_pop();
  bool heap_contains(uint32_t v) const { return heap_pos_[v] >= 0; }

  std::vector<Clause> clauses_;
  std::vector<std::vector<Watcher>> watches_; // indexed by literal
  std::vector<uint8_t> assigns_;
  std::vector<uint8_t> polarity_;
  std::vector<int> level_;
  std::vector<int64_t> reason_;
  std::vector<Lit> trail_;
  std::vector<size_t> trail_lim_;
  size_t qhead_ = 0;
  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<uint32_t> heap_;
  std::vector<int64_t> heap_pos_;
  std::vector<uint8_t> seen_;
  std::vector<bool> model_;
  std::vector<Lit> conflict_;
  bool ok_ = true;
  uint64_t stat_conflicts_ = 0;
};

} // namespace duet::sat
