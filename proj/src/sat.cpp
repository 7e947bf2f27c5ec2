//===-- sat.cpp - CDCL SAT solver ----------------------------------------===//

#include "duet/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace duet::sat {

namespace {

constexpr Lit kNoLit = ~Lit(0);
constexpr int64_t kNoReason = -1;

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

} // namespace

Solver::Solver() = default;

uint32_t Solver::new_var() {
  uint32_t v = num_vars();
  assigns_.push_back(kUndef);
  polarity_.push_back(1);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  activity_.push_back(0.0);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::vector<Lit> lits) {
  if (!ok_)
    return false;
  cancel_until(0);
  std::sort(lits.begin(), lits.end());
  std::vector<Lit> out;
  Lit prev = kNoLit;
  for (Lit l : lits) {
    if (value(l) == kTrue || (prev != kNoLit && l == neg(prev)))
      return true;
    if (l != prev && value(l) != kFalse)
      out.push_back(l);
    prev = l;
  }
  if (out.empty())
    return ok_ = false;
  if (out.size() == 1) {
    enqueue(out[0], kNoReason);
    return ok_ = propagate() == kNoReason;
  }
  clauses_.push_back({std::move(out), false});
  attach(static_cast<uint32_t>(clauses_.size() - 1));
  return true;
}

void Solver::attach(uint32_t cref) {
  const Clause &c = clauses_[cref];
  watches_[neg(c.lits[0])].push_back({cref, c.lits[1]});
  watches_[neg(c.lits[1])].push_back({cref, c.lits[0]});
}

void Solver::enqueue(Lit l, int64_t reason) {
  uint32_t v = var_of(l);
  assigns_[v] = is_neg(l) ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

int64_t Solver::propagate() {
  int64_t confl = kNoReason;
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit false_lit = neg(p);
    std::vector<Watcher> &ws = watches_[p];
    size_t i = 0, j = 0;
    while (i < ws.size()) {
      Watcher w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause &c = clauses_[w.cref];
      if (c.lits[0] == false_lit)
        std::swap(c.lits[0], c.lits[1]);
      ++i;
      Lit first = c.lits[0];
      Watcher nw{w.cref, first};
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = nw;
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != kFalse) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[neg(c.lits[1])].push_back(nw);
          moved = true;
          break;
        }
      }
      if (moved)
        continue;
      ws[j++] = nw;
      if (value(first) == kFalse) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size())
          ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl != kNoReason)
      break;
  }
  return confl;
}

void Solver::analyze(int64_t confl, std::vector<Lit> &learnt, int &bt_level) {
  learnt.clear();
  learnt.push_back(kNoLit);
  int path = 0;
  Lit p = kNoLit;
  size_t idx = trail_.size();
  do {
    const Clause &c = clauses_[static_cast<size_t>(confl)];
    for (size_t k = p == kNoLit ? 0 : 1; k < c.lits.size(); ++k) {
      Lit q = c.lits[k];
      uint32_t v = var_of(q);
      if (!seen_[v] && level_[v] > 0) {
        bump(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path;
        else
          learnt.push_back(q);
      }
    }
    while (!seen_[var_of(trail_[--idx])]) {
    }
    p = trail_[idx];
    confl = reason_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = neg(p);

  bt_level = 0;
  if (learnt.size() > 1) {
    size_t max_i = 1;
    for (size_t k = 2; k < learnt.size(); ++k)
      if (level_[var_of(learnt[k])] > level_[var_of(learnt[max_i])])
        max_i = k;
    std::swap(learnt[1], learnt[max_i]);
    bt_level = level_[var_of(learnt[1])];
  }
  for (Lit l : learnt)
    seen_[var_of(l)] = 0;
}

void Solver::analyze_final(Lit p) {
  conflict_.clear();
  conflict_.push_back(p);
  if (decision_level() == 0)
    return;
  seen_[var_of(p)] = 1;
  for (size_t i = trail_.size(); i-- > trail_lim_[0];) {
    uint32_t x = var_of(trail_[i]);
    if (!seen_[x])
      continue;
    if (reason_[x] == kNoReason) {
      if (trail_[i] != neg(p))
        conflict_.push_back(trail_[i]);
    } else {
      const Clause &c = clauses_[static_cast<size_t>(reason_[x])];
      for (size_t k = 1; k < c.lits.size(); ++k)
        if (level_[var_of(c.lits[k])] > 0)
          seen_[var_of(c.lits[k])] = 1;
    }
    seen_[x] = 0;
  }
  seen_[var_of(p)] = 0;
}

void Solver::cancel_until(int level) {
  if (decision_level() <= level)
    return;
  for (size_t i = trail_.size(); i-- > trail_lim_[level];) {
    uint32_t v = var_of(trail_[i]);
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    polarity_[v] = is_neg(trail_[i]);
    if (!heap_contains(v))
      heap_insert(v);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  while (!heap_.empty()) {
    uint32_t v = heap_pop();
    if (assigns_[v] == kUndef)
      return mk_lit(v, polarity_[v]);
  }
  return kNoLit;
}

void Solver::bump(uint32_t v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (double &a : activity_)
      a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_contains(v))
    heap_up(static_cast<size_t>(heap_pos_[v]));
}

void Solver::heap_insert(uint32_t v) {
  heap_pos_[v] = static_cast<int64_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(size_t i) {
  uint32_t v = heap_[i];
  while (i > 0) {
    size_t parent = (i - 1) / 2;
    if (activity_[heap_[parent]] >= activity_[v])
      break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = static_cast<int64_t>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<int64_t>(i);
}

void Solver::heap_down(size_t i) {
  uint32_t v = heap_[i];
  while (true) {
    size_t child = 2 * i + 1;
    if (child >= heap_.size())
      break;
    if (child + 1 < heap_.size() && activity_[heap_[child + 1]] > activity_[heap_[child]])
      ++child;
    if (activity_[heap_[child]] <= activity_[v])
      break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = static_cast<int64_t>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<int64_t>(i);
}

uint32_t Solver::heap_pop() {
  uint32_t top = heap_[0];
  heap_pos_[top] = -1;
  uint32_t last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

bool Solver::solve(const std::vector<Lit> &assumptions) {
  model_.clear();
  conflict_.clear();
  if (!ok_)
    return false;
  cancel_until(0);
  if (propagate() != kNoReason) {
    ok_ = false;
    return false;
  }

  std::vector<Lit> learnt;
  for (int restart = 0;; ++restart) {
    const uint64_t budget = static_cast<uint64_t>(luby(2, restart) * 100);
    uint64_t local_conflicts = 0;
    while (true) {
      int64_t confl = propagate();
      if (confl != kNoReason) {
        ++stat_conflicts_;
        ++local_conflicts;
        if (decision_level() == 0) {
          ok_ = false;
          return false;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          clauses_.push_back({learnt, true});
          uint32_t cref = static_cast<uint32_t>(clauses_.size() - 1);
          attach(cref);
          enqueue(learnt[0], cref);
        }
        decay();
        continue;
      }
      if (local_conflicts >= budget) {
        cancel_until(0);
        break;
      }
      Lit next = kNoLit;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        Lit p = assumptions[static_cast<size_t>(decision_level())];
        if (value(p) == kTrue) {
          trail_lim_.push_back(trail_.size());
        } else if (value(p) == kFalse) {
          analyze_final(p);
          cancel_until(0);
          return false;
        } else {
          next = p;
          break;
        }
      }
      if (next == kNoLit) {
        next = pick_branch();
        if (next == kNoLit) {
          model_.assign(num_vars(), false);
          for (uint32_t v = 0; v < num_vars(); ++v)
            model_[v] = assigns_[v] == kTrue;
          cancel_until(0);
          return true;
        }
      }
      trail_lim_.push_back(trail_.size());
      enqueue(next, kNoReason);
    }
  }
}

} // namespace duet::sat
