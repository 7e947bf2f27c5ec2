//===-- concolic.cpp - Joint concolic exploration ------------------------===//

#include "duet/concolic.hpp"

#include "duet/cfg.hpp"
#include "duet/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>

namespace duet {

namespace {

bool satisfies(const std::vector<Term> &constraints, const Assignment &in) {
  for (Term c : constraints)
    if (!eval_or_zero(c, in))
      return false;
  return true;
}

// Inputs compare equal when they agree after zero-filling.
bool same_input(const Assignment &a, const Assignment &b) {
  auto nonzero = [](const Assignment &m) {
    Assignment out;
    for (const auto &[k, v] : m)
      if (v)
        out.emplace(k, v);
    return out;
  };
  return nonzero(a) == nonzero(b);
}

VarSet declared_vars(const Harness &h) {
  VarSet vs;
  for (const auto &in : h.inputs)
    vs[in.name] = in.width;
  return vs;
}

} // namespace

StepSplit concolic_step_children(std::vector<SymState> children, const Assignment &input) {
  StepSplit out;
  for (SymState &c : children)
    (satisfies(c.constraints, input) ? out.active : out.deferred).push_back(std::move(c));
  return out;
}

double ConcolicSession::coverage(Side s) const {
  size_t n = blocks[int(s)];
  if (n == 0)
    return 1.0;
  return std::min(1.0, double(covered[int(s)].size()) / double(n));
}

void ConcolicSession::note_terminal(Side s, const SymState &t, unsigned ngram) {
  covered[int(s)].insert(t.block_history.begin(), t.block_history.end());
  explored_paths[int(s)].insert(t.block_history);
  if (ngram)
    for (auto &w : ngrams(t.block_history, ngram))
      seen_ngrams.insert(w);
}

bool termination_should_stop(const ConcolicSession &s, const Heuristics &h) {
  if (s.deferred_empty())
    return true;
  switch (h.termination) {
  case Termination::Complete:
    return false;
  case Termination::Coverage:
    return s.coverage(Side::Pre) >= h.coverage && s.coverage(Side::Post) >= h.coverage;
  case Termination::Cyclomatic:
    return s.explored_paths[0].size() >= s.cyclomatic[0] &&
           s.explored_paths[1].size() >= s.cyclomatic[1];
  }
  return false;
}

std::set<std::vector<uint32_t>> ngrams(const std::vector<uint32_t> &history, unsigned n) {
  std::set<std::vector<uint32_t>> out;
  if (n == 0 || history.size() < n)
    return out;
  for (size_t i = 0; i + n <= history.size(); ++i)
    out.emplace(history.begin() + i, history.begin() + i + n);
  return out;
}

DeferredState pick_candidate(ConcolicSession &s, const Heuristics &h) {
  int side = int(s.turn);
  if (s.deferred[side].empty())
    side = 1 - side;
  auto &pool = s.deferred[side];
  size_t best = 0;
  if (h.ngram) {
    size_t best_score = 0;
    for (size_t i = 0; i < pool.size(); ++i) {
      size_t score = 0;
      for (auto &w : ngrams(pool[i].state.block_history, h.ngram))
        score += !s.seen_ngrams.count(w);
      // Strictly greater keeps the earliest among ties; pool is in seq order.
      if (i == 0 || score > best_score) {
        best = i;
        best_score = score;
      }
    }
  }
  DeferredState d = std::move(pool[best]);
  pool.erase(pool.begin() + long(best));
  s.turn = side == 0 ? Side::Post : Side::Pre;
  return d;
}

ConcolicResult execute_concolic(const Harness &h, SolverSession &solver) {
  std::unique_ptr<Executor> ex[2] = {std::make_unique<Executor>(h, Side::Pre, solver),
                                     std::make_unique<Executor>(h, Side::Post, solver)};
  ConcolicSession ss;
  for (int s = 0; s < 2; ++s) {
    ss.blocks[s] = build_cfg(h.programs[s].program).block_starts.size();
    ss.cyclomatic[s] = cyclomatic_complexity(h.programs[s].program);
  }
  const VarSet decl = declared_vars(h);

  std::deque<std::pair<SymState, size_t>> frontier[2];
  std::vector<Term> root_constraints;
  for (int s = 0; s < 2; ++s) {
    SymState root = ex[s]->initial_state();
    root_constraints.insert(root_constraints.end(), root.constraints.begin(),
                            root.constraints.end());
    frontier[s].emplace_back(std::move(root), 0);
  }
  CheckResult init = solver.check(Query(root_constraints, decl));
  if (!init.result.sat)
    throw ConfigError("/preconditions", "no input satisfies both programs' preconditions");
  ss.inputs.push_back(init.result.model);

  ConcolicResult res;
  std::map<uint32_t, size_t> terminal_input[2];
  while (true) {
    for (int s = 0; s < 2; ++s) {
      while (!frontier[s].empty()) {
        auto [st, idx] = std::move(frontier[s].front());
        frontier[s].pop_front();
        if (st.terminal) {
          ss.note_terminal(Side(s), st, h.heuristics.ngram);
          terminal_input[s][st.node_id] = idx;
          ss.terminals[s].push_back(std::move(st));
          continue;
        }
        StepSplit split = concolic_step_children(ex[s]->step(std::move(st)), ss.inputs[idx]);
        for (SymState &c : split.active)
          frontier[s].emplace_back(std::move(c), idx);
        for (SymState &c : split.deferred)
          ss.deferred[s].push_back({std::move(c), Side(s), ss.next_seq++});
      }
    }
    ++res.rounds;
    if (termination_should_stop(ss, h.heuristics)) {
      res.stopped_early = !ss.deferred_empty();
      break;
    }

    DeferredState cand = pick_candidate(ss, h.heuristics);
    VarSet domain = decl;
    for (const auto &[n, w] : free_vars(cand.state.constraints))
      domain[n] = w;
    CheckResult r = solver.check(Query(cand.state.constraints, domain));
    Assignment input = r.result.model;
    bool repeat = false;
    for (const auto &prev : ss.inputs)
      repeat = repeat || same_input(prev, input);
    if (repeat) {
      // Ask for an input outside the log; keep the first model if none exists.
      std::vector<Term> cs = cand.state.constraints;
      for (const auto &prev : ss.inputs) {
        Term same = mk_bool(true);
        for (const auto &[n, w] : domain) {
          auto it = prev.find(n);
          same = mk_and(same, mk_eq(mk_var(n, w), mk_const(it == prev.end() ? 0 : it->second, w)));
        }
        cs.push_back(mk_not(same));
      }
      CheckResult fresh = solver.check(Query(cs, domain));
      if (fresh.result.sat)
        input = fresh.result.model;
    }
    ss.inputs.push_back(input);
    const size_t idx = ss.inputs.size() - 1;

    const int cs = int(cand.side);
    frontier[cs].emplace_back(std::move(cand.state), idx);
    for (int s = 0; s < 2; ++s) {
      auto &pool = ss.deferred[s];
      std::vector<DeferredState> keep;
      for (auto &d : pool) {
        if (satisfies(d.state.constraints, input))
          frontier[s].emplace_back(std::move(d.state), idx);
        else
          keep.push_back(std::move(d));
      }
      pool = std::move(keep);
    }
  }

  for (int s = 0; s < 2; ++s) {
    res.runs[s] = ex[s]->finish(std::move(ss.terminals[s]));
    for (const auto &t : res.runs[s].terminals)
      res.terminal_inputs[s].push_back(terminal_input[s].at(t.node_id));
  }
  res.inputs = std::move(ss.inputs);
  return res;
}

} // namespace duet
