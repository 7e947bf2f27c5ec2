//===-- compare.cpp - Pairing and diffing terminal states ----------------===//

#include "duet/compare.hpp"
#include "duet/diff.hpp"

#include <algorithm>

namespace duet {

namespace {

std::vector<Term> joint(const SymState &a, const SymState &b) {
  std::vector<Term> cs = a.constraints;
  cs.insert(cs.end(), b.constraints.begin(), b.constraints.end());
  return cs;
}

VarSet declared_vars(const Harness &h) {
  VarSet vs;
  for (const auto &in : h.inputs)
    vs[in.name] = in.width;
  return vs;
}

// Model of the joint constraints under which a != b, if any.
std::optional<Assignment> distinguish(Term a, Term b, const std::vector<Term> &cs,
                                      SolverSession &solver, const Assignment &pair_witness) {
  if (a == b)
    return std::nullopt;
  if (a.is_const() && b.is_const() && !pair_witness.empty())
    return pair_witness;
  std::vector<Term> q = cs;
  q.push_back(mk_ne(a, b));
  CheckResult r = solver.check(Query(std::move(q)));
  if (!r.result.sat)
    return std::nullopt;
  return r.result.model;
}

Term slice_of(Term reg, const RegSlice &s) {
  if (s.lo == 0 && s.hi == 31)
    return reg;
  return mk_extract(reg, s.hi, s.lo);
}

std::set<uint32_t> observed_addrs(const Observables &obs, const SymState &a, const SymState &b) {
  std::set<uint32_t> out;
  for (const auto *s : {&a, &b})
    for (uint32_t addr : s->written)
      if (obs.observes_addr(addr))
        out.insert(addr);
  return out;
}

} // namespace

const char *to_string(Classification c) {
  switch (c) {
  case Classification::Equivalent:
    return "equivalent";
  case Classification::PreRefinesPost:
    return "pre-refines-post";
  case Classification::PostRefinesPre:
    return "post-refines-pre";
  case Classification::Overlapping:
    return "overlapping";
  }
  return "?";
}

std::optional<Classification> classification_from_string(std::string_view s) {
  for (auto c : {Classification::Equivalent, Classification::PreRefinesPost,
                 Classification::PostRefinesPre, Classification::Overlapping})
    if (s == to_string(c))
      return c;
  return std::nullopt;
}

const char *to_string(EffectStatus s) {
  switch (s) {
  case EffectStatus::Equal:
    return "equal";
  case EffectStatus::Differs:
    return "differs";
  case EffectStatus::OnlyPre:
    return "only-pre";
  case EffectStatus::OnlyPost:
    return "only-post";
  }
  return "?";
}

bool ChannelDiff::differs() const {
  return std::any_of(positions.begin(), positions.end(),
                     [](const EffectPosition &p) { return p.status != EffectStatus::Equal; });
}

bool DiffReport::registers_differ() const {
  return std::any_of(registers.begin(), registers.end(),
                     [](const RegisterDiff &r) { return r.differs; });
}

bool DiffReport::memory_differs() const {
  return std::any_of(memory.begin(), memory.end(), [](const MemoryDiff &m) { return m.differs; });
}

bool DiffReport::channel_differs(uint32_t ch) const {
  for (const auto &c : channels)
    if (c.channel == ch)
      return c.differs();
  return false;
}

bool DiffReport::any_difference() const {
  if (registers_differ() || memory_differs())
    return true;
  return std::any_of(channels.begin(), channels.end(),
                     [](const ChannelDiff &c) { return c.differs(); });
}

std::vector<CompatiblePair> compatible_pairs(const RunResult &pre, const RunResult &post,
                                             SolverSession &solver) {
  std::vector<CompatiblePair> out;
  for (size_t i = 0; i < pre.terminals.size(); ++i)
    for (size_t j = 0; j < post.terminals.size(); ++j) {
      const SymState &a = pre.terminals[i], &b = post.terminals[j];
      CheckResult r = solver.check(Query(joint(a, b)));
      if (!r.result.sat)
        continue;
      out.push_back({i, j, a.node_id, b.node_id, std::move(r.result.model), r.kind});
    }
  return out;
}

std::vector<CompatiblePair> compatible_pairs_parallel(const RunResult &pre, const RunResult &post,
                                                      unsigned max_bits) {
  const size_t n = pre.terminals.size(), m = post.terminals.size();
  std::vector<std::optional<Assignment>> found(n * m);
  // Budget errors are rethrown after the loop; exceptions cannot cross it.
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < long(n * m); ++k) {
    try {
      SatResult r = is_sat(Query(joint(pre.terminals[size_t(k) / m], post.terminals[size_t(k) % m])),
                           max_bits);
      if (r.sat)
        found[size_t(k)] = std::move(r.model);
    } catch (...) {
#pragma omp critical
      err = std::current_exception();
    }
  }
  if (err)
    std::rethrow_exception(err);
  std::vector<CompatiblePair> out;
  for (size_t k = 0; k < n * m; ++k)
    if (found[k])
      out.push_back({k / m, k % m, pre.terminals[k / m].node_id, post.terminals[k % m].node_id,
                     std::move(*found[k]), CacheHit::Solved});
  return out;
}

ClassifyResult classify(const SymState &pre, const SymState &post, SolverSession &solver) {
  auto exclusive = [&](const SymState &in, const SymState &out) -> std::optional<Assignment> {
    // in implies out syntactically when it contains every clause of out.
    std::set<Term> have(in.constraints.begin(), in.constraints.end());
    if (std::all_of(out.constraints.begin(), out.constraints.end(),
                    [&](Term c) { return have.count(c) != 0; }))
      return std::nullopt;
    std::vector<Term> q = in.constraints;
    q.push_back(mk_not(mk_conj(out.constraints)));
    CheckResult r = solver.check(Query(std::move(q), free_vars(joint(pre, post))));
    if (!r.result.sat)
      return std::nullopt;
    return r.result.model;
  };
  ClassifyResult c;
  c.pre_only = exclusive(pre, post);
  c.post_only = exclusive(post, pre);
  if (!c.pre_only && !c.post_only)
    c.kind = Classification::Equivalent;
  else if (!c.pre_only)
    c.kind = Classification::PreRefinesPost;
  else if (!c.post_only)
    c.kind = Classification::PostRefinesPre;
  else
    c.kind = Classification::Overlapping;
  return c;
}

DiffReport diff_pair(const SymState &pre, const SymState &post, const Observables &obs,
                     SolverSession &solver, const Assignment &pair_witness) {
  DiffReport d;
  const std::vector<Term> cs = joint(pre, post);

  for (const RegSlice &s : obs.registers) {
    RegisterDiff r;
    r.slice = s;
    r.pre = slice_of(pre.regs[s.reg], s);
    r.post = slice_of(post.regs[s.reg], s);
    if (auto w = distinguish(r.pre, r.post, cs, solver, pair_witness)) {
      r.differs = true;
      r.witness = std::move(*w);
    }
    d.registers.push_back(std::move(r));
  }

  for (uint32_t addr : observed_addrs(obs, pre, post)) {
    MemoryDiff m;
    m.addr = addr;
    m.pre = pre.byte(addr);
    m.post = post.byte(addr);
    m.written_pre = pre.written.count(addr) != 0;
    m.written_post = post.written.count(addr) != 0;
    if (auto w = distinguish(m.pre, m.post, cs, solver, pair_witness)) {
      m.differs = true;
      m.witness = std::move(*w);
    }
    d.memory.push_back(std::move(m));
  }

  std::set<uint32_t> chans = pre.channels();
  for (uint32_t ch : post.channels())
    chans.insert(ch);
  for (uint32_t ch : chans) {
    if (!obs.observes_channel(ch))
      continue;
    ChannelDiff c;
    c.channel = ch;
    c.pre = pre.effects_on(ch);
    c.post = post.effects_on(ch);
    auto matches = lcs_matches(c.pre.size(), c.post.size(),
                               [&](size_t i, size_t j) { return c.pre[i] == c.post[j]; });
    matches.emplace_back(c.pre.size(), c.post.size());
    size_t i = 0, j = 0;
    for (auto [mi, mj] : matches) {
      // Unmatched gap: pair positionally, then the surplus is one-sided.
      for (; i < mi && j < mj; ++i, ++j) {
        EffectPosition p{i, j, EffectStatus::Equal, {}};
        if (auto w = distinguish(c.pre[i], c.post[j], cs, solver, pair_witness)) {
          p.status = EffectStatus::Differs;
          p.witness = std::move(*w);
        }
        c.positions.push_back(std::move(p));
      }
      for (; i < mi; ++i)
        c.positions.push_back({i, std::nullopt, EffectStatus::OnlyPre, {}});
      for (; j < mj; ++j)
        c.positions.push_back({std::nullopt, j, EffectStatus::OnlyPost, {}});
      if (mi < c.pre.size())
        c.positions.push_back({mi, mj, EffectStatus::Equal, {}});
      i = mi + 1;
      j = mj + 1;
    }
    d.channels.push_back(std::move(c));
  }

  d.classification = classify(pre, post, solver);
  return d;
}

std::optional<Assignment> concretize(const Harness &h, const SymState &pre, const SymState &post,
                                     SolverSession &solver) {
  CheckResult r = solver.check(Query(joint(pre, post), declared_vars(h)));
  if (!r.result.sat)
    return std::nullopt;
  return r.result.model;
}

Term agreement_predicate(const Harness &h, const SymState &pre, const SymState &post) {
  std::vector<Term> eqs;
  for (const RegSlice &s : h.observables.registers)
    eqs.push_back(mk_eq(slice_of(pre.regs[s.reg], s), slice_of(post.regs[s.reg], s)));
  for (uint32_t addr : observed_addrs(h.observables, pre, post))
    eqs.push_back(mk_eq(pre.byte(addr), post.byte(addr)));
  return mk_conj(eqs);
}

Term property_predicate(const Harness &h, const SymState &pre, const SymState &post) {
  std::vector<Term> parts;
  if (h.property.agree)
    parts.push_back(agreement_predicate(h, pre, post));
  if (h.property.expr) {
    PredEnv a = state_env(h, pre), b = state_env(h, post);
    PredEnv pair;
    pair.pre = &a;
    pair.post = &b;
    pair.ident = a.ident;
    parts.push_back(h.property.expr->build(pair));
  }
  return mk_conj(parts);
}

std::vector<Counterexample> check_relative_property(const Harness &h, const RunResult &pre,
                                                    const RunResult &post,
                                                    const std::vector<CompatiblePair> &pairs,
                                                    SolverSession &solver) {
  std::vector<Counterexample> out;
  if (!h.property.enabled())
    return out;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const SymState &a = pre.terminals.at(pairs[k].pre_index);
    const SymState &b = post.terminals.at(pairs[k].post_index);
    Term prop = property_predicate(h, a, b);
    if (prop.is_true())
      continue;
    std::vector<Term> q = joint(a, b);
    q.push_back(mk_not(prop));
    CheckResult r = solver.check(Query(std::move(q), declared_vars(h)));
    if (r.result.sat)
      out.push_back({k, std::move(r.result.model)});
  }
  return out;
}

StatsSnapshot snapshot(const SolverStats &s) {
  return {s.solved.load(), s.core_hits.load(), s.model_hits.load(), s.minimize_solves.load()};
}

ComparisonResult run_comparison(const Harness &h, SolverSession &solver) {
  ComparisonResult res;
  if (h.concolic) {
    ConcolicResult cr = execute_concolic(h, solver);
    res.runs[0] = std::move(cr.runs[0]);
    res.runs[1] = std::move(cr.runs[1]);
    res.inputs_log = std::move(cr.inputs);
    res.concolic = true;
  } else {
    res.runs[0] = execute_complete(h, Side::Pre, solver);
    res.runs[1] = execute_complete(h, Side::Post, solver);
  }
  res.pairs = compatible_pairs(res.runs[0], res.runs[1], solver);
  for (const CompatiblePair &p : res.pairs)
    res.diffs.push_back(diff_pair(res.pre_of(p), res.post_of(p), h.observables, solver, p.witness));
  res.counterexamples = check_relative_property(h, res.runs[0], res.runs[1], res.pairs, solver);
  res.stats = snapshot(solver.stats());
  return res;
}

ComparisonResult run_comparison(const Harness &h) {
  SolverSession solver(h.max_bits, h.caches);
  return run_comparison(h, solver);
}

} // namespace duet
