//===-- solver.cpp - Bit-blasting solver, oracle and caches --------------===//

#include "duet/solver.hpp"

#include "duet/error.hpp"
#include "duet/sat.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace duet {

using sat::Lit;

Query::Query(std::vector<Term> cs, const VarSet &extra) : clauses(std::move(cs)) {
  for (Term c : clauses) {
    if (c.width() != 1)
      throw WidthError("query clauses must have width 1");
    collect_vars(c, vars);
  }
  for (const auto &[n, w] : extra)
    vars.emplace(n, w);
}

unsigned Query::total_bits() const {
  unsigned bits = 0;
  for (const auto &[n, w] : vars)
    bits += w;
  return bits;
}

namespace {

std::atomic<uint64_t> g_is_sat_calls{0};

using Bits = std::vector<Lit>;

class Blaster {
public:
  explicit Blaster(sat::Solver &s) : s_(s) {
    t_ = sat::mk_lit(s_.new_var());
    s_.add_clause({t_});
  }

  Lit tru() const { return t_; }
  Lit fls() const { return sat::neg(t_); }

  const Bits &blast(Term t) {
    if (auto it = memo_.find(t.node()); it != memo_.end())
      return it->second;
    Bits r = build(t);
    return memo_.emplace(t.node(), std::move(r)).first->second;
  }

  const std::map<std::string, Bits> &var_bits() const { return vars_; }

private:
  Lit fresh() { return sat::mk_lit(s_.new_var()); }

  Lit and2(Lit a, Lit b) {
    if (a == fls() || b == fls() || a == sat::neg(b))
      return fls();
    if (a == tru() || a == b)
      return b;
    if (b == tru())
      return a;
    if (a > b)
      std::swap(a, b);
    uint64_t key = (uint64_t(a) << 32) | b;
    if (auto it = and_cache_.find(key); it != and_cache_.end())
      return it->second;
    Lit g = fresh();
    s_.add_clause({sat::neg(g), a});
    s_.add_clause({sat::neg(g), b});
    s_.add_clause({g, sat::neg(a), sat::neg(b)});
    and_cache_.emplace(key, g);
    return g;
  }

  Lit or2(Lit a, Lit b) { return sat::neg(and2(sat::neg(a), sat::neg(b))); }

  Lit xor2(Lit a, Lit b) {
    if (a == fls())
      return b;
    if (b == fls())
      return a;
    if (a == tru())
      return sat::neg(b);
    if (b == tru())
      return sat::neg(a);
    if (a == b)
      return fls();
    if (a == sat::neg(b))
      return tru();
    if (a > b)
      std::swap(a, b);
    uint64_t key = (uint64_t(a) << 32) | b;
    if (auto it = xor_cache_.find(key); it != xor_cache_.end())
      return it->second;
    Lit g = fresh();
    s_.add_clause({sat::neg(g), a, b});
    s_.add_clause({sat::neg(g), sat::neg(a), sat::neg(b)});
    s_.add_clause({g, sat::neg(a), b});
    s_.add_clause({g, a, sat::neg(b)});
    xor_cache_.emplace(key, g);
    return g;
  }

  // c ? a : b
  Lit mux(Lit c, Lit a, Lit b) {
    if (c == tru() || a == b)
      return a;
    if (c == fls())
      return b;
    if (a == tru() && b == fls())
      return c;
    if (a == fls() && b == tru())
      return sat::neg(c);
    Lit g = fresh();
    s_.add_clause({sat::neg(c), sat::neg(a), g});
    s_.add_clause({sat::neg(c), a, sat::neg(g)});
    s_.add_clause({c, sat::neg(b), g});
    s_.add_clause({c, b, sat::neg(g)});
    return g;
  }

  Bits add(const Bits &a, const Bits &b, Lit carry) {
    Bits r(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      Lit x = xor2(a[i], b[i]);
      r[i] = xor2(x, carry);
      if (i + 1 < a.size())
        carry = or2(and2(a[i], b[i]), and2(carry, x));
    }
    return r;
  }

  Lit ult(const Bits &a, const Bits &b) {
    Lit lt = fls();
    for (size_t i = 0; i < a.size(); ++i)
      lt = mux(xor2(a[i], b[i]), b[i], lt);
    return lt;
  }

  Bits shift(Kind k, const Bits &a, const Bits &b) {
    const size_t w = a.size();
    unsigned stages = w == 1 ? 0 : w == 8 ? 3 : w == 16 ? 4 : 5;
    Lit fill = k == Kind::Ashr ? a[w - 1] : fls();
    Bits r = a;
    for (unsigned s = 0; s < stages; ++s) {
      size_t amount = size_t(1) << s;
      Bits shifted(w);
      for (size_t i = 0; i < w; ++i) {
        if (k == Kind::Shl)
          shifted[i] = i >= amount ? r[i - amount] : fls();
        else
          shifted[i] = i + amount < w ? r[i + amount] : fill;
      }
      for (size_t i = 0; i < w; ++i)
        r[i] = mux(b[s], shifted[i], r[i]);
    }
    Lit overflow = fls();
    for (size_t s = stages; s < w; ++s)
      overflow = or2(overflow, b[s]);
    for (size_t i = 0; i < w; ++i)
      r[i] = mux(overflow, fill, r[i]);
    return r;
  }

  Bits build(Term t) {
    const unsigned w = t.width();
    switch (t.kind()) {
    case Kind::Const: {
      Bits r(w);
      for (unsigned i = 0; i < w; ++i)
        r[i] = (t.value() >> i) & 1 ? tru() : fls();
      return r;
    }
    case Kind::Var: {
      auto it = vars_.find(t.name());
      if (it == vars_.end()) {
        Bits r(w);
        for (auto &l : r)
          l = fresh();
        it = vars_.emplace(t.name(), std::move(r)).first;
      } else if (it->second.size() != w) {
        throw WidthError("variable '" + t.name() + "' used at two widths");
      }
      return it->second;
    }
    default:
      break;
    }
    // Copies: blast() may rehash memo_ and invalidate references.
    Bits a = blast(t.kid(0));
    Bits b = t.num_kids() > 1 ? blast(t.kid(1)) : Bits{};
    switch (t.kind()) {
    case Kind::Not: {
      for (auto &l : a)
        l = sat::neg(l);
      return a;
    }
    case Kind::ZExt:
      a.resize(w, fls());
      return a;
    case Kind::SExt: {
      Lit s = a.back();
      a.resize(w, s);
      return a;
    }
    case Kind::Extract:
      return Bits(a.begin() + t.lo(), a.begin() + t.hi() + 1);
    case Kind::Add:
      return add(a, b, fls());
    case Kind::Sub: {
      for (auto &l : b)
        l = sat::neg(l);
      return add(a, b, tru());
    }
    case Kind::Mul: {
      Bits acc(w, fls());
      for (unsigned i = 0; i < w; ++i) {
        if (b[i] == fls())
          continue;
        Bits partial(w, fls());
        for (unsigned j = i; j < w; ++j)
          partial[j] = and2(a[j - i], b[i]);
        acc = add(acc, partial, fls());
      }
      return acc;
    }
    case Kind::And:
    case Kind::Or:
    case Kind::Xor: {
      Bits r(w);
      for (unsigned i = 0; i < w; ++i)
        r[i] = t.kind() == Kind::And ? and2(a[i], b[i])
               : t.kind() == Kind::Or ? or2(a[i], b[i])
                                      : xor2(a[i], b[i]);
      return r;
    }
    case Kind::Shl:
    case Kind::Lshr:
    case Kind::Ashr:
      return shift(t.kind(), a, b);
    case Kind::Eq: {
      Lit all = tru();
      for (size_t i = 0; i < a.size(); ++i)
        all = and2(all, sat::neg(xor2(a[i], b[i])));
      return {all};
    }
    case Kind::Ult:
      return {ult(a, b)};
    case Kind::Slt: {
      a.back() = sat::neg(a.back());
      b.back() = sat::neg(b.back());
      return {ult(a, b)};
    }
    case Kind::Ite: {
      Bits c = blast(t.kid(2));
      Lit cond = a[0];
      Bits r(w);
      for (unsigned i = 0; i < w; ++i)
        r[i] = mux(cond, b[i], c[i]);
      return r;
    }
    default:
      break;
    }
    throw Error("bit-blaster: unhandled term kind");
  }

  sat::Solver &s_;
  Lit t_;
  std::unordered_map<const TermNode *, Bits> memo_;
  std::map<std::string, Bits> vars_;
  std::unordered_map<uint64_t, Lit> and_cache_, xor_cache_;
};

void check_budget(const Query &q, unsigned max_bits) {
  unsigned bits = q.total_bits();
  if (bits > max_bits)
    throw BudgetExceeded(bits, max_bits);
}

} // namespace

uint64_t is_sat_call_count() { return g_is_sat_calls.load(); }

SatResult is_sat(const Query &q, unsigned max_bits) {
  check_budget(q, max_bits);
  g_is_sat_calls.fetch_add(1, std::memory_order_relaxed);

  sat::Solver s;
  Blaster bb(s);
  std::vector<Lit> selectors;
  selectors.reserve(q.clauses.size());
  for (Term c : q.clauses) {
    Lit root = bb.blast(c)[0];
    Lit sel = sat::mk_lit(s.new_var());
    s.add_clause({sat::neg(sel), root});
    selectors.push_back(sel);
  }

  SatResult r;
  r.sat = s.solve(selectors);
  if (r.sat) {
    const auto &vb = bb.var_bits();
    for (const auto &[name, w] : q.vars) {
      uint32_t v = 0;
      if (auto it = vb.find(name); it != vb.end())
        for (size_t i = 0; i < it->second.size(); ++i) {
          Lit l = it->second[i];
          bool bit = s.model_value(sat::var_of(l)) != sat::is_neg(l);
          v |= uint32_t(bit) << i;
        }
      r.model[name] = v;
    }
    return r;
  }
  std::unordered_map<Lit, size_t> index_of;
  for (size_t i = 0; i < selectors.size(); ++i)
    index_of.emplace(selectors[i], i);
  for (Lit l : s.failed_assumptions())
    if (auto it = index_of.find(l); it != index_of.end())
      r.core.push_back(it->second);
  std::sort(r.core.begin(), r.core.end());
  r.core.erase(std::unique(r.core.begin(), r.core.end()), r.core.end());
  return r;
}

// --- compiled evaluation ---------------------------------------------------

CompiledTerms::CompiledTerms(const std::vector<Term> &roots, const VarSet &vars) {
  std::map<std::string, uint32_t> var_index;
  for (const auto &[n, w] : vars) {
    var_index.emplace(n, static_cast<uint32_t>(var_names_.size()));
    var_names_.push_back(n);
    var_widths_.push_back(w);
  }
  std::unordered_map<const TermNode *, uint32_t> slot;
  std::vector<std::pair<const TermNode *, bool>> stack;
  for (Term root : roots) {
    stack.push_back({root.node(), false});
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(n))
        continue;
      if (!expanded && n->nkids > 0) {
        stack.push_back({n, true});
        for (unsigned i = 0; i < n->nkids; ++i)
          if (!slot.count(n->kids[i]))
            stack.push_back({n->kids[i], false});
        continue;
      }
      Op op{n->kind, n->width, 0, n->hi, n->lo, 0, 0, 0};
      if (n->kind == Kind::Const) {
        op.a = n->value;
      } else if (n->kind == Kind::Var) {
        auto it = var_index.find(n->name);
        if (it == var_index.end())
          throw UnboundVariable(n->name);
        op.a = it->second;
      } else {
        op.kid_width = n->kids[0]->width;
        op.a = slot.at(n->kids[0]);
        if (n->nkids > 1)
          op.b = slot.at(n->kids[1]);
        if (n->nkids > 2)
          op.c = slot.at(n->kids[2]);
      }
      slot.emplace(n, static_cast<uint32_t>(ops_.size()));
      ops_.push_back(op);
    }
    roots_.push_back(slot.at(root.node()));
  }
}

void CompiledTerms::exec(const uint32_t *values, uint32_t *s) const {
  for (size_t i = 0; i < ops_.size(); ++i) {
    const Op &op = ops_[i];
    switch (op.kind) {
    case Kind::Const:
      s[i] = op.a;
      break;
    case Kind::Var:
      s[i] = values[op.a] & width_mask(op.width);
      break;
    case Kind::Ite:
      s[i] = s[op.a] ? s[op.b] : s[op.c];
      break;
    default:
      s[i] = apply_op(op.kind, op.width, op.kid_width, s[op.a], s[op.b], 0,
                      op.hi, op.lo);
      break;
    }
  }
}

bool CompiledTerms::all_true(const uint32_t *values, uint32_t *scratch) const {
  exec(values, scratch);
  for (uint32_t r : roots_)
    if (!scratch[r])
      return false;
  return true;
}

void CompiledTerms::eval_all(const uint32_t *values, uint32_t *scratch,
                             uint32_t *out) const {
  exec(values, scratch);
  for (size_t i = 0; i < roots_.size(); ++i)
    out[i] = scratch[roots_[i]];
}

void index_to_values(uint64_t index, const std::vector<unsigned> &widths,
                     uint32_t *values) {
  for (size_t i = 0; i < widths.size(); ++i) {
    values[i] = static_cast<uint32_t>(index & width_mask(widths[i]));
    index = widths[i] >= 32 ? index >> 32 : index >> widths[i];
  }
}

namespace {

SatResult model_from_index(const Query &q, const CompiledTerms &ct, uint64_t idx) {
  SatResult r;
  r.sat = true;
  std::vector<uint32_t> values(ct.num_vars());
  index_to_values(idx, ct.var_widths(), values.data());
  for (size_t i = 0; i < values.size(); ++i)
    r.model[ct.var_names()[i]] = values[i];
  (void)q;
  return r;
}

SatResult unsat_all(const Query &q) {
  SatResult r;
  for (size_t i = 0; i < q.clauses.size(); ++i)
    r.core.push_back(i);
  return r;
}

} // namespace

SatResult brute_force_sat(const Query &q, unsigned max_bits) {
  check_budget(q, max_bits);
  CompiledTerms ct(q.clauses, q.vars);
  const uint64_t n = uint64_t(1) << q.total_bits();
  std::vector<uint32_t> values(ct.num_vars()), scratch(ct.scratch_size() + 1);
  for (uint64_t idx = 0; idx < n; ++idx) {
    index_to_values(idx, ct.var_widths(), values.data());
    if (ct.all_true(values.data(), scratch.data()))
      return model_from_index(q, ct, idx);
  }
  return unsat_all(q);
}

SatResult brute_force_sat_parallel(const Query &q, unsigned max_bits) {
  check_budget(q, max_bits);
  CompiledTerms ct(q.clauses, q.vars);
  const uint64_t n = uint64_t(1) << q.total_bits();
  constexpr uint64_t kBlock = 4096;
  const int64_t blocks = static_cast<int64_t>((n + kBlock - 1) / kBlock);
  std::atomic<uint64_t> best{n};

#pragma omp parallel
  {
    std::vector<uint32_t> values(ct.num_vars()), scratch(ct.scratch_size() + 1);
#pragma omp for schedule(dynamic, 1)
    for (int64_t blk = 0; blk < blocks; ++blk) {
      const uint64_t start = uint64_t(blk) * kBlock;
      if (start >= best.load(std::memory_order_relaxed))
        continue;
      const uint64_t end = std::min(n, start + kBlock);
      for (uint64_t idx = start; idx < end; ++idx) {
        index_to_values(idx, ct.var_widths(), values.data());
        if (ct.all_true(values.data(), scratch.data())) {
          uint64_t cur = best.load();
          while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
          }
          break;
        }
      }
    }
  }
  if (best.load() < n)
    return model_from_index(q, ct, best.load());
  return unsat_all(q);
}

std::vector<size_t> minimize_core(const Query &q, unsigned max_bits) {
  SatResult r = is_sat(q, max_bits);
  if (r.sat)
    throw Error("minimize_core: query is satisfiable");
  std::vector<size_t> core = r.core;
  std::unordered_set<size_t> necessary;
  while (true) {
    auto it = std::find_if(core.begin(), core.end(),
                           [&](size_t c) { return !necessary.count(c); });
    if (it == core.end())
      return core;
    const size_t candidate = *it;
    std::vector<size_t> trial;
    std::vector<Term> clauses;
    for (size_t c : core)
      if (c != candidate) {
        trial.push_back(c);
        clauses.push_back(q.clauses[c]);
      }
    SatResult s = is_sat(Query(clauses), max_bits);
    if (s.sat) {
      necessary.insert(candidate);
      continue;
    }
    std::vector<size_t> next;
    for (size_t k : s.core)
      next.push_back(trial[k]);
    std::sort(next.begin(), next.end());
    core = std::move(next);
  }
}

// --- caches ----------------------------------------------------------------

std::optional<std::vector<uint64_t>>
CoreCache::find_subset(const std::vector<uint64_t> &ids) const {
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto &core : cores_)
    if (std::includes(ids.begin(), ids.end(), core.begin(), core.end()))
      return core;
  return std::nullopt;
}

void CoreCache::insert(std::vector<uint64_t> core_ids) {
  std::sort(core_ids.begin(), core_ids.end());
  core_ids.erase(std::unique(core_ids.begin(), core_ids.end()), core_ids.end());
  std::lock_guard<std::mutex> lock(mu_);
  if (std::find(cores_.begin(), cores_.end(), core_ids) == cores_.end())
    cores_.push_back(std::move(core_ids));
}

size_t CoreCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cores_.size();
}

std::vector<std::vector<uint64_t>> CoreCache::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cores_;
}

std::optional<Assignment> ModelCache::find_satisfying(const std::vector<Term> &clauses) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto it = models_.begin(); it != models_.end(); ++it) {
    bool ok = true;
    for (Term c : clauses)
      if (!eval_or_zero(c, *it)) {
        ok = false;
        break;
      }
    if (!ok)
      continue;
    Assignment hit = *it;
    models_.erase(it);
    models_.push_front(hit);
    return hit;
  }
  return std::nullopt;
}

void ModelCache::insert(const Assignment &m) {
  if (capacity_ == 0)
    return;
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = std::find(models_.begin(), models_.end(), m); it != models_.end())
    models_.erase(it);
  models_.push_front(m);
  while (models_.size() > capacity_)
    models_.pop_back();
}

size_t ModelCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return models_.size();
}

const char *to_string(CacheHit h) {
  switch (h) {
  case CacheHit::CoreHit:
    return "core-hit";
  case CacheHit::ModelHit:
    return "model-hit";
  case CacheHit::Solved:
    return "solved";
  }
  return "?";
}

std::vector<uint64_t> clause_ids(const std::vector<Term> &clauses) {
  std::vector<uint64_t> ids;
  ids.reserve(clauses.size());
  for (Term c : clauses)
    ids.push_back(c.id());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

CheckResult check_with_caches(const Query &q, CoreCache &cores, ModelCache &models,
                              unsigned max_bits, SolverStats *stats) {
  check_budget(q, max_bits);
  CheckResult out;
  const std::vector<uint64_t> ids = clause_ids(q.clauses);

  if (auto core = cores.find_subset(ids)) {
    out.kind = CacheHit::CoreHit;
    out.result.sat = false;
    for (size_t i = 0; i < q.clauses.size(); ++i)
      if (std::binary_search(core->begin(), core->end(), q.clauses[i].id()))
        out.result.core.push_back(i);
    if (stats)
      ++stats->core_hits;
    return out;
  }

  if (auto m = models.find_satisfying(q.clauses)) {
    out.kind = CacheHit::ModelHit;
    out.result.sat = true;
    for (const auto &[name, w] : q.vars) {
      auto it = m->find(name);
      out.result.model[name] = it == m->end() ? 0 : it->second & width_mask(w);
    }
    if (stats)
      ++stats->model_hits;
    return out;
  }

  out.kind = CacheHit::Solved;
  out.result = is_sat(q, max_bits);
  if (stats)
    ++stats->solved;
  if (out.result.sat) {
    models.insert(out.result.model);
  } else {
    const uint64_t before = is_sat_call_count();
    std::vector<size_t> core = minimize_core(q, max_bits);
    if (stats)
      stats->minimize_solves += is_sat_call_count() - before;
    std::vector<uint64_t> core_ids;
    for (size_t i : core)
      core_ids.push_back(q.clauses[i].id());
    cores.insert(core_ids);
    out.result.core = core;
  }
  return out;
}

CheckResult SolverSession::check(const Query &q) {
  if (caches_enabled_)
    return check_with_caches(q, cores_, models_, max_bits_, &stats_);
  CheckResult out;
  out.result = is_sat(q, max_bits_);
  ++stats_.solved;
  return out;
}

// --- SMT-LIB ---------------------------------------------------------------

namespace {

std::string smt_sort(unsigned w) { return "(_ BitVec " + std::to_string(w) + ")"; }

std::string smt_const(uint32_t v, unsigned w) {
  return "(_ bv" + std::to_string(v) + " " + std::to_string(w) + ")";
}

} // namespace

std::string to_smtlib(const Query &q) {
  std::ostringstream os;
  os << "(set-logic QF_BV)\n";
  for (const auto &[n, w] : q.vars)
    os << "(declare-const |" << n << "| " << smt_sort(w) << ")\n";

  std::unordered_map<const TermNode *, std::string> names;
  auto ref = [&](Term t) -> std::string {
    if (t.is_const())
      return smt_const(t.value(), t.width());
    if (t.is_var())
      return "|" + t.name() + "|";
    return names.at(t.node());
  };
  auto as_bool = [&](Term t) { return "(= " + ref(t) + " #b1)"; };
  auto from_bool = [](const std::string &b) { return "(ite " + b + " #b1 #b0)"; };

  std::function<void(Term)> define = [&](Term t) {
    if (t.is_const() || t.is_var() || names.count(t.node()))
      return;
    for (size_t i = 0; i < t.num_kids(); ++i)
      define(t.kid(i));
    std::string body;
    auto k = [&](size_t i) { return ref(t.kid(i)); };
    switch (t.kind()) {
    case Kind::Not: body = "(bvnot " + k(0) + ")"; break;
    case Kind::ZExt:
      body = "((_ zero_extend " + std::to_string(t.width() - t.kid(0).width()) + ") " + k(0) + ")";
      break;
    case Kind::SExt:
      body = "((_ sign_extend " + std::to_string(t.width() - t.kid(0).width()) + ") " + k(0) + ")";
      break;
    case Kind::Extract:
      body = "((_ extract " + std::to_string(t.hi()) + " " + std::to_string(t.lo()) + ") " + k(0) + ")";
      break;
    case Kind::Add: body = "(bvadd " + k(0) + " " + k(1) + ")"; break;
    case Kind::Sub: body = "(bvsub " + k(0) + " " + k(1) + ")"; break;
    case Kind::Mul: body = "(bvmul " + k(0) + " " + k(1) + ")"; break;
    case Kind::And: body = "(bvand " + k(0) + " " + k(1) + ")"; break;
    case Kind::Or: body = "(bvor " + k(0) + " " + k(1) + ")"; break;
    case Kind::Xor: body = "(bvxor " + k(0) + " " + k(1) + ")"; break;
    case Kind::Shl: body = "(bvshl " + k(0) + " " + k(1) + ")"; break;
    case Kind::Lshr: body = "(bvlshr " + k(0) + " " + k(1) + ")"; break;
    case Kind::Ashr: body = "(bvashr " + k(0) + " " + k(1) + ")"; break;
    case Kind::Eq: body = from_bool("(= " + k(0) + " " + k(1) + ")"); break;
    case Kind::Slt: body = from_bool("(bvslt " + k(0) + " " + k(1) + ")"); break;
    case Kind::Ult: body = from_bool("(bvult " + k(0) + " " + k(1) + ")"); break;
    case Kind::Ite:
      body = "(ite " + as_bool(t.kid(0)) + " " + k(1) + " " + k(2) + ")";
      break;
    default: break;
    }
    std::string name = "t" + std::to_string(t.id());
    os << "(define-fun " << name << " () " << smt_sort(t.width()) << " " << body << ")\n";
    names.emplace(t.node(), name);
  };

  for (size_t i = 0; i < q.clauses.size(); ++i) {
    define(q.clauses[i]);
    os << "(assert (! " << as_bool(q.clauses[i]) << " :named c" << i << "))\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

} // namespace duet
