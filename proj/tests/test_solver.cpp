#include "duet/error.hpp"
#include "duet/sat.hpp"
#include "duet/solver.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace duet;
using namespace duet::testgen;

namespace {

bool holds_all(const Query &q, const Assignment &m) {
  for (Term c : q.clauses)
    if (!eval_or_zero(c, m))
      return false;
  return true;
}

Query sub_query(const Query &q, const std::vector<size_t> &idx) {
  std::vector<Term> cs;
  for (size_t i : idx)
    cs.push_back(q.clauses[i]);
  return Query(cs);
}

// Random query whose domain stays small enough for the oracle.
Query random_query(Rng &rng, bool raw, unsigned max_bits = 16) {
  while (true) {
    VarDecls vars = random_vars(rng, 3, 16);
    unsigned n = 1 + rng.below(4);
    std::vector<Term> cs;
    for (unsigned i = 0; i < n; ++i)
      cs.push_back(random_term(rng, vars, 1, 3, raw));
    Query q(cs);
    if (q.total_bits() <= max_bits)
      return q;
  }
}

} // namespace

// --- CDCL core -------------------------------------------------------------

TEST(Sat, RandomCnfAgreesWithEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 400; ++trial) {
    unsigned nv = 3 + rng.below(10);
    unsigned nc = rng.below(nv * 5);
    std::vector<std::vector<sat::Lit>> cnf;
    for (unsigned i = 0; i < nc; ++i) {
      std::vector<sat::Lit> c;
      for (unsigned k = 0, len = 1 + rng.below(3); k < len; ++k)
        c.push_back(sat::mk_lit(rng.below(nv), rng.coin()));
      cnf.push_back(c);
    }
    bool expect = false;
    for (uint32_t m = 0; m < (1u << nv) && !expect; ++m) {
      bool all = true;
      for (const auto &c : cnf) {
        bool any = false;
        for (sat::Lit l : c)
          any |= (((m >> sat::var_of(l)) & 1) != 0) != sat::is_neg(l);
        all &= any;
      }
      expect = all;
    }
    sat::Solver s;
    for (unsigned v = 0; v < nv; ++v)
      s.new_var();
    for (const auto &c : cnf)
      s.add_clause(c);
    bool got = s.solve();
    ASSERT_EQ(got, expect) << trial;
    if (got)
      for (const auto &c : cnf) {
        bool any = false;
        for (sat::Lit l : c)
          any |= s.model_value(sat::var_of(l)) != sat::is_neg(l);
        ASSERT_TRUE(any);
      }
  }
}

TEST(Sat, FailedAssumptionsAreSufficient) {
  Rng rng(2);
  int unsat_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    unsigned nv = 4 + rng.below(8);
    sat::Solver s;
    for (unsigned v = 0; v < nv + 6; ++v)
      s.new_var();
    std::vector<sat::Lit> sels;
    std::vector<std::vector<sat::Lit>> cnf;
    for (unsigned i = 0; i < 6; ++i) {
      sat::Lit sel = sat::mk_lit(nv + i);
      sels.push_back(sel);
      for (unsigned j = 0; j < 3; ++j) {
        std::vector<sat::Lit> c{sat::neg(sel)};
        for (unsigned k = 0; k < 2; ++k)
          c.push_back(sat::mk_lit(rng.below(nv), rng.coin()));
        s.add_clause(c);
        cnf.push_back(c);
      }
    }
    if (s.solve(sels))
      continue;
    ++unsat_seen;
    std::vector<sat::Lit> failed = s.failed_assumptions();
    for (sat::Lit l : failed)
      ASSERT_NE(std::find(sels.begin(), sels.end(), l), sels.end());
    sat::Solver again;
    for (unsigned v = 0; v < nv + 6; ++v)
      again.new_var();
    for (const auto &c : cnf)
      again.add_clause(c);
    ASSERT_FALSE(again.solve(failed));
  }
  EXPECT_GT(unsat_seen, 10);
}

// --- term queries ----------------------------------------------------------

TEST(Solver, RangeExample) {
  Term x = mk_var("x", 8);
  Query q({mk_ult(x, mk_const(5, 8)), mk_ult(mk_const(2, 8), x)});
  SatResult r = is_sat(q);
  ASSERT_TRUE(r.sat);
  EXPECT_TRUE(r.model.at("x") == 3 || r.model.at("x") == 4);
  SatResult b = brute_force_sat(q);
  ASSERT_TRUE(b.sat);
  EXPECT_EQ(b.model.at("x"), 3u);
}

TEST(Solver, ContradictionHasTwoClauseCore) {
  Term x = mk_var("x", 32);
  Query q({mk_eq(x, mk_const(1, 32)), mk_eq(x, mk_const(2, 32))});
  SatResult r = is_sat(q, 32);
  EXPECT_FALSE(r.sat);
  EXPECT_EQ(r.core, (std::vector<size_t>{0, 1}));
  EXPECT_EQ(minimize_core(q, 32), (std::vector<size_t>{0, 1}));
}

TEST(Solver, EmptyAndConstantQueries) {
  EXPECT_TRUE(is_sat(Query()).sat);
  EXPECT_TRUE(brute_force_sat(Query()).sat);
  Query f({mk_bool(true), mk_bool(false)});
  SatResult r = is_sat(f);
  EXPECT_FALSE(r.sat);
  EXPECT_EQ(r.core, (std::vector<size_t>{1}));
  Query extra({mk_bool(true)}, {{"y", 8}});
  SatResult e = is_sat(extra);
  ASSERT_TRUE(e.sat);
  EXPECT_EQ(e.model.count("y"), 1u);
}

TEST(Solver, BudgetIsEnforced) {
  Term a = mk_var("a", 32);
  Query q({mk_eq(a, mk_const(7, 32))});
  EXPECT_THROW(is_sat(q, 24), BudgetExceeded);
  EXPECT_THROW(brute_force_sat(q), BudgetExceeded);
  EXPECT_TRUE(is_sat(q, 32).sat);
}

TEST(Solver, EveryOperatorMatchesConcreteSemantics) {
  static const Kind bin[] = {Kind::Add, Kind::Sub, Kind::Mul, Kind::And,
                             Kind::Or, Kind::Xor, Kind::Shl, Kind::Lshr,
                             Kind::Ashr, Kind::Eq, Kind::Slt, Kind::Ult};
  Rng rng(3);
  for (unsigned w : {1u, 8u, 16u, 32u})
    for (Kind k : bin)
      for (int i = 0; i < 12; ++i) {
        uint32_t av = rng.value(w), bv = rng.value(w);
        if ((k == Kind::Shl || k == Kind::Lshr || k == Kind::Ashr) && rng.coin())
          bv = rng.below(w + 3) & width_mask(w);
        Term x = mk_var("x", w), y = mk_var("y", w);
        Term op = mk_node(k, std::vector<Term>{x, y});
        Term z = mk_var("z", op.width());
        Query q({mk_eq(x, mk_const(av, w)), mk_eq(y, mk_const(bv, w)), mk_eq(op, z)});
        SatResult r = is_sat(q, 96);
        ASSERT_TRUE(r.sat);
        EXPECT_EQ(r.model.at("z"), apply_op(k, op.width(), w, av, bv))
            << int(k) << " w" << w << " " << av << "," << bv;
      }
}

TEST(Solver, UnaryOperatorsMatchConcreteSemantics) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    unsigned w = rng.pick_width();
    uint32_t v = rng.value(w);
    Term x = mk_var("x", w);
    std::vector<Term> outs{mk_not(x)};
    unsigned ew;
    do
      ew = rng.pick_width();
    while (ew > w);
    unsigned lo = rng.below(w - ew + 1);
    outs.push_back(mk_extract(x, lo + ew - 1, lo));
    if (w < 32) {
      outs.push_back(mk_zext(x, 32));
      outs.push_back(mk_sext(x, 32));
    }
    Term c = mk_var("c", 1);
    outs.push_back(mk_ite(c, x, mk_not(x)));
    for (Term o : outs) {
      Term z = mk_var("z", o.width());
      bool cv = rng.coin();
      Query q({mk_eq(x, mk_const(v, w)), mk_eq(c, mk_bool(cv)), mk_eq(o, z)});
      SatResult r = is_sat(q, 96);
      ASSERT_TRUE(r.sat);
      EXPECT_EQ(r.model.at("z"), eval(o, {{"x", v}, {"c", cv}})) << pretty(o);
    }
  }
}

TEST(Solver, AgreesWithBruteForceOnRandomQueries) {
  Rng rng(5);
  int sat = 0, unsat = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Query q = random_query(rng, trial % 2 == 1);
    SatResult a = is_sat(q);
    SatResult b = brute_force_sat(q);
    ASSERT_EQ(a.sat, b.sat) << trial;
    if (a.sat) {
      ++sat;
      ASSERT_EQ(a.model.size(), q.vars.size());
      ASSERT_TRUE(holds_all(q, a.model)) << trial;
    } else {
      ++unsat;
      ASSERT_FALSE(a.core.empty());
      ASSERT_TRUE(std::is_sorted(a.core.begin(), a.core.end()));
      ASSERT_FALSE(brute_force_sat(sub_query(q, a.core)).sat) << trial;
    }
  }
  EXPECT_GT(sat, 100);
  EXPECT_GT(unsat, 50);
}

TEST(Solver, BruteForceModelIsLowestIndex) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    Query q = random_query(rng, false, 12);
    SatResult b = brute_force_sat(q);
    if (!b.sat)
      continue;
    CompiledTerms ct(q.clauses, q.vars);
    uint64_t idx = 0, shift = 0;
    for (size_t i = 0; i < ct.num_vars(); ++i) {
      idx |= uint64_t(b.model.at(ct.var_names()[i])) << shift;
      shift += ct.var_widths()[i];
    }
    std::vector<uint32_t> vals(ct.num_vars()), scratch(ct.scratch_size() + 1);
    for (uint64_t j = 0; j < idx; ++j) {
      index_to_values(j, ct.var_widths(), vals.data());
      ASSERT_FALSE(ct.all_true(vals.data(), scratch.data()));
    }
  }
}

TEST(Solver, ParallelBruteForceMatchesSerial) {
  Rng rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    Query q = random_query(rng, trial % 3 == 0, 20);
    SatResult s = brute_force_sat(q), p = brute_force_sat_parallel(q);
    ASSERT_EQ(s.sat, p.sat);
    ASSERT_EQ(s.model, p.model);
    ASSERT_EQ(s.core, p.core);
  }
}

TEST(Solver, CompiledTermsMatchEval) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    VarDecls vars = random_vars(rng, 4);
    std::vector<Term> roots;
    for (int i = 0; i < 3; ++i)
      roots.push_back(random_term(rng, vars, rng.pick_width(), 4, rng.coin()));
    VarSet vs;
    for (const auto &v : vars)
      vs[v.name] = v.width;
    CompiledTerms ct(roots, vs);
    std::vector<uint32_t> scratch(ct.scratch_size() + 1), out(roots.size());
    for (int j = 0; j < 10; ++j) {
      Assignment a = random_assignment(rng, vars);
      std::vector<uint32_t> vals;
      for (const auto &n : ct.var_names())
        vals.push_back(a.at(n));
      ct.eval_all(vals.data(), scratch.data(), out.data());
      for (size_t i = 0; i < roots.size(); ++i)
        ASSERT_EQ(out[i], eval(roots[i], a));
    }
  }
}

TEST(Solver, MinimizedCoresAreIrreducible) {
  Rng rng(9);
  int checked = 0;
  while (checked < 150) {
    Query q = random_query(rng, false);
    std::vector<Term> more = q.clauses;
    while (more.size() < 6)
      more.push_back(random_term(rng, {{"m", 8}}, 1, 2));
    Query big(more);
    if (big.total_bits() > 20 || is_sat(big).sat)
      continue;
    std::vector<size_t> core = minimize_core(big);
    ASSERT_FALSE(brute_force_sat(sub_query(big, core)).sat);
    for (size_t drop = 0; drop < core.size(); ++drop) {
      std::vector<size_t> rest = core;
      rest.erase(rest.begin() + drop);
      ASSERT_TRUE(brute_force_sat(sub_query(big, rest)).sat);
    }
    ++checked;
  }
  Term x = mk_var("x", 8);
  EXPECT_THROW(minimize_core(Query({mk_eq(x, x)})), Error);
}

// --- caches ----------------------------------------------------------------

TEST(Cache, CoreHitNeedsNoSolve) {
  Term x = mk_var("x", 32), y = mk_var("y", 32);
  Term c1 = mk_eq(x, mk_const(1, 32)), c2 = mk_eq(x, mk_const(2, 32));
  Term other = mk_ult(y, mk_const(9, 32));
  SolverSession s(64);
  CheckResult first = s.check({c1, c2});
  EXPECT_EQ(first.kind, CacheHit::Solved);
  EXPECT_FALSE(first.result.sat);
  EXPECT_EQ(s.cores().size(), 1u);

  uint64_t before = is_sat_call_count();
  CheckResult second = s.check({other, c2, c1});
  EXPECT_EQ(is_sat_call_count(), before);
  EXPECT_EQ(second.kind, CacheHit::CoreHit);
  EXPECT_FALSE(second.result.sat);
  EXPECT_EQ(second.result.core, (std::vector<size_t>{1, 2}));
  EXPECT_EQ(s.stats().core_hits.load(), 1u);
}

TEST(Cache, ModelHitNeedsNoSolve) {
  Term x = mk_var("x", 8);
  SolverSession s;
  CheckResult first = s.check({mk_eq(x, mk_const(4, 8))});
  ASSERT_TRUE(first.result.sat);
  uint64_t before = is_sat_call_count();
  CheckResult second = s.check({mk_ult(x, mk_const(10, 8))});
  EXPECT_EQ(is_sat_call_count(), before);
  EXPECT_EQ(second.kind, CacheHit::ModelHit);
  EXPECT_EQ(second.result.model.at("x"), 4u);
  EXPECT_EQ(s.stats().model_hits.load(), 1u);
}

TEST(Cache, ModelMissingVariablesReadZero) {
  Term x = mk_var("x", 8), y = mk_var("y", 8);
  SolverSession s;
  s.check({mk_eq(x, mk_const(4, 8))});
  CheckResult r = s.check({mk_eq(y, mk_const(0, 8)), mk_eq(x, mk_const(4, 8))});
  EXPECT_EQ(r.kind, CacheHit::ModelHit);
  EXPECT_EQ(r.result.model.at("y"), 0u);
}

TEST(Cache, ModelCacheIsBoundedLru) {
  ModelCache mc(3);
  for (uint32_t i = 0; i < 5; ++i)
    mc.insert({{"x", i}});
  EXPECT_EQ(mc.size(), 3u);
  Term x = mk_var("x", 8);
  EXPECT_FALSE(mc.find_satisfying({mk_eq(x, mk_const(0, 8))}));
  EXPECT_TRUE(mc.find_satisfying({mk_eq(x, mk_const(2, 8))}));
  mc.insert({{"x", 9}});
  EXPECT_TRUE(mc.find_satisfying({mk_eq(x, mk_const(2, 8))}));
  EXPECT_FALSE(mc.find_satisfying({mk_eq(x, mk_const(3, 8))}));
}

TEST(Cache, VerdictsEqualUncachedSolver) {
  Rng rng(10);
  SolverSession cached, plain(kDefaultSolverBits, false);
  std::vector<Term> pool;
  VarDecls vars{{"a", 8}, {"b", 8}};
  for (int i = 0; i < 30; ++i)
    pool.push_back(random_term(rng, vars, 1, 2));
  int hits = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<Term> cs;
    for (unsigned k = 0, n = 1 + rng.below(4); k < n; ++k)
      cs.push_back(pool[rng.below(pool.size())]);
    Query q(cs);
    CheckResult c = cached.check(q);
    CheckResult p = plain.check(q);
    ASSERT_EQ(c.result.sat, p.result.sat) << trial;
    ASSERT_EQ(c.result.sat, brute_force_sat(q).sat);
    if (c.result.sat)
      ASSERT_TRUE(holds_all(q, c.result.model));
    else
      ASSERT_FALSE(brute_force_sat(sub_query(q, c.result.core)).sat);
    hits += c.kind != CacheHit::Solved;
  }
  EXPECT_GT(hits, 100);
  EXPECT_EQ(plain.stats().solved.load(), 400u);
}

TEST(Smtlib, DeclaresAndAssertsEveryClause) {
  Term x = mk_var("x", 8);
  Term sh = mk_add(x, mk_const(1, 8));
  Query q({mk_ult(sh, mk_const(5, 8)), mk_eq(mk_mul(sh, sh), mk_const(4, 8))});
  std::string s = to_smtlib(q);
  EXPECT_NE(s.find("(declare-const |x| (_ BitVec 8))"), std::string::npos);
  EXPECT_NE(s.find(":named c0"), std::string::npos);
  EXPECT_NE(s.find(":named c1"), std::string::npos);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
  std::string def = "(define-fun t" + std::to_string(sh.id()) + " ";
  size_t first = s.find(def);
  ASSERT_NE(first, std::string::npos);
  EXPECT_EQ(s.find(def, first + 1), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '('), std::count(s.begin(), s.end(), ')'));
}
