//===-- bench_duet.cpp - Solver and pairing microbenchmarks ---------------===//

#include "duet/compare.hpp"

#include <benchmark/benchmark.h>

using namespace duet;

namespace {

// x * y == 251 over 8-bit x, y with both factors above 1: unsat (251 is
// prime), so enumeration visits all 2^16 assignments.
Query product_query() {
  Term x = mk_zext(mk_var("x", 8), 16), y = mk_zext(mk_var("y", 8), 16);
  Term one = mk_const(1, 16);
  return Query({mk_ult(one, x), mk_ult(one, y), mk_eq(mk_mul(x, y), mk_const(251, 16))});
}

void BM_BruteForceSerial(benchmark::State &st) {
  Query q = product_query();
  for (auto _ : st)
    benchmark::DoNotOptimize(brute_force_sat(q, 32).sat);
}
BENCHMARK(BM_BruteForceSerial)->Unit(benchmark::kMillisecond);

void BM_BruteForceParallel(benchmark::State &st) {
  Query q = product_query();
  for (auto _ : st)
    benchmark::DoNotOptimize(brute_force_sat_parallel(q, 32).sat);
}
BENCHMARK(BM_BruteForceParallel)->Unit(benchmark::kMillisecond);

void BM_IsSat(benchmark::State &st) {
  Query q = product_query();
  for (auto _ : st)
    benchmark::DoNotOptimize(is_sat(q, 64).sat);
}
BENCHMARK(BM_IsSat)->Unit(benchmark::kMillisecond);

// n x n terminals: pre leaf i has x == i, post leaf j has x <u j + 1.
RunResult ladder(Side side, unsigned n) {
  RunResult r;
  r.side = side;
  Term x = mk_var("x", 8);
  for (unsigned i = 0; i < n; ++i) {
    SymState s;
    s.node_id = i;
    s.constraints = {side == Side::Pre ? mk_eq(x, mk_const(i, 8)) : mk_ult(x, mk_const(i + 1, 8))};
    r.terminals.push_back(std::move(s));
  }
  return r;
}

void BM_PairsCached(benchmark::State &st) {
  RunResult a = ladder(Side::Pre, unsigned(st.range(0))), b = ladder(Side::Post, unsigned(st.range(0)));
  for (auto _ : st) {
    SolverSession s(64, true);
    benchmark::DoNotOptimize(compatible_pairs(a, b, s).size());
  }
}
BENCHMARK(BM_PairsCached)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_PairsUncached(benchmark::State &st) {
  RunResult a = ladder(Side::Pre, unsigned(st.range(0))), b = ladder(Side::Post, unsigned(st.range(0)));
  for (auto _ : st) {
    SolverSession s(64, false);
    benchmark::DoNotOptimize(compatible_pairs(a, b, s).size());
  }
}
BENCHMARK(BM_PairsUncached)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_PairsParallel(benchmark::State &st) {
  RunResult a = ladder(Side::Pre, unsigned(st.range(0))), b = ladder(Side::Post, unsigned(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(compatible_pairs_parallel(a, b, 64).size());
}
BENCHMARK(BM_PairsParallel)->Arg(16)->Arg(48)->Unit(benchmark::kMillisecond);

// n x n terminals where odd post leaves contradict every pre leaf through
// the same two clauses (y <u 8 against its negation).
std::pair<RunResult, RunResult> shared_family(unsigned n) {
  RunResult a, b;
  a.side = Side::Pre;
  b.side = Side::Post;
  Term x = mk_var("x", 8), y = mk_var("y", 8), z = mk_var("z", 8);
  Term low = mk_ult(y, mk_const(8, 8));
  for (unsigned i = 0; i < n; ++i) {
    SymState s, t;
    s.node_id = t.node_id = i;
    s.constraints = {mk_eq(x, mk_const(i, 8)), low};
    t.constraints = {mk_eq(z, mk_const(i, 8)), i % 2 ? mk_not(low) : low};
    a.terminals.push_back(std::move(s));
    b.terminals.push_back(std::move(t));
  }
  return {std::move(a), std::move(b)};
}

void BM_SharedFamily(benchmark::State &st) {
  auto [a, b] = shared_family(32);
  bool caches = st.range(0);
  for (auto _ : st) {
    SolverSession s(64, caches);
    benchmark::DoNotOptimize(compatible_pairs(a, b, s).size());
  }
}
BENCHMARK(BM_SharedFamily)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
