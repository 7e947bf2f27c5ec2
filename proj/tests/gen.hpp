// Hand-rolled random generators shared by the property tests.

#pragma once

#include "duet/term.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace duet::testgen {

class Rng {
public:
  explicit Rng(uint64_t seed) : g_(seed) {}

  uint32_t next() { return static_cast<uint32_t>(g_()); }
  uint32_t below(uint32_t n) { return n ? next() % n : 0; }
  bool coin() { return next() & 1; }
  bool chance(unsigned pct) { return below(100) < pct; }
  unsigned pick_width() {
    static const unsigned ws[] = {1, 8, 16, 32};
    return ws[below(4)];
  }
  /// Values biased toward edge cases.
  uint32_t value(unsigned width) {
    uint32_t m = width_mask(width);
    switch (below(6)) {
    case 0: return 0;
    case 1: return 1;
    case 2: return m;
    case 3: return (m >> 1) + 1;
    case 4: return below(16) & m;
    default: return next() & m;
    }
  }
  std::mt19937_64 &engine() { return g_; }

private:
  std::mt19937_64 g_;
};

struct VarDecl {
  std::string name;
  unsigned width;
};
using VarDecls = std::vector<VarDecl>;

inline VarDecls random_vars(Rng &rng, unsigned max_vars, unsigned max_width = 32) {
  VarDecls vs;
  unsigned n = 1 + rng.below(max_vars);
  for (unsigned i = 0; i < n; ++i) {
    unsigned w;
    do
      w = rng.pick_width();
    while (w > max_width);
    vs.push_back({"v" + std::to_string(i), w});
  }
  return vs;
}

inline Assignment random_assignment(Rng &rng, const VarDecls &vs) {
  Assignment a;
  for (const auto &v : vs)
    a[v.name] = rng.value(v.width);
  return a;
}

/// Random term of the requested width. When raw, nodes are interned
/// without simplification.
inline Term random_term(Rng &rng, const VarDecls &vs, unsigned width,
                        unsigned depth, bool raw = false) {
  auto node = [&](Kind k, std::vector<Term> kids, unsigned w = 0,
                  unsigned hi = 0, unsigned lo = 0) {
    return raw ? mk_raw(k, kids, w, hi, lo) : mk_node(k, kids, w, hi, lo);
  };
  if (depth == 0 || rng.chance(20)) {
    std::vector<const VarDecl *> same;
    for (const auto &v : vs)
      if (v.width == width)
        same.push_back(&v);
    if (!same.empty() && rng.chance(70))
      return mk_var(same[rng.below(same.size())]->name, width);
    if (rng.chance(50)) {
      const VarDecl &v = vs[rng.below(vs.size())];
      Term t = mk_var(v.name, v.width);
      if (v.width < width)
        return node(rng.coin() ? Kind::ZExt : Kind::SExt, {t}, width);
      if (v.width > width) {
        unsigned lo = rng.below(v.width - width + 1);
        return node(Kind::Extract, {t}, 0, lo + width - 1, lo);
      }
      return t;
    }
    return mk_const(rng.value(width), width);
  }
  auto sub = [&](unsigned w) { return random_term(rng, vs, w, depth - 1, raw); };
  if (width == 1 && rng.chance(50)) {
    static const Kind cmp[] = {Kind::Eq, Kind::Slt, Kind::Ult};
    unsigned w = rng.pick_width();
    return node(cmp[rng.below(3)], {sub(w), sub(w)});
  }
  switch (rng.below(6)) {
  case 0:
    return node(Kind::Not, {sub(width)});
  case 1: {
    if (width == 1)
      break;
    unsigned w;
    do
      w = rng.pick_width();
    while (w > width);
    return node(rng.coin() ? Kind::ZExt : Kind::SExt, {sub(w)}, width);
  }
  case 2: {
    unsigned w;
    do
      w = rng.pick_width();
    while (w < width);
    unsigned lo = rng.below(w - width + 1);
    return node(Kind::Extract, {sub(w)}, 0, lo + width - 1, lo);
  }
  case 3:
    return node(Kind::Ite, {sub(1), sub(width), sub(width)});
  default:
    break;
  }
  static const Kind bin[] = {Kind::Add, Kind::Sub, Kind::Mul, Kind::And,
                             Kind::Or, Kind::Xor, Kind::Shl, Kind::Lshr,
                             Kind::Ashr};
  Kind k = bin[rng.below(9)];
  Term b = sub(width);
  if ((k == Kind::Shl || k == Kind::Lshr || k == Kind::Ashr) && rng.chance(60))
    b = mk_const(rng.below(width + 2) & width_mask(width), width);
  return node(k, {sub(width), b});
}

/// Rebuilds t bottom-up through the simplifying constructors.
inline Term resimplify(Term t) {
  if (t.is_const() || t.is_var())
    return t;
  std::vector<Term> kids;
  for (size_t i = 0; i < t.num_kids(); ++i)
    kids.push_back(resimplify(t.kid(i)));
  return mk_node(t.kind(), kids, t.width(), t.hi(), t.lo());
}

} // namespace duet::testgen
