#include "duet/error.hpp"
#include "duet/term.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace duet;
using namespace duet::testgen;

namespace {

// Recursive evaluator kept separate from eval() and apply_op().
uint64_t ref_eval(Term t, const Assignment &a) {
  const unsigned w = t.width();
  const uint64_t m = (uint64_t(1) << w) - 1;
  auto k = [&](size_t i) { return ref_eval(t.kid(i), a); };
  auto sgn = [](uint64_t v, unsigned width) {
    int64_t x = int64_t(v);
    if (v >> (width - 1) & 1)
      x -= int64_t(1) << width;
    return x;
  };
  switch (t.kind()) {
  case Kind::Const:
    return t.value();
  case Kind::Var:
    return a.at(t.name()) & m;
  case Kind::Not:
    return m - k(0);
  case Kind::ZExt:
    return k(0);
  case Kind::SExt:
    return uint64_t(sgn(k(0), t.kid(0).width())) & m;
  case Kind::Extract:
    return (k(0) / (uint64_t(1) << t.lo())) % (uint64_t(1) << w);
  case Kind::Add:
    return (k(0) + k(1)) & m;
  case Kind::Sub:
    return (k(0) + (m + 1) - k(1)) & m;
  case Kind::Mul:
    return (k(0) * k(1)) & m;
  case Kind::And:
    return k(0) & k(1);
  case Kind::Or:
    return k(0) | k(1);
  case Kind::Xor:
    return k(0) ^ k(1);
  case Kind::Shl: {
    uint64_t s = k(1);
    return s >= w ? 0 : (k(0) << s) & m;
  }
  case Kind::Lshr: {
    uint64_t s = k(1);
    return s >= w ? 0 : k(0) >> s;
  }
  case Kind::Ashr: {
    uint64_t s = k(1);
    int64_t v = sgn(k(0), w);
    if (s >= w)
      return v < 0 ? m : 0;
    for (uint64_t i = 0; i < s; ++i)
      v = (v - (v < 0 && (v & 1))) / 2;
    return uint64_t(v) & m;
  }
  case Kind::Eq:
    return k(0) == k(1);
  case Kind::Slt:
    return sgn(k(0), t.kid(0).width()) < sgn(k(1), t.kid(1).width());
  case Kind::Ult:
    return k(0) < k(1);
  case Kind::Ite:
    return k(0) ? k(1) : k(2);
  }
  return 0;
}

} // namespace

TEST(Term, ConstantFolding) {
  EXPECT_EQ(mk_add(mk_const(2, 32), mk_const(3, 32)), mk_const(5, 32));
  Term x = mk_var("x", 16);
  EXPECT_EQ(mk_xor(x, x), mk_const(0, 16));
  EXPECT_EQ(mk_eq(mk_const(1, 32), mk_const(2, 32)), mk_const(0, 1));
  EXPECT_EQ(mk_add(x, mk_const(0, 16)), x);
  EXPECT_EQ(mk_and(x, mk_const(0, 16)), mk_const(0, 16));
  EXPECT_EQ(mk_eq(x, x), mk_bool(true));
}

TEST(Term, WidthErrors) {
  Term x8 = mk_var("x", 8), y32 = mk_var("y", 32);
  EXPECT_THROW(mk_add(x8, y32), WidthError);
  EXPECT_THROW(mk_const(1, 7), WidthError);
  EXPECT_THROW(mk_zext(y32, 8), WidthError);
  EXPECT_THROW(mk_extract(x8, 8, 0), WidthError);
  EXPECT_THROW(mk_extract(y32, 10, 0), WidthError);
  EXPECT_THROW(mk_ite(x8, x8, x8), WidthError);
}

TEST(Term, HashConsing) {
  Term a = mk_add(mk_var("x", 32), mk_var("y", 32));
  Term b = mk_add(mk_var("x", 32), mk_var("y", 32));
  EXPECT_EQ(a.node(), b.node());
  size_t before = term_table_size();
  for (int i = 0; i < 100; ++i)
    mk_add(mk_var("x", 32), mk_var("y", 32));
  EXPECT_EQ(term_table_size(), before);
  EXPECT_NE(mk_var("x", 8), mk_var("x", 16));
}

TEST(Term, ConcurrentInternIsIdempotent) {
  std::vector<std::thread> ts;
  std::vector<Term> out(8);
  for (int i = 0; i < 8; ++i)
    ts.emplace_back([&, i] {
      Term acc = mk_var("cc", 32);
      for (int k = 0; k < 200; ++k)
        acc = mk_mul(mk_add(acc, mk_const(k, 32)), mk_var("cd", 32));
      out[i] = acc;
    });
  for (auto &t : ts)
    t.join();
  for (int i = 1; i < 8; ++i)
    EXPECT_EQ(out[0], out[i]);
}

TEST(Term, EvalExamples) {
  Term x = mk_var("x", 32);
  EXPECT_EQ(eval(mk_add(x, mk_const(1, 32)), {{"x", 0xFFFFFFFF}}), 0u);
  EXPECT_EQ(eval(mk_ult(x, mk_const(5, 32)), {{"x", 4}}), 1u);
  EXPECT_THROW(eval(x, {}), UnboundVariable);
  EXPECT_EQ(eval_or_zero(mk_add(x, mk_const(3, 32)), {}), 3u);
}

TEST(Term, EvalAgreesWithReference) {
  Rng rng(101);
  for (int i = 0; i < 10000; ++i) {
    VarDecls vars = random_vars(rng, 3);
    Term t = random_term(rng, vars, rng.pick_width(), 4);
    Assignment a = random_assignment(rng, vars);
    ASSERT_EQ(uint64_t(eval(t, a)), ref_eval(t, a)) << pretty(t);
  }
}

TEST(Term, SimplificationPreservesSemantics) {
  Rng rng(202);
  for (int i = 0; i < 5000; ++i) {
    VarDecls vars = random_vars(rng, 3);
    Term raw = random_term(rng, vars, rng.pick_width(), 4, /*raw=*/true);
    Term simp = resimplify(raw);
    for (int j = 0; j < 8; ++j) {
      Assignment a = random_assignment(rng, vars);
      ASSERT_EQ(ref_eval(raw, a), ref_eval(simp, a))
          << "raw " << to_sexpr(raw) << "\nsimp " << to_sexpr(simp);
    }
  }
}

TEST(Term, SimplifierHandlesByteRecomposition) {
  Term w = mk_var("w", 32);
  // OR of four shifted bytes of w, as produced by a byte-wise load.
  Term acc = mk_const(0, 32);
  for (unsigned i = 0; i < 4; ++i) {
    Term b = mk_zext(mk_extract(w, 8 * i + 7, 8 * i), 32);
    acc = mk_or(acc, mk_shl(b, mk_const(8 * i, 32)));
  }
  for (unsigned i = 0; i < 4; ++i)
    EXPECT_EQ(mk_extract(acc, 8 * i + 7, 8 * i), mk_extract(w, 8 * i + 7, 8 * i));
  Term c = mk_var("c", 8);
  EXPECT_EQ(mk_extract(mk_zext(c, 32), 7, 0), c);
  EXPECT_EQ(mk_eq(mk_zext(c, 32), mk_const(65, 32)), mk_eq(c, mk_const(65, 8)));
  EXPECT_EQ(mk_eq(mk_zext(c, 32), mk_const(300, 32)), mk_bool(false));
  EXPECT_EQ(mk_and(mk_zext(c, 32), mk_const(0xFF, 32)), mk_zext(c, 32));
}

TEST(Term, Substitute) {
  Term x = mk_var("x", 32), y = mk_var("y", 32);
  Term t = mk_and(mk_eq(x, mk_const(1, 32)), mk_eq(y, mk_const(2, 32)));
  EXPECT_EQ(substitute(t, {{"x", 1}}), mk_eq(y, mk_const(2, 32)));
  EXPECT_EQ(substitute(mk_eq(x, mk_const(1, 32)), {{"x", 0}}), mk_bool(false));
}

TEST(Term, SubstituteComposesWithEval) {
  Rng rng(303);
  for (int i = 0; i < 3000; ++i) {
    VarDecls vars = random_vars(rng, 3);
    Term t = random_term(rng, vars, rng.pick_width(), 4);
    Assignment full = random_assignment(rng, vars);
    Assignment part, rest;
    for (const auto &[n, v] : full)
      (rng.coin() ? part : rest)[n] = v;
    ASSERT_EQ(eval(substitute(t, part), rest), eval(t, full)) << pretty(t);
  }
}

TEST(Term, FreeVars) {
  Term t = mk_add(mk_zext(mk_var("a", 8), 32), mk_var("b", 32));
  VarSet vs = free_vars(t);
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_EQ(vs.at("a"), 8u);
  EXPECT_EQ(vs.at("b"), 32u);
}

TEST(Term, SexprRoundTrip) {
  Rng rng(404);
  for (int i = 0; i < 3000; ++i) {
    VarDecls vars = random_vars(rng, 3);
    bool raw = rng.coin();
    Term t = random_term(rng, vars, rng.pick_width(), 5, raw);
    std::string s = to_sexpr(t);
    ASSERT_EQ(parse_sexpr(s), t) << s;
  }
}

TEST(Term, SexprSharesRepeatedSubterms) {
  Term x = mk_var("x", 32);
  Term s = mk_mul(x, mk_const(3, 32));
  Term t = s;
  for (int i = 0; i < 30; ++i)
    t = mk_add(mk_mul(t, t), s);
  std::string text = to_sexpr(t);
  EXPECT_LT(text.size(), 4000u);
  EXPECT_EQ(parse_sexpr(text), t);
  EXPECT_THROW(parse_sexpr("(add (const 32 1)"), ParseError);
  EXPECT_THROW(parse_sexpr("$4"), ParseError);
}

TEST(Term, PrettyShortTruncates) {
  Term t = mk_var("x", 32);
  for (int i = 0; i < 40; ++i)
    t = mk_mul(t, mk_var("y" + std::to_string(i), 32));
  std::string s = pretty_short(t, 50);
  EXPECT_EQ(s.size(), 53u);
  EXPECT_EQ(s.substr(50), "...");
}
