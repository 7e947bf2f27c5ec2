#include "duet/error.hpp"
#include "duet/pred.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

using namespace duet;
using namespace duet::testgen;

namespace {

// Registers and memory reads are plain variables whose names the env also
// resolves, so pretty output of built terms parses back in the same env.
PredEnv make_env(const VarDecls &extra = {}) {
  PredEnv env;
  env.reg = [](unsigned i) { return mk_var("reg" + std::to_string(i), 32); };
  env.mem = [](uint32_t addr, unsigned bytes) {
    return mk_var("mem" + std::to_string(addr) + "_" + std::to_string(bytes),
                  bytes * 8);
  };
  env.ident = [extra](std::string_view n) -> std::optional<Term> {
    if (n == "cmd")
      return mk_var("cmd", 32);
    if (n == "c8")
      return mk_var("c8", 8);
    std::string s(n);
    if (s.rfind("reg", 0) == 0)
      return mk_var(s, 32);
    if (s.rfind("mem", 0) == 0)
      return mk_var(s, 8 * unsigned(s.back() - '0'));
    for (const auto &v : extra)
      if (v.name == n)
        return mk_var(v.name, v.width);
    return std::nullopt;
  };
  return env;
}

} // namespace

TEST(Pred, ListingStyleBoundsCheck) {
  PredEnv env = make_env();
  Term t = parse_pred("r2 >=s 0 && r2 <s 16", env);
  Term r2 = env.reg(2);
  EXPECT_EQ(t, mk_and(mk_sle(mk_const(0, 32), r2), mk_slt(r2, mk_const(16, 32))));
  EXPECT_EQ(t.kind(), Kind::And);
  for (uint32_t v : {0u, 15u, 16u, 0xFFFFFFFFu})
    EXPECT_EQ(eval(t, {{"reg2", v}}), uint32_t(v < 16)) << v;
}

TEST(Pred, MemoryEqualsInput) {
  PredEnv env = make_env();
  Term t = parse_pred("m32[0x100] == cmd", env);
  EXPECT_EQ(t, mk_eq(mk_var("mem256_4", 32), mk_var("cmd", 32)));
}

TEST(Pred, TrailingOperatorIsParseErrorAtEnd) {
  PredEnv env = make_env();
  try {
    parse_pred("r1 + ", env);
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.pos(), 5u);
    EXPECT_NE(std::string(e.what()).find("end of input"), std::string::npos);
  }
}

TEST(Pred, Errors) {
  PredEnv env = make_env();
  EXPECT_THROW(parse_pred("nosuch == 1", env), ParseError);
  EXPECT_THROW(parse_pred("c8 == cmd", env), ParseError);
  EXPECT_THROW(parse_pred("c8 == 256", env), ParseError);
  EXPECT_THROW(parse_pred("r1", env), ParseError);
  EXPECT_THROW(parse_pred("r1 && r2", env), ParseError);
  EXPECT_THROW(parse_pred("2", env), ParseError);
  EXPECT_THROW(parse_pred("m8[r1] == 0", env), ParseError);
  EXPECT_THROW(parse_pred("zx(cmd, 8) == 0", env), ParseError);
  EXPECT_THROW(parse_pred("pre.r0 == 0", env), ParseError);
  EXPECT_THROW(parse_pred("r1 == 1)", env), ParseError);
  EXPECT_THROW(parse_pred("r1 @ 1", env), ParseError);
  EXPECT_NO_THROW(parse_pred("1", env));
  EXPECT_NO_THROW(parse_pred("zx(c8, 32) == cmd", env));
  EXPECT_NO_THROW(parse_pred("sx(c8, 32) <s 0", env));
}

TEST(Pred, LiteralsAdoptWidth) {
  PredEnv env = make_env();
  Term t = parse_pred("c8 + 1 == 2", env);
  EXPECT_EQ(t, mk_eq(mk_var("c8", 8), mk_const(1, 8)));
  Term u = parse_pred("(1 + 2) * c8 == c8 * 3", env);
  EXPECT_EQ(u, mk_bool(true));
  Term v = parse_pred("ite(c8 == 0, 5, 7) == c8", env);
  EXPECT_EQ(v.kind(), Kind::Eq);
}

TEST(Pred, PairPrefixes) {
  PredEnv pre = make_env(), post = make_env();
  post.reg = [](unsigned i) { return mk_var("post_reg" + std::to_string(i), 32); };
  PredEnv pair;
  pair.pre = &pre;
  pair.post = &post;
  PredExpr e = PredExpr::parse("extract(pre.r0, 7, 0) == extract(post.r0, 7, 0)");
  EXPECT_TRUE(e.uses_pair_prefix());
  Term t = e.build(pair);
  EXPECT_EQ(eval(t, {{"reg0", 0x1234}, {"post_reg0", 0x34}}), 1u);
  EXPECT_EQ(eval(t, {{"reg0", 0x1234}, {"post_reg0", 0x35}}), 0u);
}

TEST(Pred, NonBoolExpressions) {
  PredEnv env = make_env();
  PredExpr e = PredExpr::parse("c8 + 1");
  EXPECT_EQ(e.build(env, std::nullopt).width(), 8u);
  EXPECT_EQ(PredExpr::parse("7").build(env, 8), mk_const(7, 8));
  EXPECT_THROW(e.build(env, 32), ParseError);
}

TEST(Pred, PrettyParseCorpusIsSemanticFixpoint) {
  const char *corpus[] = {
      "r2 >=s 0 && r2 <s 16",
      "m32[0x100] == cmd",
      "c8 == 65",
      "c8 != 0 || cmd <u 3",
      "!(c8 == 59)",
      "zx(c8, 32) + cmd == r1",
      "sx(c8, 16) <s zx(c8, 16)",
      "(cmd & 0xff) == zx(c8, 32)",
      "cmd >>u 4 <=u 15",
      "cmd >>s 31 == 0xffffffff",
      "cmd << 2 >u cmd",
      "r0 - r1 >=u r2",
      "r0 * 3 == r0 + r0 + r0",
      "r0 ^ r1 ^ r0 == r1",
      "extract(cmd, 15, 8) == 0x12",
      "extract(cmd, 7, 0) == c8",
      "ite(c8 <u 10, r0, r1) == r2",
      "ite(c8 == 0, 1, 2) == zx(c8, 32)",
      "m8[3] == c8 && m8[4] != c8",
      "m32[0] + 1 == m32[4]",
      "(r0 | r1) & r2 == 0",
      "!(r0 == 0) && !(r1 == 0)",
      "r3 <s r4 || r4 <s r3 || r3 == r4",
      "cmd >=s 0x80000000",
      "cmd <=s 0x7fffffff",
      "zx(c8 == 1, 8) == c8",
      "zx(c8 <u 5, 32) + zx(c8 >u 9, 32) == 1",
      "c8 - 1 <u 9",
      "extract(zx(c8, 32), 7, 0) == 7",
      "sx(extract(cmd, 15, 0), 32) <s 0",
      "(c8 ^ 0xff) == 0",
      "c8 * c8 == 4",
      "cmd == 0 || cmd == 1 || cmd == 2",
      "!(!(c8 == 3))",
      "r0 << r1 == 16",
      "r0 >>u r1 == 1",
      "r0 >>s 1 == 0xc0000000",
      "ite(cmd == 3, c8, 0) == 0",
      "zx(extract(r5, 15, 0), 32) <u r6",
      "(r0 & 1) == 1 && (r0 & 2) == 0",
      "r7 + 0x10 == 0x20",
      "m8[0x200] <u 0x80",
      "!(c8 <=u 7) && c8 <=u 200",
      "cmd - cmd == 0",
      "(cmd | 0) == cmd",
      "c8 <s 0",
      "extract(cmd, 31, 16) != extract(cmd, 15, 0)",
      "sx(c8, 32) + 1 == 0",
      "1",
      "r1 >u 0 && r1 <=u 0xffff && zx(c8, 32) != r1",
  };
  PredEnv env = make_env();
  Rng rng(55);
  for (const char *src : corpus) {
    Term t = parse_pred(src, env);
    std::string p = pretty(t);
    Term back;
    ASSERT_NO_THROW(back = parse_pred(p, env)) << src << " -> " << p;
    VarSet vs = free_vars(t);
    collect_vars(back, vs);
    for (int i = 0; i < 200; ++i) {
      Assignment a;
      for (const auto &[n, w] : vs)
        a[n] = rng.value(w);
      ASSERT_EQ(eval(t, a), eval(back, a)) << src << " -> " << p;
    }
    EXPECT_EQ(pretty(back), p) << src;
  }
}

TEST(Pred, PrettyOfRandomBoolTermsParsesBack) {
  Rng rng(77);
  for (int i = 0; i < 3000; ++i) {
    VarDecls vars = random_vars(rng, 3);
    PredEnv env = make_env(vars);
    Term t = random_term(rng, vars, 1, 4);
    std::string p = pretty(t);
    Term back;
    ASSERT_NO_THROW(back = parse_pred(p, env)) << p;
    for (int j = 0; j < 8; ++j) {
      Assignment a = random_assignment(rng, vars);
      ASSERT_EQ(eval(t, a), eval(back, a)) << p;
    }
  }
}
