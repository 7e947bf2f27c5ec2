// Harness builders and a random program generator for executor tests.

#pragma once

#include "duet/harness.hpp"
#include "gen.hpp"

#include <json.hpp>

#include <string>

namespace duet::testgen {

inline Harness make_pair_harness(const std::string &pre, const std::string &post,
                                 nlohmann::json extra = nlohmann::json::object()) {
  extra["pre"] = {{"asm", pre}};
  extra["post"] = {{"asm", post}};
  return parse_harness(extra);
}

inline Harness make_harness(const std::string &prog,
                            nlohmann::json extra = nlohmann::json::object()) {
  return make_pair_harness(prog, prog, std::move(extra));
}

/// Inputs x (r1) and y (r2), both 8 bits; scratch registers r0, r3, r4, r5; r7 stays
/// zero and serves as the base; r6 holds a random constant and r3..r5 start out derived from the inputs for loads and stores at 0x100..0x10c.
inline const char *kRandomProgramInputs = R"([
  {"name": "x", "width": 8, "bind": {"reg": 1}},
  {"name": "y", "width": 8, "bind": {"reg": 2}}
])";

inline std::string random_program(Rng &rng, unsigned n, bool loops = true) {
  static const char *arith[] = {"add", "sub", "and", "or", "xor", "shl", "shrl",
                                "shra", "cmpeq", "cmplts", "cmpltu", "mul"};
  static const char *dsts[] = {"r0", "r3", "r4", "r5"};
  auto r = [&] { return "r" + std::to_string(rng.below(6)); };
  // Destinations mostly spare the input registers so later branches see them.
  auto d = [&] { return rng.chance(85) ? std::string(dsts[rng.below(4)]) : r(); };
  std::string s = "const r6, " + std::to_string(1 + rng.below(255)) + "\n";
  // Seed the scratch registers with input-dependent values.
  s += "add r3, r1, r2\nxor r4, r1, r6\ncmpltu r5, r2, r6\n";
  for (unsigned i = 0; i < n; ++i) {
    s += "L" + std::to_string(i) + ": ";
    unsigned k = rng.below(100);
    if (k < 25) {
      unsigned op = rng.below(rng.chance(80) ? 11 : 12);
      s += std::string(arith[op]) + " " + d() + ", " + r() + ", " + r();
    } else if (k < 35) {
      s += "addi " + d() + ", " + r() + ", " + std::to_string(int(rng.below(7)) - 3);
    } else if (k < 40) {
      s += "and " + d() + ", r" + std::to_string(1 + rng.below(2)) + ", r6";
    } else if (k < 42) {
      s += "const " + d() + ", " + std::to_string(rng.below(4));
    } else if (k < 53) {
      static const char *cmps[] = {"cmpltu ", "cmplts ", "cmpeq ", "sub "};
      s += std::string(cmps[rng.below(4)]) + "r" + std::to_string(3 + rng.below(3)) + ", r" +
           std::to_string(1 + rng.below(2)) + ", r6";
    } else if (k < 75) {
      unsigned j = loops && rng.chance(15) ? rng.below(i + 1) : i + 1 + rng.below(n - i);
      // Mostly test an input register, or a value derived from one.
      std::string c = "r" + std::to_string(rng.chance(35) ? 1 + rng.below(2) : 3 + rng.below(3));
      s += std::string(rng.coin() ? "beqz " : "bnez ") + c + ", L" + std::to_string(j);
    } else if (k < 81) {
      s += "out " + std::to_string(rng.below(2)) + ", " + r();
    } else if (k < 86) {
      s += "store [r7+" + std::to_string(0x100 + 4 * rng.below(4)) + "], " + r();
    } else if (k < 91) {
      s += "load " + d() + ", [r7+" + std::to_string(0x100 + 2 * rng.below(7)) + "]";
    } else if (k < 96) {
      s += "in " + d() + ", 0";
    } else {
      s += "halt";
    }
    s += "\n";
  }
  s += "L" + std::to_string(n) + ": halt\n";
  return s;
}

/// Replaces one instruction after the prologue, keeping its label.
inline std::string mutate_line(Rng &rng, const std::string &prog) {
  std::vector<std::string> lines;
  size_t p = 0;
  while (p < prog.size()) {
    size_t e = prog.find('\n', p);
    lines.push_back(prog.substr(p, e - p));
    p = e + 1;
  }
  size_t i = 4 + rng.below(uint32_t(lines.size() - 5));
  std::string label = lines[i].substr(0, lines[i].find(':') + 1);
  static const char *alts[] = {" addi r0, r1, 1", " out 0, r2",       " const r3, 2",
                               " xor r0, r1, r2", " cmpltu r4, r1, r2", " store [r7+256], r1"};
  lines[i] = label + alts[rng.below(6)];
  std::string out;
  for (auto &l : lines)
    out += l + "\n";
  return out;
}

} // namespace duet::testgen
