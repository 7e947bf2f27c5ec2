//===-- harness.cpp - Configuration loading and replay -------------------===//

#include "duet/harness.hpp"

#include "duet/cfg.hpp"
#include "duet/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace duet {

using nlohmann::json;

const char *to_string(Side s) { return s == Side::Pre ? "pre" : "post"; }

const char *to_string(DirectiveKind k) {
  switch (k) {
  case DirectiveKind::BreakpointLog:
    return "breakpoint-log";
  case DirectiveKind::Assume:
    return "assume";
  case DirectiveKind::Assert:
    return "assert";
  case DirectiveKind::Postcondition:
    return "postcondition";
  case DirectiveKind::VirtualPrint:
    return "virtual-print";
  case DirectiveKind::Error:
    return "error";
  }
  return "?";
}

std::optional<DirectiveKind> directive_kind_from_string(std::string_view s) {
  for (DirectiveKind k :
       {DirectiveKind::BreakpointLog, DirectiveKind::Assume, DirectiveKind::Assert,
        DirectiveKind::Postcondition, DirectiveKind::VirtualPrint, DirectiveKind::Error})
    if (s == to_string(k))
      return k;
  if (s == "breakpoint")
    return DirectiveKind::BreakpointLog;
  if (s == "print")
    return DirectiveKind::VirtualPrint;
  return std::nullopt;
}

bool Observables::observes_addr(uint32_t a) const {
  if (memory.empty())
    return true;
  for (const auto &r : memory)
    if (a >= r.addr && uint64_t(a) < uint64_t(r.addr) + r.len)
      return true;
  return false;
}

bool Observables::observes_channel(uint32_t ch) const {
  return channels.empty() ||
         std::find(channels.begin(), channels.end(), ch) != channels.end();
}

const InputDecl *Harness::find_input(std::string_view name) const {
  for (const auto &in : inputs)
    if (in.name == name)
      return &in;
  return nullptr;
}

namespace {

bool parse_index_suffix(std::string_view s, std::string_view prefix, std::string_view &mid,
                        uint32_t &index) {
  if (s.substr(0, prefix.size()) != prefix)
    return false;
  s.remove_prefix(prefix.size());
  size_t us = s.rfind('_');
  if (us == std::string_view::npos || us + 1 >= s.size())
    return false;
  mid = s.substr(0, us);
  index = 0;
  for (char c : s.substr(us + 1)) {
    if (c < '0' || c > '9')
      return false;
    index = index * 10 + uint32_t(c - '0');
  }
  return true;
}

} // namespace

std::optional<unsigned> Harness::var_width(std::string_view name) const {
  if (const InputDecl *in = find_input(name))
    return in->width;
  std::string_view mid;
  uint32_t k;
  if (parse_index_suffix(name, "in", mid, k) && !mid.empty() &&
      mid.find_first_not_of("0123456789") == std::string_view::npos)
    return 8;
  if (parse_index_suffix(name, "hook_", mid, k))
    for (const auto &side : hooks)
      for (const auto &hk : side)
        if (hk.name == mid)
          return hk.ret_width;
  return std::nullopt;
}

// --- parsing ---------------------------------------------------------------

namespace {

struct Ctx {
  std::string path;
  Ctx at(const std::string &key) const { return {path + "/" + key}; }
  Ctx at(size_t i) const { return {path + "/" + std::to_string(i)}; }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ConfigError(path.empty() ? "/" : path, msg);
  }
};

uint64_t get_uint(const json &j, const Ctx &c, uint64_t max = 0xFFFFFFFFull) {
  uint64_t v = 0;
  if (j.is_number_unsigned()) {
    v = j.get<uint64_t>();
  } else if (j.is_number_integer()) {
    int64_t s = j.get<int64_t>();
    if (s < 0)
      c.fail("expected a non-negative integer");
    v = uint64_t(s);
  } else if (j.is_string()) {
    std::string s = j.get<std::string>();
    try {
      size_t used = 0;
      v = std::stoull(s, &used, 0);
      if (used != s.size())
        c.fail("malformed integer '" + s + "'");
    } catch (const std::logic_error &) {
      c.fail("malformed integer '" + s + "'");
    }
  } else {
    c.fail("expected an integer");
  }
  if (v > max)
    c.fail("value " + std::to_string(v) + " exceeds " + std::to_string(max));
  return v;
}

std::string get_string(const json &j, const Ctx &c) {
  if (!j.is_string())
    c.fail("expected a string");
  return j.get<std::string>();
}

bool get_bool(const json &j, const Ctx &c) {
  if (!j.is_boolean())
    c.fail("expected true or false");
  return j.get<bool>();
}

const json &require(const json &obj, const std::string &key, const Ctx &c) {
  if (!obj.contains(key))
    c.fail("missing required key '" + key + "'");
  return obj.at(key);
}

void check_keys(const json &obj, const Ctx &c, std::initializer_list<const char *> allowed) {
  if (!obj.is_object())
    c.fail("expected an object");
  for (const auto &[k, v] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed)
      ok |= k == a;
    if (!ok)
      c.at(k).fail("unknown key");
  }
}

unsigned get_width(const json &j, const Ctx &c) {
  uint64_t w = get_uint(j, c, 32);
  if (w != 1 && w != 8 && w != 16 && w != 32)
    c.fail("width must be 1, 8, 16 or 32");
  return unsigned(w);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'))
      return false;
  return true;
}

PredExpr parse_expr(const json &j, const Ctx &c) {
  std::string text = get_string(j, c);
  try {
    return PredExpr::parse(text);
  } catch (const ParseError &e) {
    c.fail(e.what());
  }
}

// Environment with placeholder registers and memory, used only to check
// that names resolve and widths line up.
PredEnv validation_env(const Harness &h) {
  PredEnv env;
  env.reg = [](unsigned i) { return mk_var("__r" + std::to_string(i), 32); };
  env.mem = [](uint32_t a, unsigned bytes) {
    return mk_var("__m" + std::to_string(a) + "_" + std::to_string(bytes), 8 * bytes);
  };
  env.ident = [&h](std::string_view n) -> std::optional<Term> {
    if (auto w = h.var_width(n))
      return mk_var(n, *w);
    return std::nullopt;
  };
  return env;
}

void validate_expr(const PredExpr &e, const PredEnv &env, std::optional<unsigned> width,
                   const Ctx &c) {
  try {
    e.build(env, width);
  } catch (const Error &err) {
    c.fail(err.what());
  }
}

ProgramSpec parse_program(const json &j, const Ctx &c, const std::string &base_dir) {
  check_keys(j, c, {"source", "asm", "entry"});
  ProgramSpec ps;
  try {
    if (j.contains("asm")) {
      ps.path = "<inline>";
      ps.program = assemble(get_string(j.at("asm"), c.at("asm")));
    } else {
      ps.path = get_string(require(j, "source", c), c.at("source"));
      std::filesystem::path p(ps.path);
      if (p.is_relative())
        p = std::filesystem::path(base_dir) / p;
      if (!std::filesystem::exists(p))
        c.at("source").fail("no such file '" + p.string() + "'");
      ps.program = load_program_file(p.string());
    }
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    c.fail(e.what());
  }
  ps.entry_pc = ps.program.entry;
  if (j.contains("entry")) {
    const json &e = j.at("entry");
    if (e.is_string()) {
      ps.entry = e.get<std::string>();
      auto pc = ps.program.resolve(ps.entry);
      if (!pc)
        c.at("entry").fail("unknown location '" + ps.entry + "'");
      ps.entry_pc = *pc;
    } else {
      ps.entry_pc = uint32_t(get_uint(e, c.at("entry")));
      ps.entry = std::to_string(ps.entry_pc);
    }
  }
  if (ps.entry_pc >= ps.program.code.size())
    c.at("entry").fail("entry outside the code");
  return ps;
}

Heuristics parse_heuristics(const json &j, const Ctx &c) {
  check_keys(j, c, {"termination", "candidate"});
  Heuristics h;
  if (j.contains("termination")) {
    std::string t = get_string(j.at("termination"), c.at("termination"));
    if (t == "complete") {
      h.termination = Termination::Complete;
    } else if (t == "cyclomatic") {
      h.termination = Termination::Cyclomatic;
    } else if (t.rfind("coverage:", 0) == 0) {
      h.termination = Termination::Coverage;
      try {
        h.coverage = std::stod(t.substr(9));
      } catch (const std::logic_error &) {
        c.at("termination").fail("malformed coverage threshold");
      }
      if (!(h.coverage >= 0.0 && h.coverage <= 1.0))
        c.at("termination").fail("coverage threshold must be in [0, 1]");
    } else {
      c.at("termination").fail("expected complete, coverage:<t> or cyclomatic");
    }
  }
  if (j.contains("candidate")) {
    std::string t = get_string(j.at("candidate"), c.at("candidate"));
    if (t == "trivial") {
      h.ngram = 0;
    } else if (t.rfind("ngram:", 0) == 0) {
      try {
        int n = std::stoi(t.substr(6));
        if (n < 1 || n > 64)
          throw std::out_of_range("n");
        h.ngram = unsigned(n);
      } catch (const std::logic_error &) {
        c.at("candidate").fail("n-gram length must be in 1..64");
      }
    } else {
      c.at("candidate").fail("expected trivial or ngram:<n>");
    }
  }
  return h;
}

Observables parse_observables(const json &j, const Ctx &c) {
  check_keys(j, c, {"registers", "memory", "channels"});
  Observables o;
  if (j.contains("registers")) {
    const json &rs = j.at("registers");
    Ctx rc = c.at("registers");
    if (!rs.is_array())
      rc.fail("expected an array");
    for (size_t i = 0; i < rs.size(); ++i) {
      RegSlice s;
      if (rs[i].is_object()) {
        check_keys(rs[i], rc.at(i), {"reg", "hi", "lo"});
        s.reg = unsigned(get_uint(require(rs[i], "reg", rc.at(i)), rc.at(i).at("reg"), 7));
        if (rs[i].contains("hi"))
          s.hi = unsigned(get_uint(rs[i].at("hi"), rc.at(i).at("hi"), 31));
        if (rs[i].contains("lo"))
          s.lo = unsigned(get_uint(rs[i].at("lo"), rc.at(i).at("lo"), 31));
        unsigned w = s.hi - s.lo + 1;
        if (s.lo > s.hi || (w != 1 && w != 8 && w != 16 && w != 32))
          rc.at(i).fail("slice width must be 1, 8, 16 or 32");
      } else {
        s.reg = unsigned(get_uint(rs[i], rc.at(i), 7));
      }
      o.registers.push_back(s);
    }
  } else {
    for (unsigned r = 0; r < kNumRegs; ++r)
      o.registers.push_back({r, 31, 0});
  }
  if (j.contains("memory")) {
    const json &ms = j.at("memory");
    Ctx mc = c.at("memory");
    if (!ms.is_array())
      mc.fail("expected an array");
    for (size_t i = 0; i < ms.size(); ++i) {
      check_keys(ms[i], mc.at(i), {"addr", "len"});
      MemRegion r;
      r.addr = uint32_t(get_uint(require(ms[i], "addr", mc.at(i)), mc.at(i).at("addr")));
      r.len = uint32_t(get_uint(require(ms[i], "len", mc.at(i)), mc.at(i).at("len")));
      o.memory.push_back(r);
    }
  }
  if (j.contains("channels")) {
    const json &cs = j.at("channels");
    if (!cs.is_array())
      c.at("channels").fail("expected an array");
    for (size_t i = 0; i < cs.size(); ++i)
      o.channels.push_back(uint32_t(get_uint(cs[i], c.at("channels").at(i))));
  }
  return o;
}

} // namespace

Harness parse_harness(const json &j, const std::string &base_dir) {
  Ctx root{""};
  check_keys(j, root,
             {"pre", "post", "inputs", "init_memory", "memory", "preconditions",
              "directives", "hooks", "loop_bound", "call_depth_max", "max_in_bytes", "mode",
              "heuristics", "observables", "solver", "max_states", "property"});
  Harness h;
  h.base_dir = base_dir;
  h.programs[0] = parse_program(require(j, "pre", root), root.at("pre"), base_dir);
  h.programs[1] = parse_program(require(j, "post", root), root.at("post"), base_dir);

  if (j.contains("loop_bound"))
    h.loop_bound = unsigned(get_uint(j.at("loop_bound"), root.at("loop_bound"), 1u << 20));
  if (h.loop_bound == 0)
    root.at("loop_bound").fail("must be positive");
  if (j.contains("call_depth_max"))
    h.call_depth_max = unsigned(get_uint(j.at("call_depth_max"), root.at("call_depth_max"), 1u << 16));
  if (j.contains("max_in_bytes"))
    h.max_in_bytes = unsigned(get_uint(j.at("max_in_bytes"), root.at("max_in_bytes"), 4096));
  if (j.contains("max_states"))
    h.max_states = size_t(get_uint(j.at("max_states"), root.at("max_states")));
  h.machine.call_depth_max = h.call_depth_max;
  if (j.contains("memory")) {
    Ctx mc = root.at("memory");
    check_keys(j.at("memory"), mc, {"lo", "hi"});
    if (j.at("memory").contains("lo"))
      h.machine.mem_lo = uint32_t(get_uint(j.at("memory").at("lo"), mc.at("lo")));
    if (j.at("memory").contains("hi"))
      h.machine.mem_hi = uint32_t(get_uint(j.at("memory").at("hi"), mc.at("hi")));
    if (h.machine.mem_lo >= h.machine.mem_hi)
      mc.fail("lo must be below hi");
  }
  if (j.contains("mode")) {
    std::string m = get_string(j.at("mode"), root.at("mode"));
    if (m != "complete" && m != "concolic")
      root.at("mode").fail("expected complete or concolic");
    h.concolic = m == "concolic";
  }
  if (j.contains("heuristics"))
    h.heuristics = parse_heuristics(j.at("heuristics"), root.at("heuristics"));
  if (j.contains("solver")) {
    Ctx sc = root.at("solver");
    check_keys(j.at("solver"), sc, {"max_bits", "caches"});
    if (j.at("solver").contains("max_bits"))
      h.max_bits = unsigned(get_uint(j.at("solver").at("max_bits"), sc.at("max_bits"), 256));
    if (j.at("solver").contains("caches"))
      h.caches = get_bool(j.at("solver").at("caches"), sc.at("caches"));
  }

  // Inputs and their bindings.
  std::set<unsigned> bound_regs;
  std::map<uint32_t, std::string> bound_bytes;
  if (j.contains("inputs")) {
    const json &ins = j.at("inputs");
    Ctx ic = root.at("inputs");
    if (!ins.is_array())
      ic.fail("expected an array");
    for (size_t i = 0; i < ins.size(); ++i) {
      Ctx c = ic.at(i);
      check_keys(ins[i], c, {"name", "width", "bind"});
      InputDecl d;
      d.name = get_string(require(ins[i], "name", c), c.at("name"));
      if (!is_identifier(d.name) || is_reserved_name(d.name))
        c.at("name").fail("'" + d.name + "' is not a usable variable name");
      if (d.name.rfind("hook_", 0) == 0 || d.name.rfind("__", 0) == 0 ||
          (d.name.size() > 2 && d.name.rfind("in", 0) == 0 && std::isdigit(static_cast<unsigned char>(d.name[2]))))
        c.at("name").fail("'" + d.name + "' collides with generated variable names");
      if (h.find_input(d.name))
        c.at("name").fail("duplicate input '" + d.name + "'");
      d.width = get_width(require(ins[i], "width", c), c.at("width"));
      if (ins[i].contains("bind")) {
        const json &b = ins[i].at("bind");
        Ctx bc = c.at("bind");
        check_keys(b, bc, {"reg", "mem"});
        if (b.contains("reg") == b.contains("mem"))
          bc.fail("expected exactly one of reg or mem");
        if (b.contains("reg")) {
          d.reg = unsigned(get_uint(b.at("reg"), bc.at("reg"), 7));
          if (!bound_regs.insert(*d.reg).second)
            bc.at("reg").fail("register r" + std::to_string(*d.reg) + " is bound twice");
        } else {
          d.mem_addr = uint32_t(get_uint(b.at("mem"), bc.at("mem")));
          unsigned n = d.width <= 8 ? 1 : d.width / 8;
          for (unsigned k = 0; k < n; ++k) {
            auto [it, fresh] = bound_bytes.emplace(*d.mem_addr + k, d.name);
            if (!fresh)
              bc.at("mem").fail("byte " + std::to_string(*d.mem_addr + k) +
                                " is already bound to '" + it->second + "'");
          }
        }
      }
      h.inputs.push_back(d);
    }
  }

  if (j.contains("init_memory")) {
    const json &ms = j.at("init_memory");
    Ctx mc = root.at("init_memory");
    if (!ms.is_array())
      mc.fail("expected an array");
    for (size_t i = 0; i < ms.size(); ++i) {
      Ctx c = mc.at(i);
      check_keys(ms[i], c, {"addr", "bytes", "text"});
      MemInit m;
      m.addr = uint32_t(get_uint(require(ms[i], "addr", c), c.at("addr")));
      if (ms[i].contains("bytes")) {
        const json &bs = ms[i].at("bytes");
        if (!bs.is_array())
          c.at("bytes").fail("expected an array");
        for (size_t k = 0; k < bs.size(); ++k)
          m.bytes.push_back(uint8_t(get_uint(bs[k], c.at("bytes").at(k), 255)));
      }
      if (ms[i].contains("text"))
        for (char ch : get_string(ms[i].at("text"), c.at("text")))
          m.bytes.push_back(static_cast<uint8_t>(ch));
      for (size_t k = 0; k < m.bytes.size(); ++k)
        if (auto it = bound_bytes.find(m.addr + uint32_t(k)); it != bound_bytes.end())
          c.fail("byte " + std::to_string(it->first) + " is bound to input '" + it->second + "'");
      h.init_memory.push_back(std::move(m));
    }
  }

  // Hooks come before directives so that hook variables resolve.
  if (j.contains("hooks")) {
    Ctx hc = root.at("hooks");
    check_keys(j.at("hooks"), hc, {"pre", "post"});
    std::map<std::string, unsigned> widths;
    for (int s = 0; s < 2; ++s) {
      const char *key = s == 0 ? "pre" : "post";
      if (!j.at("hooks").contains(key))
        continue;
      const json &hs = j.at("hooks").at(key);
      Ctx sc = hc.at(key);
      if (!hs.is_array())
        sc.fail("expected an array");
      std::set<uint32_t> targets;
      for (size_t i = 0; i < hs.size(); ++i) {
        Ctx c = sc.at(i);
        check_keys(hs[i], c, {"name", "target", "width", "ret", "effect"});
        Hook hk;
        hk.name = get_string(require(hs[i], "name", c), c.at("name"));
        if (!is_identifier(hk.name))
          c.at("name").fail("hook names must be identifiers");
        hk.target = get_string(require(hs[i], "target", c), c.at("target"));
        auto pc = h.programs[s].program.resolve(hk.target);
        if (!pc)
          c.at("target").fail("unknown location '" + hk.target + "'");
        hk.pc = *pc;
        if (!targets.insert(hk.pc).second)
          c.at("target").fail("two hooks on the same target");
        if (hs[i].contains("width"))
          hk.ret_width = get_width(hs[i].at("width"), c.at("width"));
        if (auto [it, fresh] = widths.emplace(hk.name, hk.ret_width);
            !fresh && it->second != hk.ret_width)
          c.at("width").fail("hook '" + hk.name + "' has a different width on the other side");
        if (hs[i].contains("ret"))
          hk.ret = parse_expr(hs[i].at("ret"), c.at("ret"));
        if (hs[i].contains("effect")) {
          const json &e = hs[i].at("effect");
          Ctx ec = c.at("effect");
          check_keys(e, ec, {"channel", "expr"});
          hk.effect_channel = uint32_t(get_uint(require(e, "channel", ec), ec.at("channel")));
          hk.effect = parse_expr(require(e, "expr", ec), ec.at("expr"));
        }
        h.hooks[s].push_back(std::move(hk));
      }
    }
  }

  PredEnv venv = validation_env(h);
  for (int s = 0; s < 2; ++s)
    for (size_t i = 0; i < h.hooks[s].size(); ++i) {
      Ctx c = root.at("hooks").at(s == 0 ? "pre" : "post").at(i);
      const Hook &hk = h.hooks[s][i];
      if (hk.ret)
        validate_expr(*hk.ret, venv, std::nullopt, c.at("ret"));
      if (hk.effect)
        validate_expr(*hk.effect, venv, std::nullopt, c.at("effect").at("expr"));
    }

  if (j.contains("preconditions")) {
    const json &ps = j.at("preconditions");
    Ctx pc = root.at("preconditions");
    if (!ps.is_array())
      pc.fail("expected an array");
    for (size_t i = 0; i < ps.size(); ++i) {
      PredExpr e = parse_expr(ps[i], pc.at(i));
      validate_expr(e, venv, 1, pc.at(i));
      h.preconditions.push_back(std::move(e));
    }
  }

  if (j.contains("directives")) {
    Ctx dc = root.at("directives");
    check_keys(j.at("directives"), dc, {"pre", "post"});
    for (int s = 0; s < 2; ++s) {
      const char *key = s == 0 ? "pre" : "post";
      if (!j.at("directives").contains(key))
        continue;
      const json &ds = j.at("directives").at(key);
      Ctx sc = dc.at(key);
      if (!ds.is_array())
        sc.fail("expected an array");
      for (size_t i = 0; i < ds.size(); ++i) {
        Ctx c = sc.at(i);
        check_keys(ds[i], c, {"kind", "location", "expr", "message"});
        Directive d;
        std::string kind = get_string(require(ds[i], "kind", c), c.at("kind"));
        auto k = directive_kind_from_string(kind);
        if (!k)
          c.at("kind").fail("unknown directive kind '" + kind + "'");
        d.kind = *k;
        d.location = get_string(require(ds[i], "location", c), c.at("location"));
        auto pc = h.programs[s].program.resolve(d.location);
        if (!pc)
          c.at("location").fail("unknown location '" + d.location + "'");
        d.pc = *pc;
        if (ds[i].contains("message"))
          d.message = get_string(ds[i].at("message"), c.at("message"));
        bool needs_expr = d.kind == DirectiveKind::Assume || d.kind == DirectiveKind::Assert ||
                          d.kind == DirectiveKind::Postcondition ||
                          d.kind == DirectiveKind::VirtualPrint;
        if (ds[i].contains("expr")) {
          d.expr = parse_expr(ds[i].at("expr"), c.at("expr"));
          validate_expr(*d.expr, venv,
                        d.kind == DirectiveKind::VirtualPrint ? std::nullopt
                                                              : std::optional<unsigned>(1),
                        c.at("expr"));
        } else if (needs_expr) {
          c.fail(std::string("a ") + to_string(d.kind) + " directive needs an expr");
        }
        h.directives[s].push_back(std::move(d));
      }
    }
  }

  if (j.contains("observables"))
    h.observables = parse_observables(j.at("observables"), root.at("observables"));
  else
    h.observables = parse_observables(json::object(), root.at("observables"));

  if (j.contains("property")) {
    const json &p = j.at("property");
    Ctx c = root.at("property");
    check_keys(p, c, {"agree", "expr"});
    if (p.contains("agree"))
      h.property.agree = get_bool(p.at("agree"), c.at("agree"));
    if (p.contains("expr")) {
      h.property.expr = parse_expr(p.at("expr"), c.at("expr"));
      PredEnv pre = venv, post = venv;
      post.reg = [](unsigned i) { return mk_var("__q" + std::to_string(i), 32); };
      PredEnv pair;
      pair.pre = &pre;
      pair.post = &post;
      pair.ident = venv.ident;
      validate_expr(*h.property.expr, pair, 1, c.at("expr"));
    }
  }
  return h;
}

Harness parse_harness_text(std::string_view text, const std::string &base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error &e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_harness(j, base_dir);
}

Harness load_harness(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("/", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_harness_text(ss.str(), dir.empty() ? "." : dir);
}

std::string config_digest(std::string_view text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string harness_template() {
  return R"TPL(// Comparison harness. Comments are allowed; numbers may be written as
// integers or as "0x.." strings.
{
  // Programs: "source" is a .czb container or .s/.asm assembly file,
  // relative to this file. "entry" is a label or instruction index.
  "pre":  { "source": "pre.s",  "entry": "main" },
  "post": { "source": "post.s", "entry": "main" },

  // Shared symbolic inputs. Widths are 1, 8, 16 or 32. A binding puts the
  // variable in a register (zero-extended) or in little-endian memory.
  "inputs": [
    { "name": "cmd", "width": 8, "bind": { "reg": 1 } },
    { "name": "key", "width": 16, "bind": { "mem": "0x100" } }
  ],

  // Concrete bytes loaded after the data segment.
  "init_memory": [ { "addr": "0x200", "bytes": [1, 2, 3] } ],

  // Valid data addresses for LOAD/STORE.
  "memory": { "lo": 0, "hi": "0x10000" },

  // Conditions on the inputs, in the predicate language.
  "preconditions": [ "cmd <u 4" ],

  // kind: assume | assert | postcondition | error | virtual-print | breakpoint-log
  "directives": {
    "pre":  [ { "kind": "assert", "location": "main+2", "expr": "r2 <u 16",
                "message": "index out of bounds" } ],
    "post": []
  },

  // A hook replaces every CALL to its target. r0 receives a fresh shared
  // variable hook_<name>_<k> of the given width, or the "ret" expression.
  "hooks": {
    "pre":  [ { "name": "getc", "target": "getc", "width": 8,
                "effect": { "channel": 3, "expr": "extract(r1, 7, 0)" } } ],
    "post": [ { "name": "getc", "target": "getc", "width": 8 } ]
  },

  "loop_bound": 32,
  "call_depth_max": 64,
  "max_in_bytes": 4,
  "max_states": 10000,

  // mode: complete | concolic
  "mode": "complete",
  // termination: complete | coverage:<t> | cyclomatic
  // candidate:   trivial | ngram:<n>
  "heuristics": { "termination": "complete", "candidate": "ngram:2" },

  // What counts as observable when diffing terminal states.
  "observables": {
    "registers": [ { "reg": 0 }, { "reg": 1, "hi": 7, "lo": 0 } ],
    "memory": [ { "addr": "0x100", "len": 16 } ],
    "channels": [0, 1, 2, 3]
  },

  "solver": { "max_bits": 24, "caches": true },

  // Optional relative-correctness property checked on every compatible
  // pair: { "agree": true } or { "expr": "pre.r0 == post.r0" }.
  "property": { "agree": true }
}
)TPL";
}

// --- replay ----------------------------------------------------------------

namespace {

uint32_t model_value(const Assignment &m, const std::string &name, unsigned width) {
  auto it = m.find(name);
  return it == m.end() ? 0 : it->second & width_mask(width);
}

PredEnv concrete_env(const Harness &h, const MachineState &st, const Assignment &model) {
  PredEnv env;
  env.reg = [&st](unsigned i) { return mk_const(st.regs[i], 32); };
  env.mem = [&st](uint32_t a, unsigned bytes) {
    uint32_t v = 0;
    for (unsigned k = 0; k < bytes; ++k)
      v |= uint32_t(st.byte(a + k)) << (8 * k);
    return mk_const(v, 8 * bytes);
  };
  env.ident = [&h, &model](std::string_view n) -> std::optional<Term> {
    if (auto w = h.var_width(n))
      return mk_const(model_value(model, std::string(n), *w), *w);
    return std::nullopt;
  };
  return env;
}

} // namespace

ReplayInputs replay_inputs(const Harness &h, Side side, const Assignment &model) {
  ReplayInputs r;
  for (const auto &m : h.init_memory)
    for (size_t k = 0; k < m.bytes.size(); ++k)
      r.mem[m.addr + uint32_t(k)] = m.bytes[k];
  for (const auto &in : h.inputs) {
    uint32_t v = model_value(model, in.name, in.width);
    if (in.reg)
      r.regs[*in.reg] = v;
    if (in.mem_addr) {
      unsigned n = in.width <= 8 ? 1 : in.width / 8;
      for (unsigned k = 0; k < n; ++k)
        r.mem[*in.mem_addr + k] = uint8_t(v >> (8 * k));
    }
  }
  // IN bytes beyond the model read as zero, up to the configured limit.
  std::set<uint32_t> channels;
  for (const auto &ins : h.program(side).code)
    if (ins.op == Opcode::In)
      channels.insert(uint32_t(ins.imm));
  for (uint32_t ch : channels) {
    auto &bytes = r.channels[ch];
    for (unsigned k = 0; k < h.max_in_bytes; ++k)
      bytes.push_back(uint8_t(model_value(model, "in" + std::to_string(ch) + "_" + std::to_string(k), 8)));
  }

  r.options.machine = h.machine;
  r.options.entry = h.spec(side).entry_pc;
  r.options.record_trace = true;
  for (const Hook &hk : h.hooks_of(side)) {
    auto counter = std::make_shared<uint32_t>(0);
    const Harness *hp = &h;
    r.options.hooks[hk.pc] = [hp, hk, counter, model](MachineState &st) {
      PredEnv env = concrete_env(*hp, st, model);
      if (hk.effect) {
        Term e = hk.effect->build(env, std::nullopt);
        st.channels_out[*hk.effect_channel].push_back(uint8_t(e.value()));
      }
      uint32_t k = (*counter)++;
      if (hk.ret)
        st.regs[0] = hk.ret->build(env, std::nullopt).value();
      else
        st.regs[0] = model_value(model, hk.var_name(k), hk.ret_width);
    };
  }
  return r;
}

ConcreteRun replay(const Harness &h, Side side, const Assignment &model, uint64_t step_limit) {
  ReplayInputs in = replay_inputs(h, side, model);
  in.options.step_limit = step_limit;
  return run_concrete(h.program(side), in.channels, in.regs, in.mem, in.options);
}

std::set<uint32_t> leaders_of(const Harness &h, Side side) {
  std::set<uint32_t> l = block_leaders(h.program(side));
  l.insert(h.spec(side).entry_pc);
  return l;
}

std::vector<uint32_t> block_history_of(const std::set<uint32_t> &leaders,
                                       const std::vector<uint32_t> &trace) {
  std::vector<uint32_t> out;
  for (size_t i = 0; i < trace.size(); ++i) {
    // A leader starts a new block on arrival; the first pc always does.
    if (i == 0 || leaders.count(trace[i]))
      out.push_back(trace[i]);
  }
  return out;
}

std::vector<uint32_t> block_history_of(const std::set<uint32_t> &leaders, const ConcreteRun &run) {
  std::vector<uint32_t> out = block_history_of(leaders, run.trace);
  if (run.reason == StopReason::InputExhausted && (run.trace.empty() || leaders.count(run.state.pc)))
    out.push_back(run.state.pc);
  return out;
}

} // namespace duet
