//===-- oracle.cpp - Brute-force cross-check of a comparison --------------===//

#include "duet/oracle.hpp"

#include <fmt/format.h>

#include <set>

namespace duet {

namespace {

struct Checker {
  const Harness &h;
  const ComparisonResult &cr;
  unsigned max_bits;
  VarSet vars;
  OracleCheck out;

  Checker(const Harness &h, const ComparisonResult &cr, unsigned max_bits)
      : h(h), cr(cr), max_bits(max_bits) {
    for (const auto &in : h.inputs)
      vars[in.name] = in.width;
  }

  bool sat(std::vector<Term> cs) { return brute_force_sat(Query(std::move(cs), vars), max_bits).sat; }

  bool holds(const std::vector<Term> &cs, const Assignment &m) const {
    for (Term c : cs)
      if (eval_or_zero(c, m) != 1)
        return false;
    return true;
  }

  void problem(std::string s) { out.problems.push_back(std::move(s)); }

  // A reported difference must have a witness inside the joint scenario
  // that separates the values; a reported agreement must be unrefutable.
  void check_value(const std::string &what, Term a, Term b, bool differs, const Assignment &w,
                   const std::vector<Term> &joint) {
    ++out.diffs_checked;
    if (differs) {
      if (!holds(joint, w) || eval_or_zero(a, w) == eval_or_zero(b, w))
        problem(what + ": witness does not separate the values");
      return;
    }
    std::vector<Term> q = joint;
    q.push_back(mk_ne(a, b));
    if (sat(std::move(q)))
      problem(what + ": difference missed");
  }

  void pairs() {
    std::set<std::pair<size_t, size_t>> reported;
    for (const CompatiblePair &p : cr.pairs)
      reported.insert({p.pre_index, p.post_index});
    const auto &a = cr.run(Side::Pre).terminals, &b = cr.run(Side::Post).terminals;
    std::vector<bool> seen_a(a.size()), seen_b(b.size());
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = 0; j < b.size(); ++j) {
        std::vector<Term> q = a[i].constraints;
        q.insert(q.end(), b[j].constraints.begin(), b[j].constraints.end());
        bool compatible = sat(std::move(q));
        ++out.pairs_checked;
        if (compatible != bool(reported.count({i, j})))
          problem(fmt::format("pair pre#{} post#{}: brute force says {}", a[i].node_id,
                              b[j].node_id, compatible ? "compatible" : "incompatible"));
        if (compatible)
          seen_a[i] = seen_b[j] = true;
      }
    for (size_t i = 0; i < a.size(); ++i)
      if (!seen_a[i])
        problem(fmt::format("pre terminal {} is orphaned", a[i].node_id));
    for (size_t j = 0; j < b.size(); ++j)
      if (!seen_b[j])
        problem(fmt::format("post terminal {} is orphaned", b[j].node_id));
  }

  void classification(const std::string &tag, const SymState &s, const SymState &t,
                      const ClassifyResult &c) {
    ++out.classes_checked;
    auto exclusive = [&](const SymState &in, const SymState &ex) {
      std::vector<Term> q = in.constraints;
      q.push_back(mk_not(mk_conj(ex.constraints)));
      return sat(std::move(q));
    };
    bool pre_only = exclusive(s, t), post_only = exclusive(t, s);
    Classification want = !pre_only && !post_only ? Classification::Equivalent
                          : !pre_only             ? Classification::PreRefinesPost
                          : !post_only            ? Classification::PostRefinesPre
                                                  : Classification::Overlapping;
    if (want != c.kind)
      problem(fmt::format("{}: classified {} but brute force says {}", tag, to_string(c.kind),
                          to_string(want)));
  }

  void diffs() {
    for (size_t k = 0; k < cr.pairs.size(); ++k) {
      const CompatiblePair &p = cr.pairs[k];
      const SymState &s = cr.pre_of(p), &t = cr.post_of(p);
      const DiffReport &d = cr.diffs.at(k);
      std::string tag = fmt::format("pair pre#{} post#{}", s.node_id, t.node_id);
      std::vector<Term> joint = s.constraints;
      joint.insert(joint.end(), t.constraints.begin(), t.constraints.end());
      for (const RegisterDiff &r : d.registers)
        check_value(fmt::format("{} r{}[{}:{}]", tag, r.slice.reg, r.slice.hi, r.slice.lo), r.pre,
                    r.post, r.differs, r.witness, joint);
      for (const MemoryDiff &m : d.memory)
        check_value(fmt::format("{} mem[{:#x}]", tag, m.addr), m.pre, m.post, m.differs,
                    m.witness, joint);
      for (const ChannelDiff &c : d.channels)
        for (const EffectPosition &e : c.positions) {
          if (!e.pre || !e.post)
            continue;
          bool differs = e.status == EffectStatus::Differs;
          check_value(fmt::format("{} channel {} effect {}/{}", tag, c.channel, *e.pre, *e.post),
                      c.pre.at(*e.pre), c.post.at(*e.post), differs, e.witness, joint);
        }
      classification(tag, s, t, d.classification);
    }
  }
};

} // namespace

OracleCheck oracle_check(const Harness &h, const ComparisonResult &cr, unsigned max_bits) {
  Checker c(h, cr, max_bits);
  c.pairs();
  c.diffs();
  return std::move(c.out);
}

} // namespace duet
