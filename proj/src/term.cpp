//===-- term.cpp - Hash-consed bitvector terms ---------------------------===//

#include "duet/term.hpp"

#include "duet/error.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace duet {

namespace {

size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

size_t structural_hash(const TermNode &n) {
  size_t h = std::hash<int>()(static_cast<int>(n.kind));
  h = mix(h, n.width);
  h = mix(h, n.hi);
  h = mix(h, n.lo);
  h = mix(h, n.value);
  if (n.kind == Kind::Var)
    h = mix(h, std::hash<std::string>()(n.name));
  for (unsigned i = 0; i < n.nkids; ++i)
    h = mix(h, std::hash<const void *>()(n.kids[i]));
  return h;
}

struct NodePtrHash {
  size_t operator()(const TermNode *n) const { return n->hash; }
};

struct NodePtrEq {
  bool operator()(const TermNode *a, const TermNode *b) const {
    if (a->kind != b->kind || a->width != b->width || a->hi != b->hi ||
        a->lo != b->lo || a->value != b->value || a->nkids != b->nkids)
      return false;
    for (unsigned i = 0; i < a->nkids; ++i)
      if (a->kids[i] != b->kids[i])
        return false;
    return a->kind != Kind::Var || a->name == b->name;
  }
};

class TermTable {
public:
  const TermNode *intern(TermNode proto) {
    proto.hash = structural_hash(proto);
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = set_.find(&proto); it != set_.end())
      return *it;
    proto.id = next_id_++;
    store_.push_back(std::move(proto));
    const TermNode *n = &store_.back();
    set_.insert(n);
    return n;
  }

  size_t size() {
    std::lock_guard<std::mutex> lock(mu_);
    return set_.size();
  }

private:
  std::mutex mu_;
  std::deque<TermNode> store_;
  std::unordered_set<const TermNode *, NodePtrHash, NodePtrEq> set_;
  uint64_t next_id_ = 1;
};

TermTable &table() {
  static TermTable t;
  return t;
}

uint32_t smear_right(uint32_t x) {
  x |= x >> 1;
  x |= x >> 2;
  x |= x >> 4;
  x |= x >> 8;
  x |= x >> 16;
  return x;
}

uint32_t compute_maybe_ones(const TermNode &n) {
  const uint32_t mask = width_mask(n.width);
  auto kid = [&](int i) { return n.kids[i]->maybe_ones; };
  switch (n.kind) {
  case Kind::Const:
    return n.value;
  case Kind::ZExt:
    return kid(0);
  case Kind::SExt:
    return (kid(0) >> (n.kids[0]->width - 1)) & 1 ? mask : kid(0);
  case Kind::Extract:
    return (kid(0) >> n.lo) & mask;
  case Kind::And:
    return kid(0) & kid(1);
  case Kind::Or:
  case Kind::Xor:
    return kid(0) | kid(1);
  case Kind::Add: {
    uint32_t s = smear_right(kid(0) | kid(1));
    return ((s << 1) | s) & mask;
  }
  case Kind::Shl:
    if (n.kids[1]->kind == Kind::Const)
      return n.kids[1]->value >= n.width ? 0 : (kid(0) << n.kids[1]->value) & mask;
    return mask;
  case Kind::Lshr:
    if (n.kids[1]->kind == Kind::Const)
      return n.kids[1]->value >= n.width ? 0 : kid(0) >> n.kids[1]->value;
    return smear_right(kid(0));
  case Kind::Eq:
  case Kind::Slt:
  case Kind::Ult:
    return 1;
  case Kind::Ite:
    return kid(1) | kid(2);
  default:
    return mask;
  }
}

void check_width(unsigned w) {
  if (!valid_width(w))
    throw WidthError("unsupported width " + std::to_string(w));
}

void need_bool(Term t, const char *what) {
  if (t.width() != 1)
    throw WidthError(std::string(what) + " expects a width-1 operand, got width " +
                     std::to_string(t.width()));
}

void need_same(Term a, Term b, Kind k) {
  if (a.width() != b.width())
    throw WidthError(std::string("width mismatch in ") + to_string(k) + ": " +
                     std::to_string(a.width()) + " vs " + std::to_string(b.width()));
}

bool is_commutative(Kind k) {
  return k == Kind::Add || k == Kind::Mul || k == Kind::And || k == Kind::Or ||
         k == Kind::Xor || k == Kind::Eq;
}

// Validates width rules and returns the result width.
unsigned result_width(Kind k, std::span<const Term> kids, unsigned width,
                      unsigned hi, unsigned lo) {
  auto arity = [&](size_t n) {
    if (kids.size() != n)
      throw WidthError(std::string(to_string(k)) + " expects " +
                       std::to_string(n) + " operand(s)");
  };
  switch (k) {
  case Kind::Const:
  case Kind::Var:
    throw WidthError("leaf kinds are built with mk_const/mk_var");
  case Kind::Not:
    arity(1);
    return kids[0].width();
  case Kind::ZExt:
  case Kind::SExt:
    arity(1);
    check_width(width);
    if (width < kids[0].width())
      throw WidthError("extension to a narrower width");
    return width;
  case Kind::Extract: {
    arity(1);
    if (hi < lo || hi >= kids[0].width())
      throw WidthError("extract bounds out of range");
    unsigned w = hi - lo + 1;
    check_width(w);
    return w;
  }
  case Kind::Eq:
  case Kind::Slt:
  case Kind::Ult:
    arity(2);
    need_same(kids[0], kids[1], k);
    return 1;
  case Kind::Ite:
    arity(3);
    need_bool(kids[0], "ite condition");
    need_same(kids[1], kids[2], k);
    return kids[1].width();
  default:
    arity(2);
    need_same(kids[0], kids[1], k);
    return kids[0].width();
  }
}

Term intern(Kind k, std::span<const Term> kids, unsigned width, unsigned hi,
            unsigned lo) {
  TermNode n;
  n.kind = k;
  n.width = static_cast<uint8_t>(width);
  n.nkids = static_cast<uint8_t>(kids.size());
  for (size_t i = 0; i < kids.size(); ++i)
    n.kids[i] = kids[i].node();
  if (k == Kind::Extract) {
    n.hi = static_cast<uint8_t>(hi);
    n.lo = static_cast<uint8_t>(lo);
  }
  n.maybe_ones = compute_maybe_ones(n);
  return Term(table().intern(std::move(n)));
}

Term raw1(Kind k, Term a, unsigned w, unsigned hi = 0, unsigned lo = 0) {
  Term ks[] = {a};
  return intern(k, ks, w, hi, lo);
}

Term raw2(Kind k, Term a, Term b, unsigned w) {
  Term ks[] = {a, b};
  return intern(k, ks, w, 0, 0);
}

Term fold_unary(Kind k, Term a, unsigned w, unsigned hi = 0, unsigned lo = 0) {
  return mk_const(apply_op(k, w, a.width(), a.value(), 0, 0, hi, lo), w);
}

Term fold_binary(Kind k, Term a, Term b) {
  unsigned w = (k == Kind::Eq || k == Kind::Slt || k == Kind::Ult) ? 1 : a.width();
  return mk_const(apply_op(k, w, a.width(), a.value(), b.value()), w);
}

// Orders commutative operands: constants right, otherwise by node id.
void canonicalize(Kind k, Term &a, Term &b) {
  if (!is_commutative(k))
    return;
  if (a.is_const() && !b.is_const())
    std::swap(a, b);
  else if (!a.is_const() && !b.is_const() && a.id() > b.id())
    std::swap(a, b);
}

} // namespace

const char *to_string(Kind k) {
  switch (k) {
  case Kind::Const: return "const";
  case Kind::Var: return "var";
  case Kind::Not: return "not";
  case Kind::ZExt: return "zx";
  case Kind::SExt: return "sx";
  case Kind::Extract: return "extract";
  case Kind::Add: return "add";
  case Kind::Sub: return "sub";
  case Kind::Mul: return "mul";
  case Kind::And: return "and";
  case Kind::Or: return "or";
  case Kind::Xor: return "xor";
  case Kind::Shl: return "shl";
  case Kind::Lshr: return "lshr";
  case Kind::Ashr: return "ashr";
  case Kind::Eq: return "eq";
  case Kind::Slt: return "slt";
  case Kind::Ult: return "ult";
  case Kind::Ite: return "ite";
  }
  return "?";
}

uint32_t apply_op(Kind k, unsigned width, unsigned kid_width, uint32_t a,
                  uint32_t b, uint32_t c, unsigned hi, unsigned lo) {
  const uint32_t mask = width_mask(width);
  switch (k) {
  case Kind::Const:
  case Kind::Var:
    return a & mask;
  case Kind::Not:
    return ~a & mask;
  case Kind::ZExt:
    return a & width_mask(kid_width);
  case Kind::SExt:
    return static_cast<uint32_t>(sign_extend(a, kid_width)) & mask;
  case Kind::Extract:
    return (a >> lo) & width_mask(hi - lo + 1);
  case Kind::Add:
    return (a + b) & mask;
  case Kind::Sub:
    return (a - b) & mask;
  case Kind::Mul:
    return (a * b) & mask;
  case Kind::And:
    return a & b;
  case Kind::Or:
    return a | b;
  case Kind::Xor:
    return a ^ b;
  case Kind::Shl:
    return b >= width ? 0 : (a << b) & mask;
  case Kind::Lshr:
    return b >= width ? 0 : a >> b;
  case Kind::Ashr: {
    int32_t s = sign_extend(a, width);
    if (b >= width)
      return s < 0 ? mask : 0;
    return static_cast<uint32_t>(s >> b) & mask;
  }
  case Kind::Eq:
    return a == b;
  case Kind::Slt:
    return sign_extend(a, kid_width) < sign_extend(b, kid_width);
  case Kind::Ult:
    return a < b;
  case Kind::Ite:
    return a ? b : c;
  }
  return 0;
}

Term mk_const(uint64_t value, unsigned width) {
  check_width(width);
  TermNode n;
  n.kind = Kind::Const;
  n.width = static_cast<uint8_t>(width);
  n.value = static_cast<uint32_t>(value) & width_mask(width);
  n.maybe_ones = n.value;
  return Term(table().intern(std::move(n)));
}

Term mk_bool(bool b) { return mk_const(b ? 1 : 0, 1); }

Term mk_var(std::string_view name, unsigned width) {
  check_width(width);
  if (name.empty())
    throw Error("variable name must not be empty");
  TermNode n;
  n.kind = Kind::Var;
  n.width = static_cast<uint8_t>(width);
  n.name = std::string(name);
  n.maybe_ones = width_mask(width);
  return Term(table().intern(std::move(n)));
}

Term mk_not(Term a) {
  if (a.is_const())
    return fold_unary(Kind::Not, a, a.width());
  if (a.kind() == Kind::Not)
    return a.kid(0);
  return raw1(Kind::Not, a, a.width());
}

Term mk_zext(Term a, unsigned width) {
  Term ks[] = {a};
  result_width(Kind::ZExt, ks, width, 0, 0);
  if (width == a.width())
    return a;
  if (a.is_const())
    return mk_const(a.value(), width);
  if (a.kind() == Kind::ZExt)
    return mk_zext(a.kid(0), width);
  return raw1(Kind::ZExt, a, width);
}

Term mk_sext(Term a, unsigned width) {
  Term ks[] = {a};
  result_width(Kind::SExt, ks, width, 0, 0);
  if (width == a.width())
    return a;
  if (a.is_const())
    return fold_unary(Kind::SExt, a, width);
  // The sign bit of a widening zero-extension is known to be zero.
  if (a.kind() == Kind::ZExt)
    return mk_zext(a.kid(0), width);
  if (a.kind() == Kind::SExt)
    return mk_sext(a.kid(0), width);
  return raw1(Kind::SExt, a, width);
}

Term mk_extract(Term a, unsigned hi, unsigned lo) {
  Term ks[] = {a};
  unsigned w = result_width(Kind::Extract, ks, 0, hi, lo);
  if (lo == 0 && w == a.width())
    return a;
  if (a.is_const())
    return fold_unary(Kind::Extract, a, w, hi, lo);
  if (((a.maybe_ones() >> lo) & width_mask(w)) == 0)
    return mk_const(0, w);
  switch (a.kind()) {
  case Kind::Extract:
    return mk_extract(a.kid(0), a.lo() + hi, a.lo() + lo);
  case Kind::ZExt: {
    Term x = a.kid(0);
    if (hi < x.width())
      return mk_extract(x, hi, lo);
    if (lo == 0)
      return mk_zext(x, w);
    break;
  }
  case Kind::And:
  case Kind::Or:
  case Kind::Xor: {
    Term l = mk_extract(a.kid(0), hi, lo);
    Term r = mk_extract(a.kid(1), hi, lo);
    Term ks2[] = {l, r};
    return mk_node(a.kind(), ks2);
  }
  case Kind::Shl:
    if (a.kid(1).is_const() && a.kid(1).value() <= lo)
      return mk_extract(a.kid(0), hi - a.kid(1).value(), lo - a.kid(1).value());
    break;
  case Kind::Lshr:
    if (a.kid(1).is_const() && hi + a.kid(1).value() < a.width())
      return mk_extract(a.kid(0), hi + a.kid(1).value(), lo + a.kid(1).value());
    break;
  default:
    break;
  }
  return raw1(Kind::Extract, a, w, hi, lo);
}

Term mk_add(Term a, Term b) {
  need_same(a, b, Kind::Add);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Add, a, b);
  canonicalize(Kind::Add, a, b);
  if (b.is_const(0))
    return a;
  if (b.is_const() && a.kind() == Kind::Add && a.kid(1).is_const())
    return mk_add(a.kid(0), mk_const(uint64_t(a.kid(1).value()) + b.value(), a.width()));
  return raw2(Kind::Add, a, b, a.width());
}

Term mk_sub(Term a, Term b) {
  need_same(a, b, Kind::Sub);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Sub, a, b);
  if (b.is_const(0))
    return a;
  if (a == b)
    return mk_const(0, a.width());
  if (b.is_const())
    return mk_add(a, mk_const(uint64_t(0) - b.value(), a.width()));
  return raw2(Kind::Sub, a, b, a.width());
}

Term mk_mul(Term a, Term b) {
  need_same(a, b, Kind::Mul);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Mul, a, b);
  canonicalize(Kind::Mul, a, b);
  if (b.is_const(0))
    return b;
  if (b.is_const(1))
    return a;
  return raw2(Kind::Mul, a, b, a.width());
}

Term mk_and(Term a, Term b) {
  need_same(a, b, Kind::And);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::And, a, b);
  canonicalize(Kind::And, a, b);
  const unsigned w = a.width();
  const uint32_t mask = width_mask(w);
  if (a == b)
    return a;
  if ((a.maybe_ones() & b.maybe_ones()) == 0)
    return mk_const(0, w);
  if (b.is_const()) {
    uint32_t c = b.value();
    if ((a.maybe_ones() & ~c & mask) == 0)
      return a;
    if (a.kind() == Kind::Or) {
      if ((a.kid(1).maybe_ones() & c) == 0)
        return mk_and(a.kid(0), b);
      if ((a.kid(0).maybe_ones() & c) == 0)
        return mk_and(a.kid(1), b);
    }
  }
  if ((a.kind() == Kind::Not && a.kid(0) == b) ||
      (b.kind() == Kind::Not && b.kid(0) == a))
    return mk_const(0, w);
  return raw2(Kind::And, a, b, w);
}

Term mk_or(Term a, Term b) {
  need_same(a, b, Kind::Or);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Or, a, b);
  canonicalize(Kind::Or, a, b);
  const unsigned w = a.width();
  if (b.is_const(0) || a == b)
    return a;
  if (b.is_const(width_mask(w)))
    return b;
  if ((a.kind() == Kind::Not && a.kid(0) == b) ||
      (b.kind() == Kind::Not && b.kid(0) == a))
    return mk_const(width_mask(w), w);
  return raw2(Kind::Or, a, b, w);
}

Term mk_xor(Term a, Term b) {
  need_same(a, b, Kind::Xor);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Xor, a, b);
  canonicalize(Kind::Xor, a, b);
  const unsigned w = a.width();
  if (b.is_const(0))
    return a;
  if (a == b)
    return mk_const(0, w);
  if (b.is_const(width_mask(w)))
    return mk_not(a);
  return raw2(Kind::Xor, a, b, w);
}

namespace {

Term mk_shift(Kind k, Term a, Term b) {
  need_same(a, b, k);
  if (a.is_const() && b.is_const())
    return fold_binary(k, a, b);
  if (b.is_const(0))
    return a;
  if (a.is_const(0))
    return a;
  if (k != Kind::Ashr && b.is_const() && b.value() >= a.width())
    return mk_const(0, a.width());
  return raw2(k, a, b, a.width());
}

} // namespace

Term mk_shl(Term a, Term b) { return mk_shift(Kind::Shl, a, b); }
Term mk_lshr(Term a, Term b) { return mk_shift(Kind::Lshr, a, b); }
Term mk_ashr(Term a, Term b) { return mk_shift(Kind::Ashr, a, b); }

Term mk_eq(Term a, Term b) {
  need_same(a, b, Kind::Eq);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Eq, a, b);
  if (a == b)
    return mk_bool(true);
  canonicalize(Kind::Eq, a, b);
  if (b.is_const()) {
    const uint32_t c = b.value();
    if (a.width() == 1)
      return c ? a : mk_not(a);
    // Bits that must be zero in a but are set in c decide the comparison.
    if (c & ~a.maybe_ones())
      return mk_bool(false);
    if (a.kind() == Kind::ZExt) {
      Term x = a.kid(0);
      return mk_eq(x, mk_const(c, x.width()));
    }
    if (a.kind() == Kind::Add && a.kid(1).is_const())
      return mk_eq(a.kid(0), mk_const(uint64_t(c) - a.kid(1).value(), a.width()));
    if (a.kind() == Kind::Xor && a.kid(1).is_const())
      return mk_eq(a.kid(0), mk_const(c ^ a.kid(1).value(), a.width()));
  }
  return raw2(Kind::Eq, a, b, 1);
}

Term mk_slt(Term a, Term b) {
  need_same(a, b, Kind::Slt);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Slt, a, b);
  if (a == b)
    return mk_bool(false);
  return raw2(Kind::Slt, a, b, 1);
}

Term mk_ult(Term a, Term b) {
  need_same(a, b, Kind::Ult);
  if (a.is_const() && b.is_const())
    return fold_binary(Kind::Ult, a, b);
  if (a == b || b.is_const(0))
    return mk_bool(false);
  return raw2(Kind::Ult, a, b, 1);
}

Term mk_ite(Term c, Term a, Term b) {
  Term ks[] = {c, a, b};
  unsigned w = result_width(Kind::Ite, ks, 0, 0, 0);
  if (c.is_const())
    return c.value() ? a : b;
  if (a == b)
    return a;
  if (w == 1 && a.is_const() && b.is_const())
    return a.value() ? c : mk_not(c);
  if (c.kind() == Kind::Not)
    return mk_ite(c.kid(0), b, a);
  return intern(Kind::Ite, ks, w, 0, 0);
}

Term mk_ne(Term a, Term b) { return mk_not(mk_eq(a, b)); }
Term mk_ule(Term a, Term b) { return mk_not(mk_ult(b, a)); }
Term mk_sle(Term a, Term b) { return mk_not(mk_slt(b, a)); }

Term mk_conj(std::span<const Term> ts) {
  Term acc = mk_bool(true);
  for (Term t : ts) {
    need_bool(t, "conjunction");
    acc = mk_and(acc, t);
  }
  return acc;
}

Term mk_disj(std::span<const Term> ts) {
  Term acc = mk_bool(false);
  for (Term t : ts) {
    need_bool(t, "disjunction");
    acc = mk_or(acc, t);
  }
  return acc;
}

Term mk_node(Kind k, std::span<const Term> kids, unsigned width, unsigned hi,
             unsigned lo) {
  auto arity = [&](size_t n) {
    if (kids.size() != n)
      throw WidthError(std::string(to_string(k)) + " expects " +
                       std::to_string(n) + " operand(s)");
  };
  switch (k) {
  case Kind::Const:
  case Kind::Var:
    throw WidthError("leaf kinds are built with mk_const/mk_var");
  case Kind::Not:
    arity(1);
    return mk_not(kids[0]);
  case Kind::ZExt:
    arity(1);
    return mk_zext(kids[0], width);
  case Kind::SExt:
    arity(1);
    return mk_sext(kids[0], width);
  case Kind::Extract:
    arity(1);
    return mk_extract(kids[0], hi, lo);
  case Kind::Ite:
    arity(3);
    return mk_ite(kids[0], kids[1], kids[2]);
  default:
    break;
  }
  arity(2);
  Term a = kids[0], b = kids[1];
  switch (k) {
  case Kind::Add: return mk_add(a, b);
  case Kind::Sub: return mk_sub(a, b);
  case Kind::Mul: return mk_mul(a, b);
  case Kind::And: return mk_and(a, b);
  case Kind::Or: return mk_or(a, b);
  case Kind::Xor: return mk_xor(a, b);
  case Kind::Shl: return mk_shl(a, b);
  case Kind::Lshr: return mk_lshr(a, b);
  case Kind::Ashr: return mk_ashr(a, b);
  case Kind::Eq: return mk_eq(a, b);
  case Kind::Slt: return mk_slt(a, b);
  case Kind::Ult: return mk_ult(a, b);
  default: break;
  }
  throw WidthError("unhandled kind");
}

Term mk_raw(Kind k, std::span<const Term> kids, unsigned width, unsigned hi,
            unsigned lo) {
  unsigned w = result_width(k, kids, width, hi, lo);
  return intern(k, kids, w, hi, lo);
}

size_t term_table_size() { return table().size(); }

namespace {

template <bool ZeroDefault>
uint32_t eval_impl(Term root, const Assignment &a) {
  std::unordered_map<const TermNode *, uint32_t> memo;
  std::vector<std::pair<const TermNode *, bool>> stack{{root.node(), false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(n))
      continue;
    if (n->kind == Kind::Const) {
      memo[n] = n->value;
      continue;
    }
    if (n->kind == Kind::Var) {
      auto it = a.find(n->name);
      if (it == a.end()) {
        if constexpr (ZeroDefault) {
          memo[n] = 0;
          continue;
        } else {
          throw UnboundVariable(n->name);
        }
      }
      memo[n] = it->second & width_mask(n->width);
      continue;
    }
    if (!expanded) {
      stack.push_back({n, true});
      for (unsigned i = 0; i < n->nkids; ++i)
        if (!memo.count(n->kids[i]))
          stack.push_back({n->kids[i], false});
      continue;
    }
    uint32_t v[3] = {0, 0, 0};
    for (unsigned i = 0; i < n->nkids; ++i)
      v[i] = memo.at(n->kids[i]);
    memo[n] = apply_op(n->kind, n->width, n->kids[0]->width, v[0], v[1], v[2],
                       n->hi, n->lo);
  }
  return memo.at(root.node());
}

} // namespace

uint32_t eval(Term t, const Assignment &a) { return eval_impl<false>(t, a); }

uint32_t eval_or_zero(Term t, const Assignment &a) {
  return eval_impl<true>(t, a);
}

void collect_vars(Term t, VarSet &out) {
  std::unordered_set<const TermNode *> seen;
  std::vector<const TermNode *> stack{t.node()};
  while (!stack.empty()) {
    const TermNode *n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second)
      continue;
    if (n->kind == Kind::Var)
      out.emplace(n->name, n->width);
    for (unsigned i = 0; i < n->nkids; ++i)
      stack.push_back(n->kids[i]);
  }
}

VarSet free_vars(Term t) {
  VarSet out;
  collect_vars(t, out);
  return out;
}

VarSet free_vars(std::span<const Term> ts) {
  VarSet out;
  for (Term t : ts)
    collect_vars(t, out);
  return out;
}

Term substitute(Term root, const Assignment &partial) {
  std::unordered_map<const TermNode *, Term> memo;
  std::function<Term(Term)> go = [&](Term t) -> Term {
    if (auto it = memo.find(t.node()); it != memo.end())
      return it->second;
    Term r;
    if (t.is_const()) {
      r = t;
    } else if (t.is_var()) {
      auto it = partial.find(t.name());
      r = it == partial.end() ? t : mk_const(it->second, t.width());
    } else {
      Term kids[3];
      bool changed = false;
      for (size_t i = 0; i < t.num_kids(); ++i) {
        kids[i] = go(t.kid(i));
        changed |= kids[i] != t.kid(i);
      }
      r = changed ? mk_node(t.kind(), std::span(kids, t.num_kids()), t.width(),
                            t.hi(), t.lo())
                  : t;
    }
    memo.emplace(t.node(), r);
    return r;
  };
  return go(root);
}

namespace {

std::string literal(uint32_t v) {
  if (v < 256)
    return std::to_string(v);
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

const char *infix(Kind k, unsigned width) {
  switch (k) {
  case Kind::Add: return " + ";
  case Kind::Sub: return " - ";
  case Kind::Mul: return " * ";
  case Kind::And: return width == 1 ? " && " : " & ";
  case Kind::Or: return width == 1 ? " || " : " | ";
  case Kind::Xor: return " ^ ";
  case Kind::Shl: return " << ";
  case Kind::Lshr: return " >>u ";
  case Kind::Ashr: return " >>s ";
  case Kind::Eq: return " == ";
  case Kind::Slt: return " <s ";
  case Kind::Ult: return " <u ";
  default: return " ? ";
  }
}

void pretty_into(Term t, std::string &out, size_t limit) {
  if (out.size() > limit)
    return;
  auto sized_const = [&](Term c) {
    out += "zx(" + literal(c.value()) + ", " + std::to_string(c.width()) + ")";
  };
  switch (t.kind()) {
  case Kind::Const:
    out += literal(t.value());
    return;
  case Kind::Var:
    out += t.name();
    return;
  case Kind::Not:
    if (t.width() == 1) {
      out += "!(";
      pretty_into(t.kid(0), out, limit);
      out += ")";
    } else {
      out += "(";
      pretty_into(t.kid(0), out, limit);
      out += " ^ " + literal(width_mask(t.width())) + ")";
    }
    return;
  case Kind::ZExt:
  case Kind::SExt:
    out += t.kind() == Kind::ZExt ? "zx(" : "sx(";
    pretty_into(t.kid(0), out, limit);
    out += ", " + std::to_string(t.width()) + ")";
    return;
  case Kind::Extract:
    out += "extract(";
    pretty_into(t.kid(0), out, limit);
    out += ", " + std::to_string(t.hi()) + ", " + std::to_string(t.lo()) + ")";
    return;
  case Kind::Ite:
    out += "ite(";
    pretty_into(t.kid(0), out, limit);
    for (int i = 1; i <= 2; ++i) {
      out += ", ";
      if (t.kid(i).is_const())
        sized_const(t.kid(i));
      else
        pretty_into(t.kid(i), out, limit);
    }
    out += ")";
    return;
  default: {
    // Operands of infix operators cannot start with '!' in the grammar.
    auto operand = [&](Term k) {
      bool wrap = k.kind() == Kind::Not && k.width() == 1;
      if (wrap)
        out += "(";
      pretty_into(k, out, limit);
      if (wrap)
        out += ")";
    };
    out += "(";
    if (t.kid(0).is_const() && t.kid(1).is_const())
      sized_const(t.kid(0));
    else
      operand(t.kid(0));
    out += infix(t.kind(), t.kid(0).width());
    operand(t.kid(1));
    out += ")";
    return;
  }
  }
}

} // namespace

std::string pretty(Term t) {
  std::string out;
  pretty_into(t, out, SIZE_MAX);
  return out;
}

std::string pretty_short(Term t, size_t max_len) {
  std::string out;
  pretty_into(t, out, max_len);
  if (out.size() > max_len) {
    out.resize(max_len);
    out += "...";
  }
  return out;
}

namespace {

void sexpr_into(Term t, const std::unordered_map<const TermNode *, unsigned> &refs,
                std::unordered_map<const TermNode *, unsigned> &labels,
                std::string &out) {
  const TermNode *n = t.node();
  if (auto it = labels.find(n); it != labels.end()) {
    out += "$" + std::to_string(it->second);
    return;
  }
  if (n->nkids > 0 && refs.at(n) > 1) {
    unsigned label = static_cast<unsigned>(labels.size());
    labels.emplace(n, label);
    out += "$" + std::to_string(label) + ":";
  }
  out += "(";
  out += to_string(n->kind);
  switch (n->kind) {
  case Kind::Const:
    out += " " + std::to_string(n->width) + " " + std::to_string(n->value) + ")";
    return;
  case Kind::Var:
    out += " " + std::to_string(n->width) + " " + n->name + ")";
    return;
  case Kind::ZExt:
  case Kind::SExt:
    out += " " + std::to_string(n->width);
    break;
  case Kind::Extract:
    out += " " + std::to_string(n->hi) + " " + std::to_string(n->lo);
    break;
  default:
    break;
  }
  for (unsigned i = 0; i < n->nkids; ++i) {
    out += " ";
    sexpr_into(Term(n->kids[i]), refs, labels, out);
  }
  out += ")";
}

class SexprParser {
public:
  explicit SexprParser(std::string_view s) : s_(s) {}

  Term parse() {
    Term t = term();
    skip();
    if (pos_ != s_.size())
      fail("trailing text");
    return t;
  }

private:
  [[noreturn]] void fail(const std::string &msg) { throw ParseError(pos_, "sexpr: " + msg); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  std::string_view atom() {
    skip();
    size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')')
      ++pos_;
    if (start == pos_)
      fail("expected atom");
    return s_.substr(start, pos_ - start);
  }

  uint32_t number() {
    std::string_view a = atom();
    uint64_t v = 0;
    for (char c : a) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        fail("expected number");
      v = v * 10 + unsigned(c - '0');
      if (v > 0xFFFFFFFFull)
        fail("number too large");
    }
    return static_cast<uint32_t>(v);
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Term term() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '$') {
      ++pos_;
      uint32_t label = number_until_colon();
      skip();
      if (pos_ < s_.size() && s_[pos_] == ':') {
        ++pos_;
        Term t = node();
        labels_[label] = t;
        return t;
      }
      auto it = labels_.find(label);
      if (it == labels_.end())
        fail("undefined reference $" + std::to_string(label));
      return it->second;
    }
    return node();
  }

  uint32_t number_until_colon() {
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_)
      fail("expected label number");
    return static_cast<uint32_t>(std::stoul(std::string(s_.substr(start, pos_ - start))));
  }

  Term node() {
    expect('(');
    std::string_view op = atom();
    Term result;
    if (op == "const") {
      unsigned w = number();
      result = mk_const(number(), w);
    } else if (op == "var") {
      unsigned w = number();
      result = mk_var(atom(), w);
    } else {
      std::optional<Kind> kind;
      for (int k = int(Kind::Not); k <= int(Kind::Ite); ++k)
        if (op == to_string(Kind(k)))
          kind = Kind(k);
      if (!kind)
        fail("unknown operator '" + std::string(op) + "'");
      unsigned width = 0, hi = 0, lo = 0;
      if (*kind == Kind::ZExt || *kind == Kind::SExt)
        width = number();
      if (*kind == Kind::Extract) {
        hi = number();
        lo = number();
      }
      std::vector<Term> kids;
      skip();
      while (pos_ < s_.size() && s_[pos_] != ')') {
        kids.push_back(term());
        skip();
      }
      try {
        result = mk_raw(*kind, kids, width, hi, lo);
      } catch (const WidthError &e) {
        fail(e.what());
      }
    }
    expect(')');
    return result;
  }

  std::string_view s_;
  size_t pos_ = 0;
  std::unordered_map<uint32_t, Term> labels_;
};

} // namespace

std::string to_sexpr(Term t) {
  std::unordered_map<const TermNode *, unsigned> refs;
  std::vector<const TermNode *> stack{t.node()};
  refs[t.node()] = 1;
  std::unordered_set<const TermNode *> expanded;
  while (!stack.empty()) {
    const TermNode *n = stack.back();
    stack.pop_back();
    if (!expanded.insert(n).second)
      continue;
    for (unsigned i = 0; i < n->nkids; ++i) {
      if (refs[n->kids[i]]++ == 0)
        stack.push_back(n->kids[i]);
    }
  }
  std::unordered_map<const TermNode *, unsigned> labels;
  std::string out;
  sexpr_into(t, refs, labels, out);
  return out;
}

Term parse_sexpr(std::string_view text) { return SexprParser(text).parse(); }

} // namespace duet
