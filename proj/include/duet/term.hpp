//===-- term.hpp - Hash-consed bitvector terms ---------------------------===//
//
// Terms are immutable DAG nodes interned in a process-wide table, so two
// structurally equal terms are the same node and compare equal in O(1).
// Widths are restricted to 1, 8, 16 and 32 bits. Width-1 terms double as
// booleans: comparisons produce them and and/or/xor/not act on them.
//
// The mk_* constructors fold constants and apply a small set of algebraic
// identities before interning. mk_raw interns without simplifying and is
// meant for tests that check the simplifier against unsimplified forms.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duet {

enum class Kind : uint8_t {
  Const,
  Var,
  Not,
  ZExt,
  SExt,
  Extract,
  Add,
  Sub,
  Mul,
  And,
  Or,
  Xor,
  Shl,
  Lshr,
  Ashr,
  Eq,
  Slt,
  Ult,
  Ite,
};

const char *to_string(Kind k);

inline bool valid_width(unsigned w) {
  return w == 1 || w == 8 || w == 16 || w == 32;
}

inline uint32_t width_mask(unsigned w) {
  return w >= 32 ? 0xFFFFFFFFu : ((1u << w) - 1u);
}

/// Sign-extends the low `from` bits of v to 32 bits.
inline int32_t sign_extend(uint32_t v, unsigned from) {
  if (from >= 32)
    return static_cast<int32_t>(v);
  uint32_t sign = 1u << (from - 1);
  v &= width_mask(from);
  return static_cast<int32_t>((v ^ sign) - sign);
}

struct TermNode {
  Kind kind;
  uint8_t width;
  uint8_t hi = 0, lo = 0; // Extract bounds
  uint8_t nkids = 0;
  uint32_t value = 0;      // Const payload
  uint32_t maybe_ones = 0; // over-approximation of bits that can be 1
  uint64_t id = 0;         // dense, unique per structure
  size_t hash = 0;
  const TermNode *kids[3] = {nullptr, nullptr, nullptr};
  std::string name; // Var name
};

class Term {
public:
  Term() = default;
  explicit Term(const TermNode *n) : n_(n) {}

  const TermNode *node() const { return n_; }
  explicit operator bool() const { return n_ != nullptr; }

  Kind kind() const { return n_->kind; }
  unsigned width() const { return n_->width; }
  size_t num_kids() const { return n_->nkids; }
  Term kid(size_t i) const { return Term(n_->kids[i]); }
  uint32_t value() const { return n_->value; }
  const std::string &name() const { return n_->name; }
  unsigned hi() const { return n_->hi; }
  unsigned lo() const { return n_->lo; }
  uint64_t id() const { return n_->id; }
  uint32_t maybe_ones() const { return n_->maybe_ones; }

  bool is_const() const { return n_->kind == Kind::Const; }
  bool is_const(uint32_t v) const { return is_const() && n_->value == v; }
  bool is_var() const { return n_->kind == Kind::Var; }
  bool is_true() const { return n_->width == 1 && is_const(1); }
  bool is_false() const { return n_->width == 1 && is_const(0); }

  friend bool operator==(Term a, Term b) { return a.n_ == b.n_; }
  friend std::strong_ordering operator<=>(Term a, Term b) {
    uint64_t x = a.n_ ? a.n_->id : 0, y = b.n_ ? b.n_->id : 0;
    return x <=> y;
  }

private:
  const TermNode *n_ = nullptr;
};

struct TermHash {
  size_t operator()(Term t) const { return std::hash<const void *>()(t.node()); }
};

/// Concrete semantics of one operator on already-masked operands.
/// kid_width is the operand width (for SExt and the comparisons).
uint32_t apply_op(Kind k, unsigned width, unsigned kid_width, uint32_t a,
                  uint32_t b = 0, uint32_t c = 0, unsigned hi = 0,
                  unsigned lo = 0);

Term mk_const(uint64_t value, unsigned width);
Term mk_bool(bool b);
Term mk_var(std::string_view name, unsigned width);

Term mk_not(Term a);
Term mk_zext(Term a, unsigned width);
Term mk_sext(Term a, unsigned width);
Term mk_extract(Term a, unsigned hi, unsigned lo);

Term mk_add(Term a, Term b);
Term mk_sub(Term a, Term b);
Term mk_mul(Term a, Term b);
Term mk_and(Term a, Term b);
Term mk_or(Term a, Term b);
Term mk_xor(Term a, Term b);
Term mk_shl(Term a, Term b);
Term mk_lshr(Term a, Term b);
Term mk_ashr(Term a, Term b);
Term mk_eq(Term a, Term b);
Term mk_slt(Term a, Term b);
Term mk_ult(Term a, Term b);
Term mk_ite(Term c, Term a, Term b);

Term mk_ne(Term a, Term b);
Term mk_ule(Term a, Term b);
Term mk_sle(Term a, Term b);
/// Conjunction/disjunction of width-1 terms; empty conj is true.
Term mk_conj(std::span<const Term> ts);
Term mk_disj(std::span<const Term> ts);

/// Builds any non-leaf kind through the simplifying constructors.
Term mk_node(Kind k, std::span<const Term> kids, unsigned width = 0,
             unsigned hi = 0, unsigned lo = 0);

/// Interns without simplification; width rules are still checked.
Term mk_raw(Kind k, std::span<const Term> kids, unsigned width = 0,
            unsigned hi = 0, unsigned lo = 0);

/// Number of distinct nodes interned so far.
size_t term_table_size();

using Assignment = std::map<std::string, uint32_t>;
using VarSet = std::map<std::string, unsigned>; // name -> width

/// Throws UnboundVariable for variables missing from a.
uint32_t eval(Term t, const Assignment &a);
/// Variables missing from a evaluate to zero.
uint32_t eval_or_zero(Term t, const Assignment &a);

void collect_vars(Term t, VarSet &out);
VarSet free_vars(Term t);
VarSet free_vars(std::span<const Term> ts);

/// Replaces bound variables by constants and re-simplifies.
Term substitute(Term t, const Assignment &partial);

/// Predicate-DSL rendering; width-1 terms produced by the DSL parse back.
std::string pretty(Term t);
/// As pretty(), but truncated with "..." past max_len characters.
std::string pretty_short(Term t, size_t max_len = 160);

/// Lossless machine form with DAG sharing ("$k:(...)" defines, "$k" reuses).
std::string to_sexpr(Term t);
Term parse_sexpr(std::string_view text);

} // namespace duet
