//===-- pred.hpp - Predicate DSL -----------------------------------------===//
//
// Conditions in harness files are written in a small infix language:
//
//   r2 >=s 0 && r2 <s 16
//   m32[0x100] == cmd
//   zx(role, 32) + 1 <u r0
//   pre.r0 == post.r0
//
// Text is parsed once into a PredExpr and then built against a PredEnv that
// knows the current registers, memory and declared inputs. Integer literals
// take the width of the operand they are combined with; mixing any other
// widths requires zx/sx/extract.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/term.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace duet {

struct PredEnv {
  /// Current 32-bit value of register i.
  std::function<Term(unsigned)> reg;
  /// Little-endian read of `bytes` (1 or 4) bytes at addr.
  std::function<Term(uint32_t addr, unsigned bytes)> mem;
  /// Declared input variable, if the name is one.
  std::function<std::optional<Term>(std::string_view)> ident;
  /// Sub-environments for pre./post. qualified names in pair predicates.
  const PredEnv *pre = nullptr;
  const PredEnv *post = nullptr;
};

struct PredAst;

class PredExpr {
public:
  PredExpr() = default;
  /// Throws ParseError on malformed text.
  static PredExpr parse(std::string_view text);

  /// Builds the term. required_width (if set) is enforced on the result and
  /// also fixes the width of a bare literal. Unknown names and width
  /// mismatches throw ParseError pointing at the offending position.
  Term build(const PredEnv &env, std::optional<unsigned> required_width = 1) const;

  const std::string &text() const { return text_; }
  bool uses_pair_prefix() const;

private:
  std::shared_ptr<const PredAst> ast_;
  std::string text_;
};

/// parse + build with a width-1 result.
Term parse_pred(std::string_view text, const PredEnv &env);

/// Names that cannot be used for input variables.
bool is_reserved_name(std::string_view name);

} // namespace duet
