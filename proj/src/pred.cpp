//===-- pred.cpp - Predicate DSL parser and builder ----------------------===//

#include "duet/pred.hpp"

#include "duet/error.hpp"
#include "duet/isa.hpp"

#include <cctype>
#include <vector>

namespace duet {

struct PredAst {
  enum Op { Lit, Reg, Mem, Ident, Not, Bin, Zx, Sx, Extract, Ite };
  Op op;
  size_t pos = 0;
  int side = 0; // 0 = unqualified, 1 = pre., 2 = post.
  uint32_t value = 0; // literal, register index, address
  unsigned bytes = 0; // memory access size
  unsigned a = 0, b = 0; // zx/sx width, extract hi/lo
  std::string name;   // identifier or binary operator
  std::vector<std::shared_ptr<PredAst>> kids;

  /// True when the result width is decided by context (literal arithmetic).
  bool width_free() const {
    switch (op) {
    case Lit:
      return true;
    case Ite:
      return kids[1]->width_free() && kids[2]->width_free();
    case Bin:
      if (name == "&&" || name == "||" || name == "==" || name == "!=" ||
          name[0] == '<' || (name[0] == '>' && name[1] != '>'))
        return false;
      return kids[0]->width_free() && kids[1]->width_free();
    default:
      return false;
    }
  }

  bool has_side() const {
    if (side)
      return true;
    for (const auto &k : kids)
      if (k->has_side())
        return true;
    return false;
  }
};

namespace {

using AstPtr = std::shared_ptr<PredAst>;

const char *const kReserved[] = {"zx", "sx", "extract", "ite", "pre", "post",
                                 "m8", "m32"};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::optional<unsigned> register_index(std::string_view s) {
  if (s.size() == 2 && s[0] == 'r' && s[1] >= '0' && s[1] < '0' + int(kNumRegs))
    return unsigned(s[1] - '0');
  return std::nullopt;
}

} // namespace

bool is_reserved_name(std::string_view name) {
  for (const char *r : kReserved)
    if (name == r)
      return true;
  return register_index(name).has_value();
}

namespace {

struct Token {
  enum Kind { End, Ident, Number, Sym } kind;
  std::string text;
  uint64_t value = 0;
  size_t pos = 0;
};

const char *const kSymbols[] = {
    "||", "&&", "==", "!=", "<=s", "<=u", ">=s", ">=u", ">>u", ">>s", "<<",
    "<s", "<u",  ">s", ">u", "!",  "+",   "-",   "|",   "^",   "*",   "&",
    "(",  ")",  "[",  "]",  ",",  "."};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (true) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    if (i >= s.size()) {
      out.push_back({Token::End, "", 0, i});
      return out;
    }
    size_t start = i;
    if (is_ident_start(s[i])) {
      while (i < s.size() && is_ident_char(s[i]))
        ++i;
      out.push_back({Token::Ident, std::string(s.substr(start, i - start)), 0, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      uint64_t v = 0;
      bool hex = s.size() > i + 1 && s[i] == '0' && (s[i + 1] == 'x' || s[i + 1] == 'X');
      if (hex) {
        i += 2;
        if (i >= s.size() || !std::isxdigit(static_cast<unsigned char>(s[i])))
          throw ParseError(start, "malformed hex literal");
      }
      while (i < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[i]))
                                  : std::isdigit(static_cast<unsigned char>(s[i])))) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        v = v * (hex ? 16 : 10) + unsigned(c <= '9' ? c - '0' : c - 'a' + 10);
        if (v > 0xFFFFFFFFull)
          throw ParseError(start, "literal exceeds 32 bits");
        ++i;
      }
      if (i < s.size() && is_ident_char(s[i]))
        throw ParseError(i, "unexpected character in literal");
      out.push_back({Token::Number, std::string(s.substr(start, i - start)), v, start});
      continue;
    }
    bool matched = false;
    for (const char *sym : kSymbols) {
      std::string_view sv(sym);
      if (s.substr(i, sv.size()) == sv) {
        out.push_back({Token::Sym, std::string(sv), 0, start});
        i += sv.size();
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(start, std::string("unexpected character '") + s[i] + "'");
  }
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  AstPtr parse() {
    AstPtr e = expr();
    if (peek().kind != Token::End)
      fail("unexpected '" + peek().text + "'");
    return e;
  }

private:
  const Token &peek() const { return t_[i_]; }
  const Token &take() { return t_[i_ < t_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void fail(const std::string &msg) const {
    const Token &t = peek();
    throw ParseError(t.pos, t.kind == Token::End ? msg + " at end of input" : msg);
  }

  bool accept(std::string_view sym) {
    if (peek().kind == Token::Sym && peek().text == sym) {
      take();
      return true;
    }
    return false;
  }

  void expect(std::string_view sym) {
    if (!accept(sym))
      fail("expected '" + std::string(sym) + "'");
  }

  AstPtr bin(const std::string &op, size_t pos, AstPtr l, AstPtr r) {
    auto n = std::make_shared<PredAst>();
    n->op = PredAst::Bin;
    n->name = op;
    n->pos = pos;
    n->kids = {std::move(l), std::move(r)};
    return n;
  }

  AstPtr expr() { return or_(); }

  AstPtr or_() {
    AstPtr l = and_();
    while (peek().kind == Token::Sym && peek().text == "||") {
      size_t pos = take().pos;
      l = bin("||", pos, l, and_());
    }
    return l;
  }

  AstPtr and_() {
    AstPtr l = not_();
    while (peek().kind == Token::Sym && peek().text == "&&") {
      size_t pos = take().pos;
      l = bin("&&", pos, l, not_());
    }
    return l;
  }

  AstPtr not_() {
    if (peek().kind == Token::Sym && peek().text == "!") {
      auto n = std::make_shared<PredAst>();
      n->op = PredAst::Not;
      n->pos = take().pos;
      n->kids = {not_()};
      return n;
    }
    return cmp();
  }

  AstPtr cmp() {
    static const char *const ops[] = {"==", "!=", "<s", "<=s", ">s", ">=s",
                                      "<u", "<=u", ">u", ">=u"};
    AstPtr l = sum();
    if (peek().kind == Token::Sym)
      for (const char *op : ops)
        if (peek().text == op) {
          size_t pos = take().pos;
          return bin(op, pos, l, sum());
        }
    return l;
  }

  AstPtr sum() {
    AstPtr l = term();
    while (peek().kind == Token::Sym &&
           (peek().text == "+" || peek().text == "-" || peek().text == "|" ||
            peek().text == "^")) {
      const Token &op = take();
      l = bin(op.text, op.pos, l, term());
    }
    return l;
  }

  AstPtr term() {
    AstPtr l = factor();
    while (peek().kind == Token::Sym &&
           (peek().text == "*" || peek().text == "&" || peek().text == "<<" ||
            peek().text == ">>u" || peek().text == ">>s")) {
      const Token &op = take();
      l = bin(op.text, op.pos, l, factor());
    }
    return l;
  }

  unsigned small_number(const char *what) {
    if (peek().kind != Token::Number)
      fail(std::string("expected ") + what);
    return static_cast<unsigned>(take().value);
  }

  AstPtr factor() {
    auto n = std::make_shared<PredAst>();
    const Token &tok = peek();
    n->pos = tok.pos;
    if (tok.kind == Token::Number) {
      n->op = PredAst::Lit;
      n->value = static_cast<uint32_t>(take().value);
      return n;
    }
    if (accept("(")) {
      AstPtr e = expr();
      expect(")");
      return e;
    }
    if (tok.kind != Token::Ident)
      fail(tok.kind == Token::End ? "expected operand" : "unexpected '" + tok.text + "'");

    std::string name = take().text;
    if ((name == "pre" || name == "post") && accept(".")) {
      n->side = name == "pre" ? 1 : 2;
      if (peek().kind != Token::Ident)
        fail("expected name after '" + name + ".'");
      name = take().text;
    }
    if (name == "zx" || name == "sx") {
      if (n->side)
        fail("qualifier not allowed on " + name);
      n->op = name == "zx" ? PredAst::Zx : PredAst::Sx;
      expect("(");
      n->kids = {expr()};
      expect(",");
      n->a = small_number("width");
      expect(")");
      return n;
    }
    if (name == "extract") {
      n->op = PredAst::Extract;
      expect("(");
      n->kids = {expr()};
      expect(",");
      n->a = small_number("high bit");
      expect(",");
      n->b = small_number("low bit");
      expect(")");
      return n;
    }
    if (name == "ite") {
      n->op = PredAst::Ite;
      expect("(");
      n->kids.push_back(expr());
      expect(",");
      n->kids.push_back(expr());
      expect(",");
      n->kids.push_back(expr());
      expect(")");
      return n;
    }
    if (name == "m8" || name == "m32") {
      n->op = PredAst::Mem;
      n->bytes = name == "m8" ? 1 : 4;
      expect("[");
      if (peek().kind != Token::Number)
        fail("memory address must be a literal");
      n->value = static_cast<uint32_t>(take().value);
      expect("]");
      return n;
    }
    if (auto r = register_index(name)) {
      n->op = PredAst::Reg;
      n->value = *r;
      return n;
    }
    if (name == "pre" || name == "post")
      fail("expected '.' after " + name);
    n->op = PredAst::Ident;
    n->name = name;
    return n;
  }

  std::vector<Token> t_;
  size_t i_ = 0;
};

class Builder {
public:
  explicit Builder(const PredEnv &env) : env_(env) {}

  Term build(const PredAst &n, std::optional<unsigned> hint) {
    try {
      return build_inner(n, hint);
    } catch (const WidthError &e) {
      throw ParseError(n.pos, e.what());
    }
  }

private:
  const PredEnv &env_for(const PredAst &n) {
    if (n.side == 0)
      return env_;
    const PredEnv *e = n.side == 1 ? env_.pre : env_.post;
    if (!e)
      throw ParseError(n.pos, std::string(n.side == 1 ? "pre." : "post.") +
                                  " names are only valid in pair properties");
    return *e;
  }

  Term literal(const PredAst &n, unsigned width) {
    if (n.value > width_mask(width))
      throw ParseError(n.pos, "literal " + std::to_string(n.value) +
                                  " does not fit in " + std::to_string(width) +
                                  " bits");
    return mk_const(n.value, width);
  }

  Term need_bool(const PredAst &n, Term t, const char *op) {
    if (t.width() != 1)
      throw ParseError(n.pos, std::string("width mismatch: '") + op +
                                  "' needs width-1 operands, got width " +
                                  std::to_string(t.width()));
    return t;
  }

  Term build_inner(const PredAst &n, std::optional<unsigned> hint) {
    switch (n.op) {
    case PredAst::Lit:
      return literal(n, hint.value_or(32));
    case PredAst::Reg: {
      const PredEnv &e = env_for(n);
      if (!e.reg)
        throw ParseError(n.pos, "registers are not available here");
      return e.reg(n.value);
    }
    case PredAst::Mem: {
      const PredEnv &e = env_for(n);
      if (!e.mem)
        throw ParseError(n.pos, "memory is not available here");
      return e.mem(n.value, n.bytes);
    }
    case PredAst::Ident: {
      const PredEnv &e = env_for(n);
      std::optional<Term> t = e.ident ? e.ident(n.name) : std::nullopt;
      if (!t)
        throw ParseError(n.pos, "unknown identifier '" + n.name + "'");
      return *t;
    }
    case PredAst::Not:
      return mk_not(need_bool(n, build(*n.kids[0], 1), "!"));
    case PredAst::Zx:
    case PredAst::Sx: {
      if (!valid_width(n.a))
        throw ParseError(n.pos, "unsupported width " + std::to_string(n.a));
      Term e = build(*n.kids[0], n.kids[0]->width_free() ? std::optional(n.a)
                                                         : std::nullopt);
      if (e.width() > n.a)
        throw ParseError(n.pos, "cannot extend width " + std::to_string(e.width()) +
                                    " to " + std::to_string(n.a));
      return n.op == PredAst::Zx ? mk_zext(e, n.a) : mk_sext(e, n.a);
    }
    case PredAst::Extract:
      return mk_extract(build(*n.kids[0], std::nullopt), n.a, n.b);
    case PredAst::Ite: {
      Term c = need_bool(n, build(*n.kids[0], 1), "ite");
      auto [a, b] = pair(*n.kids[1], *n.kids[2], hint);
      return mk_ite(c, a, b);
    }
    case PredAst::Bin:
      return binary(n, hint);
    }
    throw ParseError(n.pos, "internal: unknown node");
  }

  // Builds two operands so that a literal-only side adopts the other's width.
  std::pair<Term, Term> pair(const PredAst &l, const PredAst &r,
                             std::optional<unsigned> hint) {
    bool ll = l.width_free(), rl = r.width_free();
    if (ll && !rl) {
      Term b = build(r, std::nullopt);
      return {build(l, b.width()), b};
    }
    if (!ll && rl) {
      Term a = build(l, std::nullopt);
      return {a, build(r, a.width())};
    }
    if (ll && rl)
      return {build(l, hint), build(r, hint)};
    return {build(l, std::nullopt), build(r, std::nullopt)};
  }

  Term binary(const PredAst &n, std::optional<unsigned> hint) {
    const std::string &op = n.name;
    if (op == "&&" || op == "||") {
      Term a = need_bool(n, build(*n.kids[0], 1), op.c_str());
      Term b = need_bool(n, build(*n.kids[1], 1), op.c_str());
      return op == "&&" ? mk_and(a, b) : mk_or(a, b);
    }
    bool is_cmp = op == "==" || op == "!=" || op[0] == '<' || op[0] == '>';
    if (op == "<<" || op == ">>u" || op == ">>s")
      is_cmp = false;
    auto [a, b] = pair(*n.kids[0], *n.kids[1], is_cmp ? std::optional<unsigned>(32) : hint);
    if (a.width() != b.width())
      throw ParseError(n.pos, "width mismatch in '" + op + "': " +
                                  std::to_string(a.width()) + " vs " +
                                  std::to_string(b.width()) + " (use zx/sx)");
    if (op == "==") return mk_eq(a, b);
    if (op == "!=") return mk_ne(a, b);
    if (op == "<s") return mk_slt(a, b);
    if (op == "<=s") return mk_sle(a, b);
    if (op == ">s") return mk_slt(b, a);
    if (op == ">=s") return mk_sle(b, a);
    if (op == "<u") return mk_ult(a, b);
    if (op == "<=u") return mk_ule(a, b);
    if (op == ">u") return mk_ult(b, a);
    if (op == ">=u") return mk_ule(b, a);
    if (op == "+") return mk_add(a, b);
    if (op == "-") return mk_sub(a, b);
    if (op == "|") return mk_or(a, b);
    if (op == "^") return mk_xor(a, b);
    if (op == "*") return mk_mul(a, b);
    if (op == "&") return mk_and(a, b);
    if (op == "<<") return mk_shl(a, b);
    if (op == ">>u") return mk_lshr(a, b);
    if (op == ">>s") return mk_ashr(a, b);
    throw ParseError(n.pos, "unknown operator '" + op + "'");
  }

  const PredEnv &env_;
};

} // namespace

PredExpr PredExpr::parse(std::string_view text) {
  PredExpr e;
  e.text_ = std::string(text);
  e.ast_ = Parser(tokenize(text)).parse();
  return e;
}

Term PredExpr::build(const PredEnv &env, std::optional<unsigned> required_width) const {
  if (!ast_)
    throw ParseError(0, "empty expression");
  Term t = Builder(env).build(*ast_, required_width);
  if (required_width && t.width() != *required_width)
    throw ParseError(ast_->pos, "expression has width " + std::to_string(t.width()) +
                                    ", expected " + std::to_string(*required_width));
  return t;
}

bool PredExpr::uses_pair_prefix() const { return ast_ && ast_->has_side(); }

Term parse_pred(std::string_view text, const PredEnv &env) {
  return PredExpr::parse(text).build(env, 1);
}

} // namespace duet
