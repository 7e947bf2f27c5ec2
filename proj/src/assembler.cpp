//===-- assembler.cpp - Two-pass assembler for the compact ISA -----------===//

#include "duet/error.hpp"
#include "duet/isa.hpp"

#include <cctype>
#include <limits>

namespace duet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
      return false;
  return true;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty())
    return out;
  size_t start = 0;
  int depth = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '[')
      ++depth;
    if (i < s.size() && s[i] == ']')
      --depth;
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

struct Line {
  unsigned number;
  std::string_view text; // instruction text, label/comment stripped
};

class Assembler {
public:
  explicit Assembler(std::string_view src) : src_(src) {}

  Program run() {
    collect();
    for (const auto &[name, idx] : prog_.labels)
      if (idx >= lines_.size())
        throw AsmError(1, "label '" + name + "' does not precede an instruction");
    for (const Line &l : lines_)
      prog_.code.push_back(encode_line(l, static_cast<uint32_t>(prog_.code.size())));
    if (prog_.code.empty())
      throw AsmError(1, "program has no instructions");
    if (entry_label_) {
      auto it = prog_.labels.find(entry_label_->second);
      if (it == prog_.labels.end())
        throw AsmError(entry_label_->first,
                       "undefined label '" + entry_label_->second + "'");
      prog_.entry = it->second;
    }
    return std::move(prog_);
  }

private:
  void collect() {
    unsigned number = 0;
    size_t pos = 0;
    while (pos <= src_.size()) {
      size_t nl = src_.find('\n', pos);
      if (nl == std::string_view::npos)
        nl = src_.size();
      std::string_view raw = src_.substr(pos, nl - pos);
      pos = nl + 1;
      ++number;
      if (size_t c = raw.find(';'); c != std::string_view::npos)
        raw = raw.substr(0, c);
      std::string_view text = trim(raw);
      while (true) {
        size_t colon = text.find(':');
        if (colon == std::string_view::npos)
          break;
        std::string_view label = trim(text.substr(0, colon));
        if (!is_ident(label))
          throw AsmError(number, "invalid label '" + std::string(label) + "'");
        if (!prog_.labels.emplace(std::string(label), lines_.size()).second)
          throw AsmError(number, "duplicate label '" + std::string(label) + "'");
        text = trim(text.substr(colon + 1));
      }
      if (text.empty())
        continue;
      if (text[0] == '.') {
        directive(number, text);
        continue;
      }
      lines_.push_back({number, text});
    }
  }

  void directive(unsigned line, std::string_view text) {
    size_t sp = text.find_first_of(" \t");
    std::string_view name = text.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? "" : trim(text.substr(sp));
    if (name == ".entry") {
      if (!is_ident(rest))
        throw AsmError(line, ".entry expects a label");
      entry_label_ = {line, std::string(rest)};
    } else if (name == ".data") {
      prog_.data_base = static_cast<uint32_t>(imm(line, rest, 0, 0xFFFFFFFFll));
    } else if (name == ".byte") {
      for (std::string_view b : split_operands(rest))
        prog_.data.push_back(static_cast<uint8_t>(imm(line, b, -128, 255)));
    } else {
      throw AsmError(line, "unknown directive '" + std::string(name) + "'");
    }
  }

  static int64_t imm(unsigned line, std::string_view s, int64_t lo, int64_t hi) {
    s = trim(s);
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s.remove_prefix(1);
    }
    if (s.empty())
      throw AsmError(line, "expected an immediate");
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    }
    int64_t v = 0;
    for (char c : s) {
      int d;
      if (c >= '0' && c <= '9')
        d = c - '0';
      else if (base == 16 && std::isxdigit(static_cast<unsigned char>(c)))
        d = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      else
        throw AsmError(line, "malformed immediate '" + std::string(s) + "'");
      v = v * base + d;
      if (v > (int64_t(1) << 33))
        throw AsmError(line, "immediate out of range");
    }
    if (neg)
      v = -v;
    if (v < lo || v > hi)
      throw AsmError(line, "immediate out of range: " + std::to_string(v));
    return v;
  }

  // Accepts signed 32-bit values and unsigned 32-bit bit patterns.
  static int32_t imm32(unsigned line, std::string_view s) {
    int64_t v = imm(line, s, std::numeric_limits<int32_t>::min(), 0xFFFFFFFFll);
    return static_cast<int32_t>(static_cast<uint32_t>(v));
  }

  static uint8_t regnum(unsigned line, std::string_view s) {
    s = trim(s);
    if (s.size() == 2 && s[0] == 'r' && s[1] >= '0' && s[1] < '0' + int(kNumRegs))
      return static_cast<uint8_t>(s[1] - '0');
    throw AsmError(line, "expected register r0-r7, got '" + std::string(s) + "'");
  }

  int32_t target(unsigned line, std::string_view s, uint32_t pc) const {
    s = trim(s);
    if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+'))
      return imm32(line, s);
    if (!is_ident(s))
      throw AsmError(line, "expected a label or offset, got '" + std::string(s) + "'");
    auto it = prog_.labels.find(std::string(s));
    if (it == prog_.labels.end())
      throw AsmError(line, "undefined label '" + std::string(s) + "'");
    return static_cast<int32_t>(int64_t(it->second) - int64_t(pc));
  }

  // "[rs+imm]", "[rs-imm]" or "[rs]".
  static void memref(unsigned line, std::string_view s, Instruction &ins) {
    s = trim(s);
    if (s.size() < 4 || s.front() != '[' || s.back() != ']')
      throw AsmError(line, "expected memory operand [rN+imm]");
    s = trim(s.substr(1, s.size() - 2));
    size_t op = s.find_first_of("+-");
    ins.rs = regnum(line, s.substr(0, op));
    if (op != std::string_view::npos) {
      std::string_view off = trim(s.substr(op + 1));
      int32_t v = imm32(line, off);
      ins.imm = s[op] == '-' ? -v : v;
    }
  }

  Instruction encode_line(const Line &l, uint32_t pc) const {
    std::string_view text = l.text;
    size_t sp = text.find_first_of(" \t");
    std::string_view name = text.substr(0, sp);
    std::vector<std::string_view> ops =
        split_operands(sp == std::string_view::npos ? "" : text.substr(sp));
    auto op = opcode_from_mnemonic(name);
    if (!op)
      throw AsmError(l.number, "unknown mnemonic '" + std::string(name) + "'");
    auto want = [&](size_t n) {
      if (ops.size() != n)
        throw AsmError(l.number, std::string(name) + " expects " +
                                     std::to_string(n) + " operand(s)");
    };
    Instruction ins;
    ins.op = *op;
    switch (*op) {
    case Opcode::Halt:
    case Opcode::Ret:
      want(0);
      break;
    case Opcode::Const:
      want(2);
      ins.rd = regnum(l.number, ops[0]);
      ins.imm = imm32(l.number, ops[1]);
      break;
    case Opcode::Mov:
      want(2);
      ins.rd = regnum(l.number, ops[0]);
      ins.rs = regnum(l.number, ops[1]);
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Shl:
    case Opcode::Shrl:
    case Opcode::Shra:
    case Opcode::Cmpeq:
    case Opcode::Cmplts:
    case Opcode::Cmpltu:
      want(3);
      ins.rd = regnum(l.number, ops[0]);
      ins.rs = regnum(l.number, ops[1]);
      ins.rt = regnum(l.number, ops[2]);
      break;
    case Opcode::Addi:
      want(3);
      ins.rd = regnum(l.number, ops[0]);
      ins.rs = regnum(l.number, ops[1]);
      ins.imm = imm32(l.number, ops[2]);
      break;
    case Opcode::Beqz:
    case Opcode::Bnez:
      want(2);
      ins.rs = regnum(l.number, ops[0]);
      ins.imm = target(l.number, ops[1], pc);
      break;
    case Opcode::Jmp:
    case Opcode::Call:
      want(1);
      ins.imm = target(l.number, ops[0], pc);
      break;
    case Opcode::Load:
      want(2);
      ins.rd = regnum(l.number, ops[0]);
      memref(l.number, ops[1], ins);
      break;
    case Opcode::Store:
      want(2);
      memref(l.number, ops[0], ins);
      ins.rt = regnum(l.number, ops[1]);
      break;
    case Opcode::Out:
      want(2);
      ins.imm = static_cast<int32_t>(imm(l.number, ops[0], 0, 255));
      ins.rs = regnum(l.number, ops[1]);
      break;
    case Opcode::In:
      want(2);
      ins.rd = regnum(l.number, ops[0]);
      ins.imm = static_cast<int32_t>(imm(l.number, ops[1], 0, 255));
      break;
    }
    return ins;
  }

  std::string_view src_;
  std::vector<Line> lines_;
  Program prog_;
  std::optional<std::pair<unsigned, std::string>> entry_label_;
};

} // namespace

Program assemble(std::string_view source) { return Assembler(source).run(); }

} // namespace duet
