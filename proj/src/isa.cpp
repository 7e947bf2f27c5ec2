//===-- isa.cpp - Instruction tables, disassembly, CZB1 codec ------------===//

#include "duet/isa.hpp"

#include "duet/error.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace duet {

namespace {

constexpr std::array<const char *, kMaxOpcode + 1> kMnemonics = {
    "halt",  "const",  "mov",    "add",  "sub",  "mul",   "and",
    "or",    "xor",    "shl",    "shrl", "shra", "addi",  "cmpeq",
    "cmplts", "cmpltu", "beqz",  "bnez", "jmp",  "load",  "store",
    "call",  "ret",    "out",    "in"};

constexpr char kMagic[4] = {'C', 'Z', 'B', '1'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderSize = 4 + 1 + 4 + 4 + 4 + 4;
constexpr size_t kInsSize = 8;

void put_u32(std::vector<uint8_t> &out, uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(std::span<const uint8_t> b, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(b[off + i]) << (8 * i);
  return v;
}

std::string reg(unsigned r) { return "r" + std::to_string(r); }

} // namespace

bool is_valid_opcode(uint8_t raw) { return raw <= kMaxOpcode; }

const char *mnemonic(Opcode op) {
  return kMnemonics[static_cast<uint8_t>(op)];
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
  for (size_t i = 0; i < kMnemonics.size(); ++i)
    if (name == kMnemonics[i])
      return static_cast<Opcode>(i);
  return std::nullopt;
}

bool ends_block(Opcode op) {
  switch (op) {
  case Opcode::Halt:
  case Opcode::Beqz:
  case Opcode::Bnez:
  case Opcode::Jmp:
  case Opcode::Call:
  case Opcode::Ret:
    return true;
  default:
    return false;
  }
}

bool has_relative_target(Opcode op) {
  return op == Opcode::Beqz || op == Opcode::Bnez || op == Opcode::Jmp ||
         op == Opcode::Call;
}

std::optional<uint32_t> Program::target_of(uint32_t pc) const {
  if (pc >= code.size() || !has_relative_target(code[pc].op))
    return std::nullopt;
  int64_t t = static_cast<int64_t>(pc) + code[pc].imm;
  if (t < 0 || t >= static_cast<int64_t>(code.size()))
    return std::nullopt;
  return static_cast<uint32_t>(t);
}

std::optional<uint32_t> Program::resolve(std::string_view location) const {
  auto parse_num = [](std::string_view s) -> std::optional<int64_t> {
    if (s.empty())
      return std::nullopt;
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
      else if (base == 16 && c >= 'a' && c <= 'f')
        d = c - 'a' + 10;
      else if (base == 16 && c >= 'A' && c <= 'F')
        d = c - 'A' + 10;
      else
        return std::nullopt;
      v = v * base + d;
      if (v > 0xFFFFFFFFll)
        return std::nullopt;
    }
    return v;
  };

  if (auto n = parse_num(location)) {
    if (*n < static_cast<int64_t>(code.size()))
      return static_cast<uint32_t>(*n);
    return std::nullopt;
  }
  size_t op = location.find_first_of("+-");
  std::string_view name = location.substr(0, op);
  int64_t offset = 0;
  if (op != std::string_view::npos) {
    auto n = parse_num(location.substr(op + 1));
    if (!n)
      return std::nullopt;
    offset = location[op] == '-' ? -*n : *n;
  }
  auto it = labels.find(std::string(name));
  if (it == labels.end())
    return std::nullopt;
  int64_t t = static_cast<int64_t>(it->second) + offset;
  if (t < 0 || t >= static_cast<int64_t>(code.size()))
    return std::nullopt;
  return static_cast<uint32_t>(t);
}

std::string disassemble(const Instruction &ins) {
  std::string m = mnemonic(ins.op);
  std::string imm = std::to_string(ins.imm);
  switch (ins.op) {
  case Opcode::Halt:
  case Opcode::Ret:
    return m;
  case Opcode::Const:
    return m + " " + reg(ins.rd) + ", " + imm;
  case Opcode::Mov:
    return m + " " + reg(ins.rd) + ", " + reg(ins.rs);
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
    return m + " " + reg(ins.rd) + ", " + reg(ins.rs) + ", " + reg(ins.rt);
  case Opcode::Addi:
    return m + " " + reg(ins.rd) + ", " + reg(ins.rs) + ", " + imm;
  case Opcode::Beqz:
  case Opcode::Bnez:
    return m + " " + reg(ins.rs) + ", " + imm;
  case Opcode::Jmp:
  case Opcode::Call:
    return m + " " + imm;
  case Opcode::Load: {
    std::string off = ins.imm < 0 ? imm : "+" + imm;
    return m + " " + reg(ins.rd) + ", [" + reg(ins.rs) + off + "]";
  }
  case Opcode::Store: {
    std::string off = ins.imm < 0 ? imm : "+" + imm;
    return m + " [" + reg(ins.rs) + off + "], " + reg(ins.rt);
  }
  case Opcode::Out:
    return m + " " + imm + ", " + reg(ins.rs);
  case Opcode::In:
    return m + " " + reg(ins.rd) + ", " + imm;
  }
  return m;
}

std::string disassemble(const Program &p) {
  std::multimap<uint32_t, std::string> by_index;
  for (const auto &[name, idx] : p.labels)
    by_index.emplace(idx, name);
  std::ostringstream os;
  if (!p.data.empty()) {
    os << ".data " << p.data_base << "\n.byte";
    for (size_t i = 0; i < p.data.size(); ++i)
      os << (i ? ", " : " ") << unsigned(p.data[i]);
    os << "\n";
  }
  bool entry_labelled = false;
  for (auto [it, end] = by_index.equal_range(p.entry); it != end; ++it) {
    os << ".entry " << it->second << "\n";
    entry_labelled = true;
    break;
  }
  if (!entry_labelled && p.entry != 0) {
    os << ".entry __entry\n";
  }
  for (uint32_t i = 0; i < p.code.size(); ++i) {
    for (auto [it, end] = by_index.equal_range(i); it != end; ++it)
      os << it->second << ":\n";
    if (!entry_labelled && p.entry != 0 && i == p.entry)
      os << "__entry:\n";
    os << "  " << disassemble(p.code[i]) << "\n";
  }
  return os.str();
}

std::vector<uint8_t> encode(const Program &p) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + p.code.size() * kInsSize + p.data.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  put_u32(out, p.entry);
  put_u32(out, static_cast<uint32_t>(p.code.size()));
  put_u32(out, p.data_base);
  put_u32(out, static_cast<uint32_t>(p.data.size()));
  for (const Instruction &ins : p.code) {
    out.push_back(static_cast<uint8_t>(ins.op));
    out.push_back(ins.rd);
    out.push_back(ins.rs);
    out.push_back(ins.rt);
    put_u32(out, static_cast<uint32_t>(ins.imm));
  }
  out.insert(out.end(), p.data.begin(), p.data.end());
  return out;
}

Program decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DecodeError("bad magic");
  if (bytes.size() < kHeaderSize)
    throw DecodeError("truncated container header");
  if (bytes[4] != kVersion)
    throw DecodeError("unsupported version " + std::to_string(bytes[4]));
  Program p;
  p.entry = get_u32(bytes, 5);
  uint32_t count = get_u32(bytes, 9);
  p.data_base = get_u32(bytes, 13);
  uint32_t data_len = get_u32(bytes, 17);
  if (count == 0)
    throw DecodeError("code_count is zero");
  uint64_t need = kHeaderSize + uint64_t(count) * kInsSize + data_len;
  if (bytes.size() < need)
    throw DecodeError("truncated container: need " + std::to_string(need) +
                      " bytes, have " + std::to_string(bytes.size()));
  if (bytes.size() > need)
    throw DecodeError("trailing bytes after data section");
  if (p.entry >= count)
    throw DecodeError("entry out of range");
  p.code.reserve(count);
  size_t off = kHeaderSize;
  for (uint32_t i = 0; i < count; ++i, off += kInsSize) {
    uint8_t raw = bytes[off];
    if (!is_valid_opcode(raw))
      throw DecodeError("unknown opcode 0x" +
                        [&] {
                          std::ostringstream os;
                          os << std::hex << unsigned(raw);
                          return os.str();
                        }() +
                        " at instruction " + std::to_string(i));
    Instruction ins;
    ins.op = static_cast<Opcode>(raw);
    ins.rd = bytes[off + 1];
    ins.rs = bytes[off + 2];
    ins.rt = bytes[off + 3];
    if (ins.rd >= kNumRegs || ins.rs >= kNumRegs || ins.rt >= kNumRegs)
      throw DecodeError("register index out of range at instruction " +
                        std::to_string(i));
    ins.imm = static_cast<int32_t>(get_u32(bytes, off + 4));
    p.code.push_back(ins);
  }
  p.data.assign(bytes.begin() + off, bytes.begin() + off + data_len);
  return p;
}

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool ends_with(const std::string &s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

Program load_program_file(const std::string &path) {
  std::string text = read_file(path);
  if (ends_with(path, ".s") || ends_with(path, ".asm"))
    return assemble(text);
  Program p = decode(std::span(reinterpret_cast<const uint8_t *>(text.data()),
                               text.size()));
  std::ifstream sym(path + ".sym");
  std::string name;
  uint32_t idx;
  while (sym >> name >> idx) {
    if (idx < p.code.size())
      p.labels[name] = idx;
  }
  return p;
}

void save_program_file(const std::string &path, const Program &p) {
  std::vector<uint8_t> bytes = encode(p);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!p.labels.empty()) {
    std::ofstream sym(path + ".sym");
    for (const auto &[name, idx] : p.labels)
      sym << name << " " << idx << "\n";
  }
}

} // namespace duet
