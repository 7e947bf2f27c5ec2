//===-- isa.hpp - Compact 32-bit ISA and CZB1 container ------------------===//
//
// Eight 32-bit registers, word-addressed code (one Instruction per slot),
// byte-addressed little-endian data memory. Branch and call immediates are
// relative to the address of the branching instruction itself.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duet {

inline constexpr unsigned kNumRegs = 8;

enum class Opcode : uint8_t {
  Halt = 0x00,
  Const = 0x01,
  Mov = 0x02,
  Add = 0x03,
  Sub = 0x04,
  Mul = 0x05,
  And = 0x06,
  Or = 0x07,
  Xor = 0x08,
  Shl = 0x09,
  Shrl = 0x0A,
  Shra = 0x0B,
  Addi = 0x0C,
  Cmpeq = 0x0D,
  Cmplts = 0x0E,
  Cmpltu = 0x0F,
  Beqz = 0x10,
  Bnez = 0x11,
  Jmp = 0x12,
  Load = 0x13,
  Store = 0x14,
  Call = 0x15,
  Ret = 0x16,
  Out = 0x17,
  In = 0x18,
};

inline constexpr uint8_t kMaxOpcode = 0x18;

bool is_valid_opcode(uint8_t raw);
const char *mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);

/// True for instructions that end a basic block.
bool ends_block(Opcode op);
/// True for instructions whose imm is a relative code offset.
bool has_relative_target(Opcode op);

struct Instruction {
  Opcode op = Opcode::Halt;
  uint8_t rd = 0;
  uint8_t rs = 0;
  uint8_t rt = 0;
  int32_t imm = 0;

  bool operator==(const Instruction &) const = default;
};

struct Program {
  uint32_t entry = 0;
  std::vector<Instruction> code;
  uint32_t data_base = 0;
  std::vector<uint8_t> data;
  std::map<std::string, uint32_t> labels;

  /// Equality ignoring label names, which the container does not store.
  bool same_image(const Program &other) const {
    return entry == other.entry && code == other.code &&
           data_base == other.data_base && data == other.data;
  }

  /// Absolute target of the relative branch/call at pc, if it is in range.
  std::optional<uint32_t> target_of(uint32_t pc) const;

  /// Resolves "label", "label+N", "label-N" or a plain instruction index.
  std::optional<uint32_t> resolve(std::string_view location) const;
};

/// Lower-case assembly text, e.g. "add r0, r1, r2" or "beqz r1, -3".
std::string disassemble(const Instruction &ins);

/// Re-assemblable listing of the whole program.
std::string disassemble(const Program &p);

std::vector<uint8_t> encode(const Program &p);
Program decode(std::span<const uint8_t> bytes);

Program assemble(std::string_view source);

/// Loads a CZB1 file, or assembles it when the extension is ".s"/".asm".
/// A "<file>.sym" sidecar written by the assembler CLI restores labels.
Program load_program_file(const std::string &path);
void save_program_file(const std::string &path, const Program &p);

} // namespace duet
