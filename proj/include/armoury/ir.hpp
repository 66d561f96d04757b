#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace armoury::ir {

enum class Kind : std::uint8_t { STR, ADD, XOR, CMP, JCC, NOP, HALT };
inline constexpr int kKindCount = 7;
inline constexpr std::array<Kind, kKindCount> kAllKinds = {
    Kind::STR, Kind::ADD, Kind::XOR, Kind::CMP, Kind::JCC, Kind::NOP, Kind::HALT};
const char* kind_name(Kind k);

enum class Reg : std::uint8_t { EAX, EBX, ECX, EDX };
inline constexpr int kRegCount = 4;
const char* reg_name(Reg r);
std::optional<Reg> reg_from_name(const std::string& name);

enum class OperandType : std::uint8_t { Empty, Integer, Register };

struct Operand {
    OperandType type = OperandType::Empty;
    std::uint32_t value = 0;  // integer payload or Reg index
    int size = 0;             // bytes: 0 (empty), 1, 2, or 4

    static Operand empty() { return {}; }
    static Operand integer(std::uint32_t v, int size = 4) {
        return {OperandType::Integer, v, size};
    }
    static Operand reg(Reg r) {
        return {OperandType::Register, static_cast<std::uint32_t>(r), 4};
    }
    bool operator==(const Operand&) const = default;
};

// Operand layout by kind (destination register rides in slot 3, like the
// bytecode layout of a stored value):
//   STR  (source int|reg, empty, destination reg)     dest = source
//   ADD  (source int|reg, empty, destination reg)     dest += source
//   XOR  (source int|reg, empty, destination reg)     dest ^= source
//   CMP  (rhs int|reg,    empty, lhs reg)             zero flag = (lhs == rhs)
//   JCC  (target instruction index, empty, empty)     jump when flag set
//   NOP / HALT  (empty, empty, empty)
struct Instruction {
    Kind kind = Kind::NOP;
    std::array<Operand, 3> operands{};

    bool operator==(const Instruction&) const = default;
};

void validate_instruction(const Instruction& ins);

// Encoded form: five 32-bit words.
//   word0 = opcode byte <<24 | optype1 <<16 | optype2 <<8 | optype3
//   word1 = size1 <<16 | size2 <<8 | size3
//   word2..4 = operand payloads (registers as context offsets)
// Operand type bytes: integer 0x01; register and empty both 0x00, told apart
// by the kind's fixed signature. Unused lanes stay zero.
struct BytecodeInstr {
    std::array<std::uint32_t, 5> words{};
    bool operator==(const BytecodeInstr&) const = default;
};

inline constexpr std::size_t kContextSize = 256;

// Per-generation randomization: which byte means which opcode and where each
// register cell lives inside the 256-byte context area. Regenerable from the
// seed alone.
struct GenerationProfile {
    std::uint64_t seed = 0;
    std::array<std::uint8_t, kKindCount> opcode_of{};   // by Kind index
    std::array<std::uint8_t, kRegCount> offset_of{};    // by Reg index

    std::uint8_t opcode(Kind k) const { return opcode_of[static_cast<int>(k)]; }
    std::uint8_t offset(Reg r) const { return offset_of[static_cast<int>(r)]; }
};

// Deterministic in seed; opcode bytes pairwise distinct; register cells
// pairwise non-overlapping 4-byte windows inside the context.
GenerationProfile new_profile(std::uint64_t seed);

BytecodeInstr encode_instr(const Instruction& ins, const GenerationProfile& profile);
Instruction decode_instr(const BytecodeInstr& bc, const GenerationProfile& profile);

// Toy assembler. One instruction per line; `;` starts a comment; labels are
// `name:`; mnemonics MOV ADD XOR CMP JZ NOP HALT; MOV lowers to STR.
std::vector<Instruction> assemble(const std::string& source);

std::vector<BytecodeInstr> encode_program(const std::vector<Instruction>& program,
                                          const GenerationProfile& profile);
// Flat word stream <-> instruction view (word count must be a multiple of 5).
std::vector<std::uint32_t> flatten(const std::vector<BytecodeInstr>& program);
std::vector<BytecodeInstr> group_words(const std::vector<std::uint32_t>& words);

struct VmContext {
    std::array<std::uint8_t, kContextSize> area{};
    std::size_t pc = 0;
    bool zero_flag = false;
};

std::uint32_t read_cell(const VmContext& ctx, const GenerationProfile& profile, Reg r);

// Interprets until HALT, fall-off-the-end, or fuel exhaustion (an error).
VmContext execute(const std::vector<BytecodeInstr>& program,
                  const GenerationProfile& profile, std::uint64_t fuel);

// Text dump: five zero-padded 8-hex-digit words per line.
std::string dump_words(const std::vector<std::uint32_t>& words);
std::vector<std::uint32_t> parse_word_dump(const std::string& text);

} // namespace armoury::ir
