#include "armoury/ir.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "armoury/error.hpp"
#include "armoury/rng.hpp"

namespace armoury::ir {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::STR:  return "STR";
        case Kind::ADD:  return "ADD";
        case Kind::XOR:  return "XOR";
        case Kind::CMP:  return "CMP";
        case Kind::JCC:  return "JCC";
        case Kind::NOP:  return "NOP";
        case Kind::HALT: return "HALT";
    }
    return "?";
}

const char* reg_name(Reg r) {
    switch (r) {
        case Reg::EAX: return "EAX";
        case Reg::EBX: return "EBX";
        case Reg::ECX: return "ECX";
        case Reg::EDX: return "EDX";
    }
    return "?";
}

std::optional<Reg> reg_from_name(const std::string& name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (up == "EAX") return Reg::EAX;
    if (up == "EBX") return Reg::EBX;
    if (up == "ECX") return Reg::ECX;
    if (up == "EDX") return Reg::EDX;
    return std::nullopt;
}

namespace {

// Allowed operand shapes per kind. Value slots may hold an integer or a
// register; the other slots are pinned.
enum class Slot { None, Value, RegOnly, IntOnly };

struct Signature {
    Slot s1, s2, s3;
};

Signature signature_of(Kind k) {
    switch (k) {
        case Kind::STR:
        case Kind::ADD:
        case Kind::XOR:
        case Kind::CMP:  return {Slot::Value, Slot::None, Slot::RegOnly};
        case Kind::JCC:  return {Slot::IntOnly, Slot::None, Slot::None};
        case Kind::NOP:
        case Kind::HALT: return {Slot::None, Slot::None, Slot::None};
    }
    throw Error("bad instruction kind");
}

void check_operand(const Operand& op, Slot slot, Kind kind, int index) {
    auto fail = [&](const char* what) {
        std::ostringstream msg;
        msg << kind_name(kind) << " operand " << index << ": " << what;
        throw ParseError(msg.str());
    };
    switch (slot) {
        case Slot::None:
            if (op.type != OperandType::Empty || op.value != 0 || op.size != 0)
                fail("must be empty");
            break;
        case Slot::Value:
            if (op.type == OperandType::Empty) fail("missing value");
            break;
        case Slot::RegOnly:
            if (op.type != OperandType::Register) fail("must be a register");
            break;
        case Slot::IntOnly:
            if (op.type != OperandType::Integer) fail("must be an integer");
            break;
    }
    if (op.type == OperandType::Integer &&
        op.size != 1 && op.size != 2 && op.size != 4)
        fail("integer size must be 1, 2 or 4");
    if (op.type == OperandType::Register) {
        if (op.size != 4) fail("register operands are 4 bytes");
        if (op.value >= kRegCount) fail("no such register");
    }
}

} // namespace

void validate_instruction(const Instruction& ins) {
    auto sig = signature_of(ins.kind);
    check_operand(ins.operands[0], sig.s1, ins.kind, 1);
    check_operand(ins.operands[1], sig.s2, ins.kind, 2);
    check_operand(ins.operands[2], sig.s3, ins.kind, 3);
}

GenerationProfile new_profile(std::uint64_t seed) {
    GenerationProfile p;
    p.seed = seed;
    rng::SplitMix64 rand(seed);
    for (int i = 0; i < kKindCount; ++i) {
        for (;;) {
            std::uint8_t b = static_cast<std::uint8_t>(rand.next_below(256));
            bool taken = false;
            for (int j = 0; j < i; ++j) taken |= (p.opcode_of[j] == b);
            if (!taken) { p.opcode_of[i] = b; break; }
        }
    }
    // 4-byte cells must not overlap or the VM's register semantics break.
    for (int i = 0; i < kRegCount; ++i) {
        for (;;) {
            std::uint8_t off =
                static_cast<std::uint8_t>(rand.next_below(kContextSize - 3));
            bool clash = false;
            for (int j = 0; j < i; ++j)
                clash |= (off < p.offset_of[j] + 4 && p.offset_of[j] < off + 4);
            if (!clash) { p.offset_of[i] = off; break; }
        }
    }
    return p;
}

BytecodeInstr encode_instr(const Instruction& ins, const GenerationProfile& profile) {
    validate_instruction(ins);
    BytecodeInstr bc;
    std::uint32_t optypes = 0;
    std::uint32_t sizes = 0;
    for (int i = 0; i < 3; ++i) {
        const Operand& op = ins.operands[i];
        std::uint32_t type_byte = (op.type == OperandType::Integer) ? 0x01 : 0x00;
        optypes |= type_byte << (8 * (2 - i));
        sizes |= static_cast<std::uint32_t>(op.size) << (8 * (2 - i));
        bc.words[2 + i] = (op.type == OperandType::Register)
                              ? profile.offset(static_cast<Reg>(op.value))
                              : op.value;
    }
    bc.words[0] = (static_cast<std::uint32_t>(profile.opcode(ins.kind)) << 24) | optypes;
    bc.words[1] = sizes;
    return bc;
}

Instruction decode_instr(const BytecodeInstr& bc, const GenerationProfile& profile) {
    std::uint8_t opcode = static_cast<std::uint8_t>(bc.words[0] >> 24);
    std::optional<Kind> kind;
    for (Kind k : kAllKinds)
        if (profile.opcode(k) == opcode) { kind = k; break; }
    if (!kind)
        throw UnknownOpcodeError("opcode byte " + std::to_string(opcode) +
                                 " not in profile");
    if (bc.words[1] >> 24)
        throw ParseError("size word has nonzero top byte");

    auto sig = signature_of(*kind);
    Instruction ins;
    ins.kind = *kind;
    std::array<Slot, 3> slots = {sig.s1, sig.s2, sig.s3};
    for (int i = 0; i < 3; ++i) {
        std::uint32_t type_byte = bc.words[0] >> (8 * (2 - i)) & 0xFF;
        std::uint32_t size = bc.words[1] >> (8 * (2 - i)) & 0xFF;
        std::uint32_t value = bc.words[2 + i];
        Operand& op = ins.operands[i];
        if (type_byte > 0x01)
            throw ParseError("bad operand type byte");
        bool is_int = (type_byte == 0x01);
        bool is_empty = !is_int && (slots[i] == Slot::None);
        if (is_empty) {
            op = Operand::empty();
            if (value != 0 || size != 0)
                throw ParseError("nonzero payload in unused operand lane");
        } else if (is_int) {
            op = Operand::integer(value, static_cast<int>(size));
        } else {
            // type byte 0x00 in a value slot: a register, named by offset.
            std::optional<Reg> r;
            for (int j = 0; j < kRegCount; ++j)
                if (profile.offset_of[j] == value) r = static_cast<Reg>(j);
            if (!r || size != 4)
                throw UnknownOpcodeError(
                    "register offset " + std::to_string(value) + " not in profile");
            op = Operand::reg(*r);
        }
    }
    validate_instruction(ins);
    return ins;
}

namespace {

struct AsmLine {
    std::size_t lineno;
    std::string mnemonic;
    std::vector<std::string> args;
    std::string pending_label;  // argument to resolve in pass 2 (JZ)
};

[[noreturn]] void asm_fail(std::size_t lineno, const std::string& what) {
    throw ParseError("line " + std::to_string(lineno) + ": " + what);
}

std::uint32_t parse_number(const std::string& tok, std::size_t lineno) {
    int base = 10;
    std::string_view body = tok;
    if (body.starts_with("0x") || body.starts_with("0X")) {
        base = 16;
        body.remove_prefix(2);
    }
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v, base);
    if (ec != std::errc{} || p != body.data() + body.size() || body.empty())
        asm_fail(lineno, "bad number '" + tok + "'");
    return v;
}

Operand parse_value_operand(const std::string& tok, std::size_t lineno) {
    if (auto r = reg_from_name(tok)) return Operand::reg(*r);
    if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0]))))
        return Operand::integer(parse_number(tok, lineno));
    asm_fail(lineno, "expected register or number, got '" + tok + "'");
}

bool is_ident(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

} // namespace

std::vector<Instruction> assemble(const std::string& source) {
    std::istringstream in(source);
    std::string raw;
    std::size_t lineno = 0;
    std::map<std::string, std::uint32_t> labels;
    std::vector<std::pair<AsmLine, std::size_t>> pending;  // line, program index
    std::vector<Instruction> program;

    while (std::getline(in, raw)) {
        ++lineno;
        if (auto semi = raw.find(';'); semi != std::string::npos) raw.resize(semi);
        std::istringstream ls(raw);
        std::string tok;
        if (!(ls >> tok)) continue;

        while (tok.back() == ':') {
            std::string label = tok.substr(0, tok.size() - 1);
            if (!is_ident(label)) asm_fail(lineno, "bad label '" + label + "'");
            if (labels.count(label)) asm_fail(lineno, "duplicate label '" + label + "'");
            labels[label] = static_cast<std::uint32_t>(program.size());
            if (!(ls >> tok)) { tok.clear(); break; }
        }
        if (tok.empty()) continue;

        std::string mnem = tok;
        std::transform(mnem.begin(), mnem.end(), mnem.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        std::string rest;
        std::getline(ls, rest);
        std::vector<std::string> args;
        std::istringstream as(rest);
        std::string arg;
        while (std::getline(as, arg, ',')) {
            auto b = arg.find_first_not_of(" \t");
            auto e = arg.find_last_not_of(" \t");
            if (b == std::string::npos) asm_fail(lineno, "empty operand");
            args.push_back(arg.substr(b, e - b + 1));
        }

        auto need = [&](std::size_t n) {
            if (args.size() != n)
                asm_fail(lineno, mnem + " takes " + std::to_string(n) +
                                     " operand(s), got " + std::to_string(args.size()));
        };
        auto dst_reg = [&](const std::string& t) {
            auto r = reg_from_name(t);
            if (!r) asm_fail(lineno, "expected register, got '" + t + "'");
            return Operand::reg(*r);
        };

        Instruction ins;
        if (mnem == "MOV" || mnem == "ADD" || mnem == "XOR" || mnem == "CMP") {
            need(2);
            ins.kind = (mnem == "MOV")   ? Kind::STR
                       : (mnem == "ADD") ? Kind::ADD
                       : (mnem == "XOR") ? Kind::XOR
                                         : Kind::CMP;
            ins.operands = {parse_value_operand(args[1], lineno), Operand::empty(),
                            dst_reg(args[0])};
            program.push_back(ins);
        } else if (mnem == "JZ") {
            need(1);
            ins.kind = Kind::JCC;
            if (std::isdigit(static_cast<unsigned char>(args[0][0]))) {
                ins.operands[0] = Operand::integer(parse_number(args[0], lineno));
                program.push_back(ins);
            } else {
                if (!is_ident(args[0])) asm_fail(lineno, "bad label '" + args[0] + "'");
                ins.operands[0] = Operand::integer(0);
                program.push_back(ins);
                pending.push_back({{lineno, mnem, args, args[0]}, program.size() - 1});
            }
        } else if (mnem == "NOP" || mnem == "HALT") {
            need(0);
            ins.kind = (mnem == "NOP") ? Kind::NOP : Kind::HALT;
            program.push_back(ins);
        } else {
            asm_fail(lineno, "unknown mnemonic '" + mnem + "'");
        }
    }

    for (const auto& [line, index] : pending) {
        auto it = labels.find(line.pending_label);
        if (it == labels.end())
            asm_fail(line.lineno, "undefined label '" + line.pending_label + "'");
        program[index].operands[0] = Operand::integer(it->second);
    }
    for (const auto& ins : program) validate_instruction(ins);
    return program;
}

std::vector<BytecodeInstr> encode_program(const std::vector<Instruction>& program,
                                          const GenerationProfile& profile) {
    std::vector<BytecodeInstr> out;
    out.reserve(program.size());
    for (const auto& ins : program) out.push_back(encode_instr(ins, profile));
    return out;
}

std::vector<std::uint32_t> flatten(const std::vector<BytecodeInstr>& program) {
    std::vector<std::uint32_t> words;
    words.reserve(program.size() * 5);
    for (const auto& bc : program)
        words.insert(words.end(), bc.words.begin(), bc.words.end());
    return words;
}

std::vector<BytecodeInstr> group_words(const std::vector<std::uint32_t>& words) {
    if (words.size() % 5 != 0)
        throw ParseError("bytecode stream length must be a multiple of 5 words");
    std::vector<BytecodeInstr> out(words.size() / 5);
    for (std::size_t i = 0; i < out.size(); ++i)
        std::copy_n(words.begin() + 5 * i, 5, out[i].words.begin());
    return out;
}

std::uint32_t read_cell(const VmContext& ctx, const GenerationProfile& profile, Reg r) {
    std::size_t off = profile.offset(r);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | ctx.area[off + i];
    return v;
}

namespace {

void write_cell_bytes(VmContext& ctx, std::size_t off, std::uint32_t v, int nbytes) {
    if (off + nbytes > kContextSize) throw VmError("context write out of bounds");
    for (int i = 0; i < nbytes; ++i)
        ctx.area[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t source_value(const VmContext& ctx, const GenerationProfile& profile,
                           const Operand& op) {
    return op.type == OperandType::Register
               ? read_cell(ctx, profile, static_cast<Reg>(op.value))
               : op.value;
}

} // namespace

VmContext execute(const std::vector<BytecodeInstr>& program,
                  const GenerationProfile& profile, std::uint64_t fuel) {
    VmContext ctx;
    while (ctx.pc < program.size()) {
        if (fuel == 0) throw VmError("fuel exhausted");
        --fuel;
        Instruction ins = decode_instr(program[ctx.pc], profile);
        const Operand& src = ins.operands[0];
        switch (ins.kind) {
            case Kind::STR: {
                Reg dst = static_cast<Reg>(ins.operands[2].value);
                write_cell_bytes(ctx, profile.offset(dst),
                                 source_value(ctx, profile, src), src.size);
                break;
            }
            case Kind::ADD:
            case Kind::XOR: {
                Reg dst = static_cast<Reg>(ins.operands[2].value);
                std::uint32_t lhs = read_cell(ctx, profile, dst);
                std::uint32_t rhs = source_value(ctx, profile, src);
                std::uint32_t res = (ins.kind == Kind::ADD) ? lhs + rhs : lhs ^ rhs;
                write_cell_bytes(ctx, profile.offset(dst), res, 4);
                break;
            }
            case Kind::CMP: {
                Reg lhs = static_cast<Reg>(ins.operands[2].value);
                ctx.zero_flag =
                    (read_cell(ctx, profile, lhs) == source_value(ctx, profile, src));
                break;
            }
            case Kind::JCC:
                if (ctx.zero_flag) {
                    std::uint32_t target = src.value;
                    if (target > program.size())
                        throw VmError("jump target " + std::to_string(target) +
                                      " out of range");
                    ctx.pc = target;
                    continue;
                }
                break;
            case Kind::NOP:
                break;
            case Kind::HALT:
                ++ctx.pc;
                return ctx;
        }
        ++ctx.pc;
    }
    return ctx;
}

std::string dump_words(const std::vector<std::uint32_t>& words) {
    if (words.size() % 5 != 0)
        throw ParseError("bytecode stream length must be a multiple of 5 words");
    std::ostringstream out;
    char buf[9];
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%08X", words[i]);
        out << buf << (i % 5 == 4 ? "\n" : " ");
    }
    return out.str();
}

std::vector<std::uint32_t> parse_word_dump(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::uint32_t> words;
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        std::string_view body = tok;
        if (body.starts_with("0x") || body.starts_with("0X")) body.remove_prefix(2);
        std::uint32_t v = 0;
        auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v, 16);
        if (ec != std::errc{} || p != body.data() + body.size())
            throw ParseError("bad bytecode word '" + tok + "'");
        words.push_back(v);
    }
    return words;
}

} // namespace armoury::ir
