#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace armoury::cipher {

// One linear feedback shift register. Taps are the exponents of the feedback
// polynomial below the leading term (the constant term is position 0 and is
// always present). State convention: output is bit 0, the register shifts
// right, and the feedback bit enters at bit degree-1.
struct LfsrSpec {
    int degree = 0;
    std::uint64_t tap_mask = 0;

    static LfsrSpec from_taps(int degree, std::span<const int> taps);
    static LfsrSpec from_taps(int degree, std::initializer_list<int> taps);

    std::uint64_t state_mask() const { return (degree >= 64) ? ~0ULL : ((1ULL << degree) - 1); }
    std::vector<int> taps() const;

    bool operator==(const LfsrSpec&) const = default;
};

// Three regularly clocked registers combined by the majority function.
// key_bits == chunk_bits == sum of the degrees (59 for the standard spec).
struct CipherSpec {
    std::array<LfsrSpec, 3> registers;
    std::string id;

    int key_bits() const {
        return registers[0].degree + registers[1].degree + registers[2].degree;
    }
    int chunk_bits() const { return key_bits(); }
    std::uint64_t key_mask() const { return (1ULL << key_bits()) - 1; }
    std::uint64_t chunk_mask() const { return key_mask(); }

    // The 59-bit cipher: degrees (17, 19, 23) with the standard tap sets.
    static const CipherSpec& standard59();
    // Reduced-size spec built from a table of primitive polynomials
    // (degrees 2..23). Intended for exhaustive-search oracles.
    static CipherSpec scaled(int d1, int d2, int d3);
    // Accepts "default59", "scaled-579" (single digits), or "scaled-5.7.9".
    static CipherSpec from_name(const std::string& name);
    // Text format: one line per register, "degree:tap,tap,...".
    static CipherSpec parse_text(std::istream& in, const std::string& id);
    static CipherSpec load_file(const std::string& path);
    std::string to_text() const;

    void validate() const;

    bool same_shape(const CipherSpec& other) const { return registers == other.registers; }
};

// A key is a key_bits-wide word; register loads come from its partition
// r1 = low d1 bits, r2 = next d2 bits, r3 = top d3 bits.
struct CipherKey {
    std::uint64_t value = 0;
    auto operator<=>(const CipherKey&) const = default;
};

// One keystream output word of chunk_bits bits (the unit the packer consumes).
struct Chunk {
    std::uint64_t value = 0;
    auto operator<=>(const Chunk&) const = default;
};

inline int majority(int b1, int b2, int b3) {
    return (b1 & b2) ^ (b1 & b3) ^ (b2 & b3);
}

struct StepResult {
    std::uint64_t state;
    int out;
};

inline StepResult lfsr_step(std::uint64_t state, const LfsrSpec& spec) {
    int out = static_cast<int>(state & 1);
#if defined(__GNUC__) || defined(__clang__)
    std::uint64_t fb = static_cast<std::uint64_t>(__builtin_parityll(state & spec.tap_mask));
#else
    std::uint64_t fb = std::popcount(state & spec.tap_mask) & 1ULL;
#endif
    return {(state >> 1) | (fb << (spec.degree - 1)), out};
}

// First n output bits of a register, packed MSB-first (bit n-1 of the result
// is the first output). n <= 64.
std::uint64_t keystream_word(std::uint64_t state, const LfsrSpec& spec, int n);

std::array<std::uint64_t, 3> split_key(CipherKey key, const CipherSpec& spec);
CipherKey join_key(std::uint64_t r1, std::uint64_t r2, std::uint64_t r3, const CipherSpec& spec);

// The dFSM: load the registers from the key, clock chunk_bits times, majority
// bit per step, first output bit lands in the chunk's most significant bit.
Chunk sco(CipherKey key, const CipherSpec& spec);

// Row t (as a bit mask over the initial state) dotted mod 2 with any initial
// state equals the register's output bit at step t. Output bits are linear in
// the initial state, which is what the key-search attack exploits.
std::vector<std::uint64_t> output_linear_forms(const LfsrSpec& spec, int n);

std::array<std::uint8_t, 8> to_le_bytes(std::uint64_t value);

std::string format_hex(std::uint64_t value);  // uppercase, 0x prefix

} // namespace armoury::cipher
