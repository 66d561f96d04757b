#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "armoury/rng.hpp"

namespace armoury::altgen {

// x_{i+1} = (a*x_i + b) mod N. n_modulus == 0 is the 2^64 sentinel (the
// natural word wrap). post_shift applies to emitted outputs, never to state.
struct LcgParams {
    std::uint64_t a = 1;
    std::uint64_t b = 0;
    std::uint64_t n_modulus = 0;
    int post_shift = 0;
};

std::uint64_t lcg_next(std::uint64_t x, const LcgParams& p);
inline std::uint64_t lcg_output(std::uint64_t state, const LcgParams& p) {
    return state >> p.post_shift;
}
// Outputs of `count` steps from x0 (states advance first, then emit).
std::vector<std::uint64_t> lcg_sequence(std::uint64_t x0, const LcgParams& p,
                                        std::size_t count);

// Presets: minstd, vax-marsaglia, lavaux-jenssens, haynes, knuth-borland.
// vax-marsaglia's multiplier is 16645 here, as printed in the source the
// toolkit reproduces; the textbook constant is 69069 (see README).
LcgParams lcg_preset(const std::string& name);
std::vector<std::string> lcg_preset_names();

// A (m,n) hash: n-bit digest from an m-bit message, n < m. Messages shorter
// than m/8 bytes are laid out as  data || random padding || size-of-data
// with the size in the final byte and padding drawn from a seeded stream.
struct HashFn {
    std::string id;
    int m_bits = 0;
    int n_bits = 0;
    std::vector<std::uint8_t> (*digest)(std::span<const std::uint8_t>) = nullptr;
};

// "toy" (64, 32): a byte-fold hand-checkable in tests; "sha256" (512, 256).
HashFn hash_by_id(const std::string& id);

struct HashChainSpec {
    std::string hash_id = "sha256";
    std::vector<std::uint8_t> iv;  // exactly m/8 bytes
    std::uint64_t padding_seed = 0;
};

// S/key-style chain: e0 = H(IV) (or H(d0) when a data block is supplied),
// e_{i+1} = H^|e_i|(e_i) where |.| is the byte length used as an iteration
// count (clamped to kMaxChainIterations).
inline constexpr std::uint64_t kMaxChainIterations = 1'000'000;

class HashChain {
public:
    HashChain(const HashChainSpec& spec, std::span<const std::uint8_t> d0 = {});
    // Next n-bit value, as n/8 bytes.
    std::vector<std::uint8_t> next();
    const HashFn& hash() const { return fn_; }

private:
    std::vector<std::uint8_t> apply(std::span<const std::uint8_t> data);

    HashFn fn_;
    rng::SplitMix64 padding_;
    std::vector<std::uint8_t> state_;
    bool primed_ = false;
};

} // namespace armoury::altgen
