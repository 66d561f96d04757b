#include "armoury/altgen.hpp"

#include <openssl/evp.h>

#include <algorithm>

#include "armoury/error.hpp"

namespace armoury::altgen {

std::uint64_t lcg_next(std::uint64_t x, const LcgParams& p) {
    if (p.a == 0) throw Error("LCG multiplier must be positive");
    if (p.n_modulus == 1) throw Error("LCG modulus must exceed 1");
    if (p.n_modulus != 0) {
        if (x >= p.n_modulus) throw Error("LCG state not reduced mod N");
        unsigned __int128 t = static_cast<unsigned __int128>(p.a) * x + p.b;
        return static_cast<std::uint64_t>(t % p.n_modulus);
    }
    return p.a * x + p.b;  // N = 2^64: natural wrap
}

std::vector<std::uint64_t> lcg_sequence(std::uint64_t x0, const LcgParams& p,
                                        std::size_t count) {
    std::vector<std::uint64_t> out;
    out.reserve(count);
    std::uint64_t x = x0;
    for (std::size_t i = 0; i < count; ++i) {
        x = lcg_next(x, p);
        out.push_back(lcg_output(x, p));
    }
    return out;
}

LcgParams lcg_preset(const std::string& name) {
    if (name == "minstd")
        return {16807, 0, (1ULL << 31) - 1, 0};
    if (name == "vax-marsaglia")
        return {16645, 0, 1ULL << 32, 0};
    if (name == "lavaux-jenssens")
        return {31167285, 0, 1ULL << 48, 0};
    if (name == "haynes")
        return {6364136223846793005ULL, 0, 0, 0};
    if (name == "knuth-borland")
        return {22695477, 1, 1ULL << 32, 16};
    throw ParseError("unknown LCG preset: " + name);
}

std::vector<std::string> lcg_preset_names() {
    return {"minstd", "vax-marsaglia", "lavaux-jenssens", "haynes",
            "knuth-borland"};
}

namespace {

// toy (64,32): FNV-1a over the 8 input bytes, top half of the state kept,
// big-endian. Small enough to iterate by hand next to a test.
std::vector<std::uint8_t> toy_digest(std::span<const std::uint8_t> msg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : msg) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    std::uint32_t top = static_cast<std::uint32_t>(h >> 32);
    return {static_cast<std::uint8_t>(top >> 24), static_cast<std::uint8_t>(top >> 16),
            static_cast<std::uint8_t>(top >> 8), static_cast<std::uint8_t>(top)};
}

std::vector<std::uint8_t> sha256_digest(std::span<const std::uint8_t> msg) {
    std::vector<std::uint8_t> out(EVP_MAX_MD_SIZE);
    unsigned len = 0;
    if (!EVP_Digest(msg.data(), msg.size(), out.data(), &len, EVP_sha256(), nullptr))
        throw Error("SHA-256 digest failed");
    out.resize(len);
    return out;
}

} // namespace

HashFn hash_by_id(const std::string& id) {
    if (id == "toy") return {"toy", 64, 32, toy_digest};
    if (id == "sha256") return {"sha256", 512, 256, sha256_digest};
    throw ParseError("unknown hash id: " + id);
}

HashChain::HashChain(const HashChainSpec& spec, std::span<const std::uint8_t> d0)
    : fn_(hash_by_id(spec.hash_id)), padding_(spec.padding_seed) {
    if (fn_.n_bits >= fn_.m_bits) throw Error("hash must compress: n < m");
    if (spec.iv.size() != static_cast<std::size_t>(fn_.m_bits / 8))
        throw Error("IV must be exactly " + std::to_string(fn_.m_bits / 8) +
                    " bytes for " + fn_.id);
    if (d0.empty()) {
        // IV is already a full m-bit message; hash it as-is.
        state_ = fn_.digest(spec.iv);
    } else {
        state_ = apply(d0);
    }
}

std::vector<std::uint8_t> HashChain::apply(std::span<const std::uint8_t> data) {
    std::size_t m_bytes = fn_.m_bits / 8;
    if (data.size() > m_bytes - 1)
        throw Error("data block too long for " + fn_.id + " input width");
    // data || random padding || size-of-data (one byte)
    std::vector<std::uint8_t> msg(data.begin(), data.end());
    msg.resize(m_bytes - 1);
    for (std::size_t i = data.size(); i < m_bytes - 1; ++i)
        msg[i] = static_cast<std::uint8_t>(padding_.next_below(256));
    msg.push_back(static_cast<std::uint8_t>(data.size()));
    return fn_.digest(msg);
}

std::vector<std::uint8_t> HashChain::next() {
    if (!primed_) {
        primed_ = true;
        return state_;
    }
    std::uint64_t iterations =
        std::min<std::uint64_t>(state_.size(), kMaxChainIterations);
    for (std::uint64_t i = 0; i < iterations; ++i) state_ = apply(state_);
    return state_;
}

} // namespace armoury::altgen
