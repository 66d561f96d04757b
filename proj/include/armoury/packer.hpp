#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "armoury/cipher.hpp"
#include "armoury/rng.hpp"

namespace armoury::packer {

// Five 32-bit bytecode words — one encoded instruction.
struct WordGroup {
    std::array<std::uint32_t, 5> x{};
    bool operator==(const WordGroup&) const = default;
};

enum class Mode : std::uint8_t { Concat = 0x01, Direct = 0x02 };

// The protected form of a program: nothing but key values. Chunks are never
// stored; they exist only on the oracle side of a reveal. The profile seed
// is a commitment for the consumer and travels out of band (never written
// into blob files).
struct ProtectedBlob {
    Mode mode = Mode::Concat;
    std::string spec_id;
    std::vector<std::uint64_t> keys;
    std::optional<std::uint64_t> profile_seed;
};

// Concatenated packing: 160 bits of instruction squeezed into 42+59+59.
// M1 keeps its top 17 bits zero — that padding doubles as an integrity check.
std::array<cipher::Chunk, 3> pack_concat(const WordGroup& g);
WordGroup unpack_concat(cipher::Chunk m1, cipher::Chunk m2, cipher::Chunk m3);

// Direct packing: the word in the low 32 bits, seeded noise above it.
// chunk_bits comes from the cipher spec (must be >= 32).
cipher::Chunk pack_direct(std::uint32_t x, int chunk_bits, rng::SplitMix64& noise);
std::uint32_t unpack_direct(cipher::Chunk m);

// Where protect gets its keys: given a chunk (and its position in the
// program), return some key that encodes to it, or nullopt when uncovered.
class KeySource {
public:
    virtual ~KeySource() = default;
    virtual std::optional<cipher::CipherKey> pick(std::size_t chunk_index,
                                                  cipher::Chunk target) = 0;
};

// Searches the full guess space on demand. Only viable on scaled specs;
// in direct mode callers retry with fresh noise until a chunk has keys.
class LiveSearchSource : public KeySource {
public:
    LiveSearchSource(const cipher::CipherSpec& spec, std::uint64_t seed);
    std::optional<cipher::CipherKey> pick(std::size_t chunk_index,
                                          cipher::Chunk target) override;

private:
    const cipher::CipherSpec& spec_;
    rng::SplitMix64 rand_;
};

ProtectedBlob protect_program(const std::vector<std::uint32_t>& words, Mode mode,
                              const cipher::CipherSpec& spec, KeySource& keys,
                              std::uint64_t noise_seed);

using DecodeFn = std::function<cipher::Chunk(cipher::CipherKey)>;

std::vector<std::uint32_t> reveal_program(const ProtectedBlob& blob,
                                          const DecodeFn& decode);

// Blob file: "ARMR1" magic, mode byte, spec-id (1-byte length + bytes),
// big-endian 32-bit key count, keys as 8-byte little-endian words.
void save_blob(const std::string& path, const ProtectedBlob& blob);
ProtectedBlob load_blob(const std::string& path);
std::vector<std::uint8_t> blob_bytes(const ProtectedBlob& blob);

} // namespace armoury::packer
