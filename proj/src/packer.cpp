#include "armoury/packer.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "armoury/error.hpp"
#include "armoury/keysearch.hpp"

namespace armoury::packer {

using cipher::Chunk;
using cipher::CipherKey;

namespace {

constexpr std::uint64_t kChunk59Mask = (1ULL << 59) - 1;
constexpr std::uint64_t kM1PadMask = ((1ULL << 17) - 1) << 42;

void check_chunk59(Chunk m, const char* which) {
    if (m.value & ~kChunk59Mask)
        throw ParseError(std::string(which) + " exceeds 59 bits");
}

} // namespace

std::array<Chunk, 3> pack_concat(const WordGroup& g) {
    std::uint64_t x1 = g.x[0], x2 = g.x[1], x3 = g.x[2], x4 = g.x[3], x5 = g.x[4];
    Chunk m1{(x1 << 10) | (x2 >> 22)};
    Chunk m2{((x2 & 0x3FFFFF) << 37) | (x3 << 5) | (x4 >> 27)};
    Chunk m3{((x4 & 0x7FFFFFF) << 32) | x5};
    return {m1, m2, m3};
}

WordGroup unpack_concat(Chunk m1, Chunk m2, Chunk m3) {
    check_chunk59(m1, "M1");
    check_chunk59(m2, "M2");
    check_chunk59(m3, "M3");
    if (m1.value & kM1PadMask)
        throw ParseError("M1 padding bits 58..42 are nonzero (corrupt chunk)");
    WordGroup g;
    g.x[0] = static_cast<std::uint32_t>(m1.value >> 10);
    g.x[1] = static_cast<std::uint32_t>((m2.value >> 37) | (m1.value << 22));
    g.x[2] = static_cast<std::uint32_t>(m2.value >> 5);
    g.x[3] = static_cast<std::uint32_t>((m3.value >> 32) | (m2.value << 27));
    g.x[4] = static_cast<std::uint32_t>(m3.value);
    return g;
}

Chunk pack_direct(std::uint32_t x, int chunk_bits, rng::SplitMix64& noise) {
    if (chunk_bits < 32 || chunk_bits > 63)
        throw Error("direct packing needs a chunk width in [32, 63]");
    int noise_bits = chunk_bits - 32;
    std::uint64_t high =
        noise_bits ? noise.next_below(1ULL << noise_bits) : 0;
    return Chunk{(high << 32) | x};
}

std::uint32_t unpack_direct(Chunk m) {
    return static_cast<std::uint32_t>(m.value & 0xFFFFFFFF);
}

LiveSearchSource::LiveSearchSource(const cipher::CipherSpec& spec, std::uint64_t seed)
    : spec_(spec), rand_(seed) {
    if (spec.key_bits() > 40)
        throw Error("live key search is for scaled specs; "
                    "full-size protection requires precomputed pools");
}

std::optional<CipherKey> LiveSearchSource::pick(std::size_t, Chunk target) {
    auto pool = keysearch::attack_keys(target, spec_);
    if (pool.keys.empty()) return std::nullopt;
    return pool.keys[rand_.next_below(pool.keys.size())];
}

ProtectedBlob protect_program(const std::vector<std::uint32_t>& words, Mode mode,
                              const cipher::CipherSpec& spec, KeySource& keys,
                              std::uint64_t noise_seed) {
    ProtectedBlob blob;
    blob.mode = mode;
    blob.spec_id = spec.id;

    auto take = [&](std::size_t index, Chunk m) {
        auto key = keys.pick(index, m);
        if (!key)
            throw Error("no key available for chunk " + std::to_string(index) +
                        " (value " + cipher::format_hex(m.value) + ")");
        blob.keys.push_back(key->value);
    };

    if (mode == Mode::Concat) {
        if (spec.chunk_bits() != 59)
            throw Error("concat packing is defined for 59-bit chunks only");
        if (words.size() % 5 != 0)
            throw Error("concat mode needs a multiple of 5 words, got " +
                        std::to_string(words.size()));
        for (std::size_t g = 0; g * 5 < words.size(); ++g) {
            WordGroup group;
            std::copy_n(words.begin() + 5 * g, 5, group.x.begin());
            auto ms = pack_concat(group);
            for (int j = 0; j < 3; ++j) take(3 * g + j, ms[j]);
        }
    } else {
        rng::SplitMix64 noise(noise_seed);
        for (std::size_t i = 0; i < words.size(); ++i) {
            // A noisy chunk may have no preimage; redraw the noise until the
            // key source covers it (live search redraws; fixed pools get one
            // deterministic draw per retry, so pools must be built from the
            // same noise seed).
            std::optional<CipherKey> key;
            Chunk m{0};
            for (int tries = 0; tries < 64 && !key; ++tries) {
                m = pack_direct(words[i], spec.chunk_bits(), noise);
                key = keys.pick(i, m);
            }
            if (!key)
                throw Error("no key found for word " + std::to_string(i) +
                            " after 64 noise draws");
            blob.keys.push_back(key->value);
        }
    }
    return blob;
}

std::vector<std::uint32_t> reveal_program(const ProtectedBlob& blob,
                                          const DecodeFn& decode) {
    std::vector<std::uint32_t> words;
    if (blob.mode == Mode::Concat) {
        if (blob.keys.size() % 3 != 0)
            throw ParseError("concat blob key count must be a multiple of 3");
        for (std::size_t g = 0; g * 3 < blob.keys.size(); ++g) {
            Chunk m1 = decode(CipherKey{blob.keys[3 * g]});
            Chunk m2 = decode(CipherKey{blob.keys[3 * g + 1]});
            Chunk m3 = decode(CipherKey{blob.keys[3 * g + 2]});
            auto group = unpack_concat(m1, m2, m3);
            words.insert(words.end(), group.x.begin(), group.x.end());
        }
    } else {
        for (std::uint64_t k : blob.keys)
            words.push_back(unpack_direct(decode(CipherKey{k})));
    }
    return words;
}

std::vector<std::uint8_t> blob_bytes(const ProtectedBlob& blob) {
    if (blob.spec_id.empty() || blob.spec_id.size() > 255)
        throw Error("blob spec id must be 1..255 bytes");
    std::vector<std::uint8_t> out;
    out.reserve(12 + blob.spec_id.size() + 8 * blob.keys.size());
    for (char c : {'A', 'R', 'M', 'R', '1'}) out.push_back(c);
    out.push_back(static_cast<std::uint8_t>(blob.mode));
    out.push_back(static_cast<std::uint8_t>(blob.spec_id.size()));
    out.insert(out.end(), blob.spec_id.begin(), blob.spec_id.end());
    std::uint32_t count = static_cast<std::uint32_t>(blob.keys.size());
    for (int i = 3; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>(count >> (8 * i)));
    for (std::uint64_t k : blob.keys) {
        auto b = cipher::to_le_bytes(k);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

void save_blob(const std::string& path, const ProtectedBlob& blob) {
    auto bytes = blob_bytes(blob);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write blob: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw IoError("short write on blob: " + path);
}

ProtectedBlob load_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open blob: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (bytes.size() - pos < n) throw ParseError(path + ": truncated blob");
    };
    need(7);
    if (!std::equal(bytes.begin(), bytes.begin() + 5, "ARMR1"))
        throw ParseError(path + ": bad magic");
    pos = 5;
    std::uint8_t mode_byte = bytes[pos++];
    if (mode_byte != 0x01 && mode_byte != 0x02)
        throw ParseError(path + ": unknown mode byte");
    ProtectedBlob blob;
    blob.mode = static_cast<Mode>(mode_byte);
    std::uint8_t id_len = bytes[pos++];
    if (id_len == 0) throw ParseError(path + ": empty spec id");
    need(id_len + 4);
    blob.spec_id.assign(bytes.begin() + pos, bytes.begin() + pos + id_len);
    pos += id_len;
    std::uint32_t count = 0;
    for (int i = 0; i < 4; ++i) count = (count << 8) | bytes[pos++];
    need(std::size_t{count} * 8);
    blob.keys.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint64_t k = 0;
        for (int b = 7; b >= 0; --b) k = (k << 8) | bytes[pos + b];
        pos += 8;
        blob.keys.push_back(k);
    }
    if (pos != bytes.size())
        throw ParseError(path + ": trailing bytes after key list");
    return blob;
}

} // namespace armoury::packer
