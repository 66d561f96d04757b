#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace armoury::entropy {

// 1-gram Shannon entropy in bits per byte, H = sum -p_i log2 p_i.
// Range [0, 8]; 0 iff a single distinct byte, 8 iff all 256 equifrequent.
double byte_entropy(std::span<const std::uint8_t> data);

// |H(a) - H(b)| — how far two byte streams are from sharing a profile.
double transec_distance(std::span<const std::uint8_t> a,
                        std::span<const std::uint8_t> b);

struct EntropyProfile {
    std::size_t window = 0;
    std::size_t stride = 0;
    std::vector<double> values;  // one per window placement
};

EntropyProfile sliding_profile(std::span<const std::uint8_t> data,
                               std::size_t window, std::size_t stride);

} // namespace armoury::entropy
