#include "armoury/entropy.hpp"

#include <array>
#include <cmath>

#include "armoury/error.hpp"

namespace armoury::entropy {

double byte_entropy(std::span<const std::uint8_t> data) {
    if (data.empty()) throw Error("entropy of empty data is undefined");
    std::array<std::size_t, 256> counts{};
    for (std::uint8_t b : data) ++counts[b];
    double h = 0.0;
    double len = static_cast<double>(data.size());
    for (std::size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / len;
        h -= p * std::log2(p);
    }
    return h;
}

double transec_distance(std::span<const std::uint8_t> a,
                        std::span<const std::uint8_t> b) {
    return std::abs(byte_entropy(a) - byte_entropy(b));
}

EntropyProfile sliding_profile(std::span<const std::uint8_t> data,
                               std::size_t window, std::size_t stride) {
    if (window < 1 || stride < 1) throw Error("window and stride must be >= 1");
    if (data.size() < window) throw Error("window larger than data");
    EntropyProfile profile{window, stride, {}};
    profile.values.reserve((data.size() - window) / stride + 1);
    for (std::size_t off = 0; off + window <= data.size(); off += stride)
        profile.values.push_back(byte_entropy(data.subspan(off, window)));
    return profile;
}

} // namespace armoury::entropy
