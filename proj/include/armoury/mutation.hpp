#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "armoury/keysearch.hpp"
#include "armoury/packer.hpp"
#include "armoury/rng.hpp"

namespace armoury::mutation {

// One key pool per chunk position, positions contiguous from 0.
struct PoolSet {
    std::vector<keysearch::KeyPool> pools;
};

// Manifest: one line per chunk, "position <pool-file-path>". Relative paths
// resolve against the manifest's directory.
PoolSet load_pool_set(const std::string& manifest_path,
                      const cipher::CipherSpec& spec, bool verify = true);
// Pool file paths in position order, without loading any pool.
std::vector<std::string> manifest_paths(const std::string& manifest_path);

struct VariantCount {
    std::string exact_decimal;  // product of pool sizes, arbitrary precision
    double log2 = 0.0;
};

VariantCount count_variants(const PoolSet& pools);
// Same arithmetic from bare pool sizes (no pools on hand).
VariantCount count_sizes(const std::vector<std::uint64_t>& sizes);

// Uniform independent choice per pool; pool i draws from substream (seed, i),
// so the choice at one position never perturbs the others.
std::vector<cipher::CipherKey> sample_variant(const PoolSet& pools,
                                              std::uint64_t seed);

// Fresh blob, same reveal: every key resampled from its chunk's pool.
packer::ProtectedBlob mutate_blob(const packer::ProtectedBlob& blob,
                                  const PoolSet& pools, std::uint64_t seed);

// One uniformly chosen key from a pool file in a single pass (reservoir),
// for pools too large to load.
cipher::CipherKey reservoir_pick(const std::string& pool_path,
                                 const cipher::CipherSpec& spec,
                                 std::uint64_t seed);

// mutate_blob without ever holding a pool in memory: each chunk's key is
// reservoir-sampled straight from its pool file.
packer::ProtectedBlob mutate_blob_streamed(const packer::ProtectedBlob& blob,
                                           const std::string& manifest_path,
                                           const cipher::CipherSpec& spec,
                                           std::uint64_t seed);

// packer::KeySource view over a PoolSet: chunk i must be covered by pool i
// with a matching target.
class PoolSetSource : public packer::KeySource {
public:
    PoolSetSource(const PoolSet& pools, std::uint64_t seed)
        : pools_(pools), seed_(seed) {}
    std::optional<cipher::CipherKey> pick(std::size_t chunk_index,
                                          cipher::Chunk target) override;

private:
    const PoolSet& pools_;
    std::uint64_t seed_;
};

} // namespace armoury::mutation
