#include "armoury/mutation.hpp"

#include <gmp.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "armoury/error.hpp"

namespace armoury::mutation {

using cipher::CipherKey;

std::vector<std::string> manifest_paths(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open pool manifest: " + manifest_path);
    std::string dir;
    if (auto slash = manifest_path.find_last_of('/'); slash != std::string::npos)
        dir = manifest_path.substr(0, slash + 1);

    std::vector<std::pair<std::size_t, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t position;
        std::string path;
        if (!(ls >> position >> path))
            throw ParseError(manifest_path + ":" + std::to_string(lineno) +
                             ": expected 'position <pool-file-path>'");
        if (!path.empty() && path[0] != '/') path = dir + path;
        entries.push_back({position, path});
    }

    std::vector<std::string> paths(entries.size());
    std::vector<bool> seen(entries.size(), false);
    for (const auto& [position, path] : entries) {
        if (position >= entries.size() || seen[position])
            throw ParseError(manifest_path + ": positions must be contiguous "
                             "from 0 and unique, got " + std::to_string(position));
        seen[position] = true;
        paths[position] = path;
    }
    return paths;
}

PoolSet load_pool_set(const std::string& manifest_path,
                      const cipher::CipherSpec& spec, bool verify) {
    PoolSet set;
    for (const auto& path : manifest_paths(manifest_path))
        set.pools.push_back(keysearch::load_pool(path, spec, verify));
    return set;
}

VariantCount count_sizes(const std::vector<std::uint64_t>& sizes) {
    if (sizes.empty()) throw Error("variant count needs at least one pool");
    mpz_t product;
    mpz_init_set_ui(product, 1);
    for (std::uint64_t n : sizes) {
        if (n == 0) {
            mpz_clear(product);
            throw Error("variant count over an empty pool");
        }
        mpz_mul_ui(product, product, n);
    }
    VariantCount out;
    char* s = mpz_get_str(nullptr, 10, product);
    out.exact_decimal = s;
    void (*freefn)(void*, std::size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefn);
    freefn(s, out.exact_decimal.size() + 1);
    long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, product);
    out.log2 = std::log2(mant) + static_cast<double>(exp2);
    mpz_clear(product);
    return out;
}

VariantCount count_variants(const PoolSet& pools) {
    std::vector<std::uint64_t> sizes;
    sizes.reserve(pools.pools.size());
    for (const auto& pool : pools.pools) {
        if (pool.keys.empty())
            throw Error("empty pool for target " +
                        cipher::format_hex(pool.target.value));
        sizes.push_back(pool.keys.size());
    }
    return count_sizes(sizes);
}

std::vector<CipherKey> sample_variant(const PoolSet& pools, std::uint64_t seed) {
    std::vector<CipherKey> keys;
    keys.reserve(pools.pools.size());
    for (std::size_t i = 0; i < pools.pools.size(); ++i) {
        const auto& pool = pools.pools[i];
        if (pool.keys.empty())
            throw Error("empty pool at position " + std::to_string(i));
        auto rand = rng::SplitMix64::substream(seed, i);
        keys.push_back(pool.keys[rand.next_below(pool.keys.size())]);
    }
    return keys;
}

packer::ProtectedBlob mutate_blob(const packer::ProtectedBlob& blob,
                                  const PoolSet& pools, std::uint64_t seed) {
    if (pools.pools.size() < blob.keys.size())
        throw Error("pools cover " + std::to_string(pools.pools.size()) +
                    " chunks, blob has " + std::to_string(blob.keys.size()) +
                    "; first uncovered chunk is " +
                    std::to_string(pools.pools.size()));
    packer::ProtectedBlob out = blob;
    for (std::size_t i = 0; i < blob.keys.size(); ++i) {
        const auto& pool = pools.pools[i];
        if (pool.spec_id != blob.spec_id)
            throw Error("pool " + std::to_string(i) + " is for spec '" +
                        pool.spec_id + "', blob uses '" + blob.spec_id + "'");
        auto rand = rng::SplitMix64::substream(seed, i);
        out.keys[i] = pool.keys[rand.next_below(pool.keys.size())].value;
    }
    return out;
}

CipherKey reservoir_pick(const std::string& pool_path,
                         const cipher::CipherSpec& spec, std::uint64_t seed) {
    std::ifstream in(pool_path);
    if (!in) throw IoError("cannot open pool file: " + pool_path);
    std::string header;
    if (!std::getline(in, header) || !header.starts_with("# spec="))
        throw ParseError(pool_path + ": missing pool header");
    std::istringstream hs(header.substr(2));
    std::string spec_field;
    hs >> spec_field;
    if (spec_field != "spec=" + spec.id)
        throw ParseError(pool_path + ": pool spec does not match '" + spec.id + "'");

    rng::SplitMix64 rand(seed);
    std::string line;
    std::uint64_t count = 0;
    std::optional<CipherKey> picked;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t y1, y2, y3;
        if (!(ls >> y1 >> y2 >> y3))
            throw ParseError(pool_path + ": expected 'y1 y2 y3'");
        ++count;
        // Keep line k with probability 1/k: uniform over the whole file.
        if (rand.next_below(count) == 0)
            picked = cipher::join_key(y1, y2, y3, spec);
    }
    if (!picked) throw ParseError(pool_path + ": pool has no keys");
    return *picked;
}

packer::ProtectedBlob mutate_blob_streamed(const packer::ProtectedBlob& blob,
                                           const std::string& manifest_path,
                                           const cipher::CipherSpec& spec,
                                           std::uint64_t seed) {
    auto paths = manifest_paths(manifest_path);
    if (paths.size() < blob.keys.size())
        throw Error("manifest covers " + std::to_string(paths.size()) +
                    " chunks, blob has " + std::to_string(blob.keys.size()) +
                    "; first uncovered chunk is " + std::to_string(paths.size()));
    if (blob.spec_id != spec.id)
        throw Error("blob is for spec '" + blob.spec_id + "', expected '" +
                    spec.id + "'");
    packer::ProtectedBlob out = blob;
    for (std::size_t i = 0; i < blob.keys.size(); ++i) {
        auto rand = rng::SplitMix64::substream(seed, i);
        out.keys[i] = reservoir_pick(paths[i], spec, rand.next()).value;
    }
    return out;
}

std::optional<CipherKey> PoolSetSource::pick(std::size_t chunk_index,
                                             cipher::Chunk target) {
    if (chunk_index >= pools_.pools.size()) return std::nullopt;
    const auto& pool = pools_.pools[chunk_index];
    if (pool.target != target || pool.keys.empty()) return std::nullopt;
    auto rand = rng::SplitMix64::substream(seed_, chunk_index);
    return pool.keys[rand.next_below(pool.keys.size())];
}

} // namespace armoury::mutation
