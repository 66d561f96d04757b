#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "armoury/cipher.hpp"

namespace armoury::keysearch {

// Linear constraint system over GF(2). Each row is a coefficient vector
// packed into a word (bit i = coefficient of unknown i) plus its RHS bit.
struct Gf2System {
    int width = 0;
    struct Row {
        std::uint64_t coeffs;
        int rhs;
    };
    std::vector<Row> rows;
};

// Solution set = particular XOR span(basis); 2^basis.size() solutions.
struct Gf2Solution {
    std::uint64_t particular = 0;
    std::vector<std::uint64_t> basis;
};

// Gaussian elimination. nullopt = inconsistent system.
std::optional<Gf2Solution> gf2_solve(const Gf2System& system);

// Every key in `keys` encodes to `target` under the cipher spec named by spec_id.
// Keys are distinct and sorted ascending so runs are reproducible.
struct KeyPool {
    cipher::Chunk target;
    std::vector<cipher::CipherKey> keys;
    std::string spec_id;
};

// Slice of the (r1, r2) guess space for data-parallel or checkpointed runs.
// Guess index g encodes r1 = g & (2^d1 - 1), r2 = g >> d1; slice i of n
// covers the i-th of n contiguous ranges of g. Slices are disjoint and the
// union over i = 0..n-1 is the full space.
struct SearchBudget {
    std::uint64_t max_guesses = ~0ULL;
    std::uint32_t slice_index = 0;
    std::uint32_t slice_total = 1;
};

// Ground-truth oracle: enumerate every key value and keep the preimages of
// target. Rejects specs wider than 26 key bits.
KeyPool brute_force_keys(cipher::Chunk target, const cipher::CipherSpec& spec);

// Divide-and-conquer: guess (r1, r2); whenever those registers agree the
// majority output is forced, so a single AND rejects most guesses; the
// disagreement steps pin R3's output bits, giving a linear system on its
// initial state. Full-space result equals brute_force_keys.
KeyPool attack_keys(cipher::Chunk target, const cipher::CipherSpec& spec,
                    const SearchBudget& budget = {});

// attack_keys with the budget's slice split further across worker threads;
// merged result is identical to the single-threaded call.
KeyPool attack_keys_parallel(cipher::Chunk target, const cipher::CipherSpec& spec,
                             const SearchBudget& budget, unsigned threads);

// Keep keys whose 8-byte serialization is within `tolerance` bits-per-byte
// of the target chunk's byte entropy.
KeyPool filter_keys_entropy(const KeyPool& pool, const cipher::CipherSpec& spec,
                            double tolerance);

// Pool files: header "# spec=<id> target=<hex>", then one key per line as
// three decimal register states "y1 y2 y3".
void save_pool(const std::string& path, const KeyPool& pool,
               const cipher::CipherSpec& spec);
KeyPool load_pool(const std::string& path, const cipher::CipherSpec& spec,
                  bool verify = true);

} // namespace armoury::keysearch
