#include "armoury/keysearch.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "armoury/entropy.hpp"
#include "armoury/error.hpp"

namespace armoury::keysearch {

using cipher::Chunk;
using cipher::CipherKey;
using cipher::CipherSpec;

std::optional<Gf2Solution> gf2_solve(const Gf2System& system) {
    if (system.width < 0 || system.width > 63)
        throw Error("GF(2) system width out of range");
    // Reduced row echelon over the packed rows: after settling, a pivot
    // column's bit is set in exactly one stored row.
    std::vector<std::optional<Gf2System::Row>> pivots(system.width);
    for (auto row : system.rows) {
        for (int c = 0; c < system.width; ++c)
            if ((row.coeffs >> c & 1) && pivots[c]) {
                row.coeffs ^= pivots[c]->coeffs;
                row.rhs ^= pivots[c]->rhs;
            }
        if (row.coeffs == 0) {
            if (row.rhs) return std::nullopt;  // 0 = 1 contradiction
            continue;
        }
        int c = std::countr_zero(row.coeffs);
        for (auto& p : pivots)
            if (p && (p->coeffs >> c & 1)) {
                p->coeffs ^= row.coeffs;
                p->rhs ^= row.rhs;
            }
        pivots[c] = row;
    }
    Gf2Solution sol;
    for (int c = 0; c < system.width; ++c)
        if (pivots[c] && pivots[c]->rhs) sol.particular |= 1ULL << c;
    for (int f = 0; f < system.width; ++f) {
        if (pivots[f]) continue;
        std::uint64_t v = 1ULL << f;
        for (int c = 0; c < system.width; ++c)
            if (pivots[c] && (pivots[c]->coeffs >> f & 1)) v |= 1ULL << c;
        sol.basis.push_back(v);
    }
    return sol;
}

namespace {

std::vector<std::uint64_t> keystream_table(const cipher::LfsrSpec& reg, int n) {
    std::vector<std::uint64_t> table(std::size_t{1} << reg.degree);
    for (std::uint64_t s = 0; s < table.size(); ++s)
        table[s] = cipher::keystream_word(s, reg, n);
    return table;
}

} // namespace

KeyPool brute_force_keys(Chunk target, const CipherSpec& spec) {
    if (spec.key_bits() > 26)
        throw Error("brute force limited to 26 key bits, spec has " +
                    std::to_string(spec.key_bits()));
    int n = spec.chunk_bits();
    int d1 = spec.registers[0].degree;
    int d2 = spec.registers[1].degree;
    auto k1 = keystream_table(spec.registers[0], n);
    auto k2 = keystream_table(spec.registers[1], n);
    auto k3 = keystream_table(spec.registers[2], n);

    KeyPool pool{target, {}, spec.id};
    for (std::uint64_t r3 = 0; r3 < k3.size(); ++r3) {
        for (std::uint64_t r2 = 0; r2 < k2.size(); ++r2) {
            // majority(a,b,c) = (a & (b^c)) | (b & c): when R2 and R3 agree
            // they fix the bit, otherwise R1 decides.
            std::uint64_t sel = k2[r2] ^ k3[r3];
            std::uint64_t fixed = k2[r2] & k3[r3];
            std::uint64_t high = (r2 << d1) | (r3 << (d1 + d2));
            for (std::uint64_t r1 = 0; r1 < k1.size(); ++r1)
                if (((k1[r1] & sel) | fixed) == target.value)
                    pool.keys.push_back(CipherKey{high | r1});
        }
    }
    std::sort(pool.keys.begin(), pool.keys.end());
    return pool;
}

namespace {

struct GuessRange {
    std::uint64_t lo, hi;
};

GuessRange slice_range(const CipherSpec& spec, const SearchBudget& budget) {
    if (budget.slice_total == 0 || budget.slice_index >= budget.slice_total)
        throw Error("invalid search slice");
    std::uint64_t space = 1ULL
        << (spec.registers[0].degree + spec.registers[1].degree);
    auto bound = [&](std::uint64_t i) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(space) * i) / budget.slice_total);
    };
    GuessRange r{bound(budget.slice_index), bound(budget.slice_index + 1)};
    if (r.hi - r.lo > budget.max_guesses) r.hi = r.lo + budget.max_guesses;
    return r;
}

// Core scan over guesses g in [lo, hi): one AND rejects inconsistent
// (r1, r2) pairs, survivors get a GF(2) solve for r3.
void attack_range(Chunk target, const CipherSpec& spec,
                  const std::vector<std::uint64_t>& k1,
                  const std::vector<std::uint64_t>& k2,
                  const std::vector<std::uint64_t>& rows3,
                  GuessRange range, std::vector<CipherKey>& out) {
    int n = spec.chunk_bits();
    int d1 = spec.registers[0].degree;
    int d3 = spec.registers[2].degree;
    std::uint64_t r1_mask = spec.registers[0].state_mask();

    std::vector<std::uint64_t> a1(k1.size());
    for (std::size_t i = 0; i < k1.size(); ++i) a1[i] = k1[i] ^ target.value;

    Gf2System system;
    system.width = d3;
    std::uint64_t verify_sel, verify_fixed;

    for (std::uint64_t g = range.lo; g < range.hi;) {
        std::uint64_t r2 = g >> d1;
        std::uint64_t r1 = g & r1_mask;
        std::uint64_t row_end =
            std::min<std::uint64_t>(range.hi - (g - r1), k1.size());
        std::uint64_t c2 = k2[r2] ^ target.value;
        for (; r1 < row_end; ++r1, ++g) {
            if (a1[r1] & c2) continue;  // some step forces a wrong bit
            std::uint64_t disagree = a1[r1] ^ c2;
            system.rows.clear();
            for (std::uint64_t d = disagree; d; d &= d - 1) {
                int b = std::countr_zero(d);
                system.rows.push_back(
                    {rows3[n - 1 - b], static_cast<int>(target.value >> b & 1)});
            }
            auto sol = gf2_solve(system);
            if (!sol) continue;
            verify_sel = k1[r1] ^ k2[r2];
            verify_fixed = k1[r1] & k2[r2];
            std::uint64_t count = 1ULL << sol->basis.size();
            for (std::uint64_t m = 0; m < count; ++m) {
                std::uint64_t r3 = sol->particular;
                for (std::size_t i = 0; i < sol->basis.size(); ++i)
                    if (m >> i & 1) r3 ^= sol->basis[i];
                std::uint64_t o3 = cipher::keystream_word(r3, spec.registers[2], n);
                if (((o3 & verify_sel) | verify_fixed) != target.value)
                    throw Error("internal: solved r3 fails re-encoding");
                out.push_back(cipher::join_key(r1, r2, r3, spec));
            }
        }
    }
}

} // namespace

KeyPool attack_keys(Chunk target, const CipherSpec& spec, const SearchBudget& budget) {
    return attack_keys_parallel(target, spec, budget, 1);
}

KeyPool attack_keys_parallel(Chunk target, const CipherSpec& spec,
                             const SearchBudget& budget, unsigned threads) {
    int n = spec.chunk_bits();
    GuessRange range = slice_range(spec, budget);
    auto k1 = keystream_table(spec.registers[0], n);
    auto k2 = keystream_table(spec.registers[1], n);
    auto rows3 = cipher::output_linear_forms(spec.registers[2], n);

    KeyPool pool{target, {}, spec.id};
    std::uint64_t span = range.hi - range.lo;
    if (threads <= 1 || span < 2 * threads) {
        attack_range(target, spec, k1, k2, rows3, range, pool.keys);
    } else {
        std::vector<std::vector<CipherKey>> partial(threads);
        std::vector<std::thread> workers;
        for (unsigned i = 0; i < threads; ++i) {
            GuessRange sub{range.lo + span * i / threads,
                           range.lo + span * (i + 1) / threads};
            workers.emplace_back([&, i, sub] {
                attack_range(target, spec, k1, k2, rows3, sub, partial[i]);
            });
        }
        for (auto& w : workers) w.join();
        for (auto& p : partial)
            pool.keys.insert(pool.keys.end(), p.begin(), p.end());
    }
    std::sort(pool.keys.begin(), pool.keys.end());
    return pool;
}

KeyPool filter_keys_entropy(const KeyPool& pool, const CipherSpec& spec,
                            double tolerance) {
    if (tolerance < 0) throw Error("entropy tolerance must be >= 0");
    auto target_bytes = cipher::to_le_bytes(pool.target.value);
    double target_h = entropy::byte_entropy(target_bytes);
    KeyPool out{pool.target, {}, pool.spec_id};
    (void)spec;
    for (auto key : pool.keys) {
        auto kb = cipher::to_le_bytes(key.value);
        if (std::abs(entropy::byte_entropy(kb) - target_h) <= tolerance)
            out.keys.push_back(key);
    }
    return out;
}

void save_pool(const std::string& path, const KeyPool& pool,
               const CipherSpec& spec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write pool file: " + path);
    out << "# spec=" << pool.spec_id << " target="
        << cipher::format_hex(pool.target.value) << "\n";
    for (auto key : pool.keys) {
        auto [y1, y2, y3] = cipher::split_key(key, spec);
        out << y1 << " " << y2 << " " << y3 << "\n";
    }
    if (!out.flush()) throw IoError("short write on pool file: " + path);
}

KeyPool load_pool(const std::string& path, const CipherSpec& spec, bool verify) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pool file: " + path);
    std::string header;
    if (!std::getline(in, header) || !header.starts_with("# spec="))
        throw ParseError(path + ": missing '# spec=<id> target=<hex>' header");
    std::istringstream hs(header.substr(2));
    std::string spec_field, target_field;
    hs >> spec_field >> target_field;
    if (!target_field.starts_with("target="))
        throw ParseError(path + ": header missing target=");
    std::string spec_id = spec_field.substr(std::string("spec=").size());
    if (spec_id != spec.id)
        throw ParseError(path + ": pool is for spec '" + spec_id +
                         "', expected '" + spec.id + "'");
    std::string hex = target_field.substr(std::string("target=").size());
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex = hex.substr(2);
    std::uint64_t target = 0;
    auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), target, 16);
    if (ec != std::errc{} || p != hex.data() + hex.size())
        throw ParseError(path + ": bad target value '" + hex + "'");

    KeyPool pool{Chunk{target}, {}, spec_id};
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t y1, y2, y3;
        if (!(ls >> y1 >> y2 >> y3))
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 'y1 y2 y3'");
        if (y1 > spec.registers[0].state_mask() ||
            y2 > spec.registers[1].state_mask() ||
            y3 > spec.registers[2].state_mask())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": register state exceeds its degree");
        auto key = cipher::join_key(y1, y2, y3, spec);
        if (verify && cipher::sco(key, spec).value != target)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": key does not encode to pool target");
        pool.keys.push_back(key);
    }
    std::sort(pool.keys.begin(), pool.keys.end());
    pool.keys.erase(std::unique(pool.keys.begin(), pool.keys.end()),
                    pool.keys.end());
    if (pool.keys.empty())
        throw ParseError(path + ": pool has no keys");
    return pool;
}

} // namespace armoury::keysearch
