#include "armoury/cipher.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "armoury/error.hpp"

namespace armoury::cipher {

LfsrSpec LfsrSpec::from_taps(int degree, std::span<const int> taps) {
    if (degree < 1 || degree > 63)
        throw ParseError("LFSR degree must be in [1, 63], got " + std::to_string(degree));
    if (taps.empty())
        throw ParseError("LFSR tap set must be nonempty");
    std::uint64_t mask = 0;
    for (int t : taps) {
        if (t < 0 || t >= degree)
            throw ParseError("tap position " + std::to_string(t) +
                             " outside [0, " + std::to_string(degree - 1) + "]");
        mask |= 1ULL << t;
    }
    if (!(mask & 1))
        throw ParseError("tap set must include position 0 (constant term)");
    return LfsrSpec{degree, mask};
}

LfsrSpec LfsrSpec::from_taps(int degree, std::initializer_list<int> taps) {
    return from_taps(degree, std::span<const int>(taps.begin(), taps.size()));
}

std::vector<int> LfsrSpec::taps() const {
    std::vector<int> out;
    for (int i = 0; i < degree; ++i)
        if (tap_mask >> i & 1) out.push_back(i);
    return out;
}

const CipherSpec& CipherSpec::standard59() {
    static const CipherSpec spec = [] {
        CipherSpec s;
        s.registers = {
            LfsrSpec::from_taps(17, {15, 14, 13, 11, 10, 9, 8, 6, 5, 4, 2, 0}),
            LfsrSpec::from_taps(19, {18, 16, 15, 11, 10, 5, 3, 2, 1, 0}),
            LfsrSpec::from_taps(23, {22, 21, 20, 17, 16, 15, 12, 10, 8, 7, 1, 0}),
        };
        s.id = "default59";
        s.validate();
        return s;
    }();
    return spec;
}

namespace {

// One primitive feedback polynomial per degree so scaled specs have maximal
// period, same as the full-size registers.
LfsrSpec primitive_register(int degree) {
    switch (degree) {
        case 2:  return LfsrSpec::from_taps(2, {1, 0});
        case 3:  return LfsrSpec::from_taps(3, {1, 0});
        case 4:  return LfsrSpec::from_taps(4, {1, 0});
        case 5:  return LfsrSpec::from_taps(5, {2, 0});
        case 6:  return LfsrSpec::from_taps(6, {1, 0});
        case 7:  return LfsrSpec::from_taps(7, {1, 0});
        case 8:  return LfsrSpec::from_taps(8, {4, 3, 2, 0});
        case 9:  return LfsrSpec::from_taps(9, {4, 0});
        case 10: return LfsrSpec::from_taps(10, {3, 0});
        case 11: return LfsrSpec::from_taps(11, {2, 0});
        case 12: return LfsrSpec::from_taps(12, {6, 4, 1, 0});
        case 13: return LfsrSpec::from_taps(13, {4, 3, 1, 0});
        case 14: return LfsrSpec::from_taps(14, {10, 6, 1, 0});
        case 15: return LfsrSpec::from_taps(15, {1, 0});
        case 16: return LfsrSpec::from_taps(16, {12, 3, 1, 0});
        case 17: return LfsrSpec::from_taps(17, {3, 0});
        case 18: return LfsrSpec::from_taps(18, {7, 0});
        case 19: return LfsrSpec::from_taps(19, {5, 2, 1, 0});
        case 20: return LfsrSpec::from_taps(20, {3, 0});
        case 21: return LfsrSpec::from_taps(21, {2, 0});
        case 22: return LfsrSpec::from_taps(22, {1, 0});
        case 23: return LfsrSpec::from_taps(23, {5, 0});
        default:
            throw ParseError("scaled register degree must be in [2, 23], got " +
                             std::to_string(degree));
    }
}

int parse_int(std::string_view s, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(std::string("bad ") + what + ": '" + std::string(s) + "'");
    return v;
}

} // namespace

CipherSpec CipherSpec::scaled(int d1, int d2, int d3) {
    CipherSpec s;
    s.registers = {primitive_register(d1), primitive_register(d2), primitive_register(d3)};
    std::ostringstream id;
    id << "scaled-" << d1 << "." << d2 << "." << d3;
    s.id = id.str();
    s.validate();
    return s;
}

CipherSpec CipherSpec::from_name(const std::string& name) {
    if (name == "default59") return standard59();
    constexpr std::string_view prefix = "scaled-";
    if (name.starts_with(prefix)) {
        std::string_view body{name};
        body.remove_prefix(prefix.size());
        int d[3];
        if (body.find('.') != std::string_view::npos) {
            std::size_t start = 0;
            for (int i = 0; i < 3; ++i) {
                std::size_t dot = body.find('.', start);
                bool last = (i == 2);
                if (last != (dot == std::string_view::npos))
                    throw ParseError("scaled spec name needs three degrees: " + name);
                d[i] = parse_int(body.substr(start, last ? std::string_view::npos : dot - start),
                                 "degree");
                start = dot + 1;
            }
        } else if (body.size() == 3) {
            for (int i = 0; i < 3; ++i) d[i] = parse_int(body.substr(i, 1), "degree");
        } else {
            throw ParseError("scaled spec name must be scaled-<d><d><d> or "
                             "scaled-<d1>.<d2>.<d3>: " + name);
        }
        return scaled(d[0], d[1], d[2]);
    }
    throw ParseError("unknown cipher spec name: " + name);
}

CipherSpec CipherSpec::parse_text(std::istream& in, const std::string& id) {
    CipherSpec s;
    s.id = id;
    std::string line;
    int idx = 0;
    while (idx < 3 && std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw ParseError("spec line missing ':': " + line);
        int degree = parse_int(std::string_view(line).substr(0, colon), "degree");
        std::vector<int> taps;
        std::string_view rest = std::string_view(line).substr(colon + 1);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            taps.push_back(parse_int(rest.substr(0, comma), "tap"));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        s.registers[idx++] = LfsrSpec::from_taps(degree, taps);
    }
    if (idx != 3)
        throw ParseError("cipher spec needs three register lines, found " +
                         std::to_string(idx));
    s.validate();
    return s;
}

CipherSpec CipherSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file: " + path);
    auto slash = path.find_last_of('/');
    std::string stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0)
        stem.resize(dot);
    return parse_text(in, stem);
}

std::string CipherSpec::to_text() const {
    std::ostringstream out;
    for (const auto& r : registers) {
        out << r.degree << ":";
        auto t = r.taps();
        std::sort(t.rbegin(), t.rend());
        for (std::size_t i = 0; i < t.size(); ++i)
            out << (i ? "," : "") << t[i];
        out << "\n";
    }
    return out.str();
}

void CipherSpec::validate() const {
    for (const auto& r : registers) {
        if (r.degree < 1 || r.degree > 63 || !(r.tap_mask & 1) ||
            (r.tap_mask & ~r.state_mask()))
            throw ParseError("invalid register in cipher spec");
    }
    if (key_bits() > 63)
        throw ParseError("total key width " + std::to_string(key_bits()) +
                         " exceeds 63 bits");
    if (id.empty())
        throw ParseError("cipher spec id must be nonempty");
}

std::uint64_t keystream_word(std::uint64_t state, const LfsrSpec& spec, int n) {
    std::uint64_t word = 0;
    for (int t = 0; t < n; ++t) {
        auto [next, out] = lfsr_step(state, spec);
        word |= static_cast<std::uint64_t>(out) << (n - 1 - t);
        state = next;
    }
    return word;
}

std::array<std::uint64_t, 3> split_key(CipherKey key, const CipherSpec& spec) {
    int d1 = spec.registers[0].degree;
    int d2 = spec.registers[1].degree;
    return {
        key.value & spec.registers[0].state_mask(),
        (key.value >> d1) & spec.registers[1].state_mask(),
        (key.value >> (d1 + d2)) & spec.registers[2].state_mask(),
    };
}

CipherKey join_key(std::uint64_t r1, std::uint64_t r2, std::uint64_t r3,
                   const CipherSpec& spec) {
    int d1 = spec.registers[0].degree;
    int d2 = spec.registers[1].degree;
    return CipherKey{r1 | (r2 << d1) | (r3 << (d1 + d2))};
}

Chunk sco(CipherKey key, const CipherSpec& spec) {
    auto [s1, s2, s3] = split_key(key, spec);
    int n = spec.chunk_bits();
    std::uint64_t o1 = keystream_word(s1, spec.registers[0], n);
    std::uint64_t o2 = keystream_word(s2, spec.registers[1], n);
    std::uint64_t o3 = keystream_word(s3, spec.registers[2], n);
    return Chunk{(o1 & o2) | (o1 & o3) | (o2 & o3)};
}

std::vector<std::uint64_t> output_linear_forms(const LfsrSpec& spec, int n) {
    // Symbolic run of lfsr_step: cell i holds the set of initial-state bits
    // (as a mask) whose XOR equals the cell's current value.
    std::vector<std::uint64_t> cells(spec.degree);
    for (int i = 0; i < spec.degree; ++i) cells[i] = 1ULL << i;
    std::vector<std::uint64_t> rows;
    rows.reserve(n);
    for (int t = 0; t < n; ++t) {
        rows.push_back(cells[0]);
        std::uint64_t fb = 0;
        for (int i = 0; i < spec.degree; ++i)
            if (spec.tap_mask >> i & 1) fb ^= cells[i];
        for (int i = 0; i + 1 < spec.degree; ++i) cells[i] = cells[i + 1];
        cells[spec.degree - 1] = fb;
    }
    return rows;
}

std::array<std::uint8_t, 8> to_le_bytes(std::uint64_t value) {
    std::array<std::uint8_t, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(value >> (8 * i));
    return b;
}

std::string format_hex(std::uint64_t value) {
    char buf[19];
    int n = std::snprintf(buf, sizeof buf, "0x%llX",
                          static_cast<unsigned long long>(value));
    return std::string(buf, n);
}

} // namespace armoury::cipher
