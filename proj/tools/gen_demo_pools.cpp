// Regenerates the committed demo fixtures: one key pool per chunk of the
// demo program, each with at least four keys, plus the manifest tying them
// together. Usage:
//
//   gen_demo_pools <demo.asm> <output-dir> [profile-seed]
//
// Pools come from real divide-and-conquer search slices (1024 slices over
// the full guess space, scanned in order until the pool is big enough), so
// regeneration is deterministic and takes under a minute.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "armoury/cipher.hpp"
#include "armoury/ir.hpp"
#include "armoury/keysearch.hpp"
#include "armoury/packer.hpp"

using namespace armoury;
using cipher::Chunk;
using cipher::CipherSpec;

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr,
                     "usage: %s <demo.asm> <output-dir> [profile-seed]\n",
                     argv[0]);
        return 2;
    }
    std::string asm_path = argv[1];
    std::filesystem::path out_dir = argv[2];
    std::uint64_t profile_seed = argc > 3 ? std::stoull(argv[3]) : 659918;

    std::ifstream in(asm_path);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", asm_path.c_str());
        return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();

    const auto& spec = CipherSpec::standard59();
    auto program = ir::assemble(ss.str());
    auto profile = ir::new_profile(profile_seed);
    auto words = ir::flatten(ir::encode_program(program, profile));

    std::vector<Chunk> chunks;
    for (std::size_t i = 0; i + 5 <= words.size(); i += 5) {
        packer::WordGroup g;
        for (int j = 0; j < 5; ++j) g.x[j] = words[i + j];
        for (auto m : packer::pack_concat(g)) chunks.push_back(m);
    }
    std::printf("%zu instructions -> %zu words -> %zu chunks (profile seed %llu)\n",
                program.size(), words.size(), chunks.size(),
                static_cast<unsigned long long>(profile_seed));

    std::filesystem::create_directories(out_dir / "pools");
    std::map<std::uint64_t, keysearch::KeyPool> by_target;
    std::ofstream manifest(out_dir / "demo.manifest");

    for (std::size_t i = 0; i < chunks.size(); ++i) {
        auto target = chunks[i];
        auto it = by_target.find(target.value);
        if (it == by_target.end()) {
            // 64 keys is plenty of mutation headroom; dense targets (the
            // zero chunk has millions of preimages per slice) get truncated
            // so the committed fixtures stay small.
            constexpr std::size_t kPoolCap = 64;
            keysearch::KeyPool pool{target, {}, spec.id};
            for (std::uint32_t slice = 0; slice < 1024; ++slice) {
                keysearch::SearchBudget budget;
                budget.slice_index = slice;
                budget.slice_total = 1024;
                auto part = keysearch::attack_keys(target, spec, budget);
                pool.keys.insert(pool.keys.end(), part.keys.begin(),
                                 part.keys.end());
                if (pool.keys.size() >= kPoolCap) break;
            }
            std::sort(pool.keys.begin(), pool.keys.end());
            if (pool.keys.size() > kPoolCap) pool.keys.resize(kPoolCap);
            if (pool.keys.size() < 4) {
                std::fprintf(stderr,
                             "chunk %zu (%s): only %zu keys after the scan; "
                             "pick another profile seed\n",
                             i, cipher::format_hex(target.value).c_str(),
                             pool.keys.size());
                return 1;
            }
            it = by_target.emplace(target.value, std::move(pool)).first;
        }
        std::string name = "pools/p" + std::to_string(i) + ".pool";
        keysearch::save_pool((out_dir / name).string(), it->second, spec);
        manifest << i << " " << name << "\n";
        std::printf("chunk %2zu  %-18s  %5zu keys\n", i,
                    cipher::format_hex(target.value).c_str(),
                    it->second.keys.size());
    }
    std::printf("manifest: %s\n", (out_dir / "demo.manifest").c_str());
    return 0;
}
