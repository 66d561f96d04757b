// armoury: single entry point for the code-armouring pipeline.
// assemble -> protect -> (oracle) reveal/run, plus the analysis commands.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "armoury/altgen.hpp"
#include "armoury/cipher.hpp"
#include "armoury/entropy.hpp"
#include "armoury/error.hpp"
#include "armoury/ir.hpp"
#include "armoury/keysearch.hpp"
#include "armoury/mutation.hpp"
#include "armoury/oracle.hpp"
#include "armoury/packer.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace armoury;
using nlohmann::json;

std::uint64_t parse_u64(const std::string& s, int base, const char* what) {
    std::string_view body = s;
    if (base == 16 && (body.starts_with("0x") || body.starts_with("0X")))
        body.remove_prefix(2);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), v, base);
    if (ec != std::errc{} || p != body.data() + body.size() || body.empty())
        throw CLI::ValidationError(std::string(what) + ": bad value '" + s + "'");
    return v;
}

// --seed beats ARMOURY_SEED beats a fresh random value; whichever wins is
// echoed in the header so any run can be replayed.
std::uint64_t resolve_seed(const std::string& seed_arg) {
    if (!seed_arg.empty()) return parse_u64(seed_arg, 10, "--seed");
    if (const char* env = std::getenv("ARMOURY_SEED"); env && *env)
        return parse_u64(env, 10, "ARMOURY_SEED");
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

struct SpecArgs {
    std::string name = "default59";
    std::string file;

    cipher::CipherSpec resolve() const {
        if (!file.empty()) return cipher::CipherSpec::load_file(file);
        return cipher::CipherSpec::from_name(name);
    }
};

void add_spec_options(CLI::App* cmd, SpecArgs& args) {
    auto* name = cmd->add_option("--spec", args.name,
                                 "cipher spec name (default59, scaled-<d><d><d>, "
                                 "scaled-<d1>.<d2>.<d3>)");
    cmd->add_option("--spec-file", args.file,
                    "cipher spec text file (degree:tap,tap,... per register)")
        ->excludes(name);
}

void emit_header(const std::string& cmd, std::uint64_t seed,
                 const std::string& spec_id) {
    std::fprintf(stderr, "# armoury %s cmd=%s seed=%llu spec=%s\n", kVersion,
                 cmd.c_str(), static_cast<unsigned long long>(seed),
                 spec_id.empty() ? "-" : spec_id.c_str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out.flush()) throw IoError("short write: " + path);
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& hex) {
    std::string_view body = hex;
    if (body.starts_with("0x") || body.starts_with("0X")) body.remove_prefix(2);
    if (body.size() % 2)
        throw CLI::ValidationError("hex byte string needs an even digit count");
    std::vector<std::uint8_t> out;
    out.reserve(body.size() / 2);
    for (std::size_t i = 0; i < body.size(); i += 2) {
        std::uint8_t b = 0;
        auto [p, ec] = std::from_chars(body.data() + i, body.data() + i + 2, b, 16);
        if (ec != std::errc{} || p != body.data() + i + 2)
            throw CLI::ValidationError("bad hex byte string");
        out.push_back(b);
    }
    return out;
}

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
    static const char digits[] = "0123456789ABCDEF";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

// --oracle local | pipe:<path> | socket:<addr>
packer::DecodeFn make_decoder(const std::string& oracle_arg,
                              const cipher::CipherSpec& spec,
                              std::unique_ptr<oracle::Channel>& channel) {
    if (oracle_arg == "local")
        return [&spec](cipher::CipherKey k) { return cipher::sco(k, spec); };
    if (oracle_arg.starts_with("pipe:")) {
        channel = oracle::fifo_connect(oracle_arg.substr(5));
    } else if (oracle_arg.starts_with("socket:")) {
        channel = oracle::socket_connect_retry(oracle_arg.substr(7), 40, 250);
    } else {
        throw CLI::ValidationError(
            "--oracle must be local, pipe:<path> or socket:<addr>");
    }
    oracle::Channel* ch = channel.get();
    return [ch](cipher::CipherKey k) { return oracle::client_decode(*ch, k); };
}

void print_context(const ir::VmContext& ctx, const ir::GenerationProfile& profile) {
    for (int i = 0; i < ir::kRegCount; ++i) {
        ir::Reg r = static_cast<ir::Reg>(i);
        std::printf("%s=%s\n", ir::reg_name(r),
                    cipher::format_hex(ir::read_cell(ctx, profile, r)).c_str());
    }
    std::printf("pc=%zu zero_flag=%d\n", ctx.pc, ctx.zero_flag ? 1 : 0);
}

struct SliceArg {
    std::uint32_t index = 0;
    std::uint32_t total = 1;
};

SliceArg parse_slice(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos)
        throw CLI::ValidationError("--slice must be i/n");
    SliceArg a;
    a.index = static_cast<std::uint32_t>(
        parse_u64(s.substr(0, slash), 10, "--slice index"));
    a.total = static_cast<std::uint32_t>(
        parse_u64(s.substr(slash + 1), 10, "--slice total"));
    if (a.total == 0 || a.index >= a.total)
        throw CLI::ValidationError("--slice needs index < total");
    return a;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"code armouring toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string seed_arg;
    app.add_option("--seed", seed_arg,
                   "master seed (decimal); beats ARMOURY_SEED; default random");

    // ---- assemble ----
    auto* cmd_asm = app.add_subcommand("assemble", "toy asm -> bytecode dump");
    struct {
        std::string in, out, profile_seed;
    } a_asm;
    cmd_asm->add_option("--in", a_asm.in, "assembly source")->required();
    cmd_asm->add_option("--out", a_asm.out, "bytecode dump (default stdout)");
    cmd_asm->add_option("--profile-seed", a_asm.profile_seed,
                        "generation profile seed (default: run seed)");

    // ---- search-keys ----
    auto* cmd_search = app.add_subcommand("search-keys",
                                          "enumerate keys for a target chunk");
    struct {
        SpecArgs spec;
        std::string target, out, slice;
        std::string max_guesses;
        unsigned threads = 0;
        bool brute = false;
        bool long_ok = false;
        double entropy_tol = -1.0;
    } a_search;
    add_spec_options(cmd_search, a_search.spec);
    cmd_search->add_option("--target", a_search.target, "chunk value (hex)")
        ->required();
    cmd_search->add_option("--out", a_search.out, "pool file")->required();
    cmd_search->add_option("--slice", a_search.slice, "guess-space slice i/n");
    cmd_search->add_option("--max-guesses", a_search.max_guesses,
                           "cap on (r1,r2) guesses in this slice");
    cmd_search->add_option("--threads", a_search.threads,
                           "worker threads (default: hardware)");
    cmd_search->add_flag("--brute", a_search.brute,
                         "exhaustive enumeration (scaled specs only)");
    cmd_search->add_flag("--i-have-hours", a_search.long_ok,
                         "acknowledge a full-size search");
    cmd_search->add_option("--entropy-tolerance", a_search.entropy_tol,
                           "keep keys within this byte-entropy distance");

    // ---- protect ----
    auto* cmd_protect = app.add_subcommand("protect", "bytecode dump -> blob");
    struct {
        SpecArgs spec;
        std::string in, out, mode = "concat", pools, profile_seed;
        bool live = false;
    } a_protect;
    add_spec_options(cmd_protect, a_protect.spec);
    cmd_protect->add_option("--in", a_protect.in, "bytecode dump")->required();
    cmd_protect->add_option("--out", a_protect.out, "blob file")->required();
    cmd_protect->add_option("--mode", a_protect.mode, "concat | direct")
        ->check(CLI::IsMember({"concat", "direct"}));
    auto* pools_opt = cmd_protect->add_option("--pools", a_protect.pools,
                                              "pool manifest");
    cmd_protect->add_flag("--live", a_protect.live,
                          "search keys on the fly (scaled specs only)")
        ->excludes(pools_opt);
    cmd_protect->add_option("--profile-seed", a_protect.profile_seed,
                            "profile seed committed in memory (not serialized)");

    // ---- reveal ----
    auto* cmd_reveal = app.add_subcommand("reveal", "blob -> bytecode dump");
    struct {
        SpecArgs spec;
        std::string in, out, oracle = "local";
    } a_reveal;
    add_spec_options(cmd_reveal, a_reveal.spec);
    cmd_reveal->add_option("--in", a_reveal.in, "blob file")->required();
    cmd_reveal->add_option("--out", a_reveal.out, "bytecode dump (default stdout)");
    cmd_reveal->add_option("--oracle", a_reveal.oracle,
                           "local | pipe:<path> | socket:<addr>");

    // ---- run ----
    auto* cmd_run = app.add_subcommand("run", "execute a blob (or raw bytecode)");
    struct {
        SpecArgs spec;
        std::string in, btc, oracle = "local", profile_seed;
        std::uint64_t fuel = 100000;
    } a_run;
    add_spec_options(cmd_run, a_run.spec);
    auto* run_in = cmd_run->add_option("--in", a_run.in, "blob file");
    cmd_run->add_option("--btc", a_run.btc, "bytecode dump (skip the oracle)")
        ->excludes(run_in);
    cmd_run->add_option("--oracle", a_run.oracle,
                        "local | pipe:<path> | socket:<addr>");
    cmd_run->add_option("--profile-seed", a_run.profile_seed,
                        "generation profile seed (default: run seed)");
    cmd_run->add_option("--fuel", a_run.fuel, "max executed instructions");

    // ---- mutate ----
    auto* cmd_mutate = app.add_subcommand("mutate", "resample a blob's keys");
    struct {
        SpecArgs spec;
        std::string in, out, pools;
        bool stream = false;
    } a_mutate;
    add_spec_options(cmd_mutate, a_mutate.spec);
    cmd_mutate->add_option("--in", a_mutate.in, "blob file")->required();
    cmd_mutate->add_option("--out", a_mutate.out, "mutated blob")->required();
    cmd_mutate->add_option("--pools", a_mutate.pools, "pool manifest")->required();
    cmd_mutate->add_flag("--stream", a_mutate.stream,
                         "reservoir-sample pool files instead of loading them");

    // ---- entropy ----
    auto* cmd_entropy = app.add_subcommand("entropy", "byte-entropy analysis");
    struct {
        std::string in;
        std::size_t window = 64, stride = 16;
        bool profile = false, json_out = false;
    } a_entropy;
    cmd_entropy->add_option("--in", a_entropy.in, "input file")->required();
    cmd_entropy->add_option("--window", a_entropy.window, "profile window bytes");
    cmd_entropy->add_option("--stride", a_entropy.stride, "profile stride bytes");
    cmd_entropy->add_flag("--profile", a_entropy.profile,
                          "emit sliding profile CSV (offset,entropy)");
    cmd_entropy->add_flag("--json", a_entropy.json_out, "JSON output");

    // ---- count-variants ----
    auto* cmd_count = app.add_subcommand("count-variants",
                                         "variant space of a pool set");
    struct {
        SpecArgs spec;
        std::string pools, sizes;
        bool json_out = false;
    } a_count;
    add_spec_options(cmd_count, a_count.spec);
    auto* count_pools = cmd_count->add_option("--pools", a_count.pools,
                                              "pool manifest");
    cmd_count->add_option("--sizes", a_count.sizes,
                          "comma-separated pool sizes (no pool files needed)")
        ->excludes(count_pools);
    cmd_count->add_flag("--json", a_count.json_out, "JSON output");

    // ---- oracle ----
    auto* cmd_oracle = app.add_subcommand("oracle", "split-process part V1");
    auto* cmd_serve = cmd_oracle->add_subcommand("serve", "answer decode/mutate");
    struct {
        SpecArgs spec;
        std::string transport = "loopback", addr, pools;
        std::uint64_t max_conns = 0;
    } a_serve;
    add_spec_options(cmd_serve, a_serve.spec);
    cmd_serve->add_option("--transport", a_serve.transport,
                          "loopback (stdio) | pipe | socket")
        ->check(CLI::IsMember({"loopback", "pipe", "socket"}));
    cmd_serve->add_option("--addr", a_serve.addr,
                          "pipe path prefix, unix socket path, or TCP port");
    cmd_serve->add_option("--pools", a_serve.pools, "pool manifest for MUTATE");
    cmd_serve->add_option("--max-conns", a_serve.max_conns,
                          "stop after this many connections (0 = forever)");

    // ---- lcg ----
    auto* cmd_lcg = app.add_subcommand("lcg", "linear congruential sequences");
    struct {
        std::string preset = "minstd";
        std::uint64_t x0 = 1;
        std::size_t count = 10;
        bool json_out = false;
    } a_lcg;
    cmd_lcg->add_option("--preset", a_lcg.preset,
                        "minstd | vax-marsaglia | lavaux-jenssens | haynes | "
                        "knuth-borland");
    cmd_lcg->add_option("--x0", a_lcg.x0, "initial state");
    cmd_lcg->add_option("--count", a_lcg.count, "outputs to emit");
    cmd_lcg->add_flag("--json", a_lcg.json_out, "JSON output");

    // ---- hashchain ----
    auto* cmd_hash = app.add_subcommand("hashchain", "S/key-style sequences");
    struct {
        std::string hash = "sha256", iv, d0;
        std::size_t count = 5;
        bool json_out = false;
    } a_hash;
    cmd_hash->add_option("--hash", a_hash.hash, "toy | sha256");
    cmd_hash->add_option("--iv", a_hash.iv, "initialization vector (hex)")
        ->required();
    cmd_hash->add_option("--d0", a_hash.d0, "optional data block (hex)");
    cmd_hash->add_option("--count", a_hash.count, "elements to emit");
    cmd_hash->add_flag("--json", a_hash.json_out, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::uint64_t seed = resolve_seed(seed_arg);

        if (*cmd_asm) {
            std::uint64_t pseed = a_asm.profile_seed.empty()
                                      ? seed
                                      : parse_u64(a_asm.profile_seed, 10,
                                                  "--profile-seed");
            emit_header("assemble", seed, "");
            std::fprintf(stderr, "# profile-seed=%llu\n",
                         static_cast<unsigned long long>(pseed));
            auto program = ir::assemble(read_text_file(a_asm.in));
            auto profile = ir::new_profile(pseed);
            auto words = ir::flatten(ir::encode_program(program, profile));
            write_text_file(a_asm.out, ir::dump_words(words));
            std::fprintf(stderr, "# %zu instructions, %zu words\n",
                         program.size(), words.size());
        } else if (*cmd_search) {
            auto spec = a_search.spec.resolve();
            emit_header("search-keys", seed, spec.id);
            std::uint64_t target_val =
                parse_u64(a_search.target, 16, "--target");
            if (target_val & ~spec.chunk_mask())
                throw CLI::ValidationError("--target exceeds chunk width");
            cipher::Chunk target{target_val};
            keysearch::KeyPool pool;
            if (a_search.brute) {
                if (!a_search.slice.empty() || !a_search.max_guesses.empty())
                    throw CLI::ValidationError(
                        "--brute ignores slices; drop --slice/--max-guesses");
                pool = keysearch::brute_force_keys(target, spec);
            } else {
                if (spec.key_bits() > 26 && !a_search.long_ok)
                    throw CLI::ValidationError(
                        "full-size search takes a long time; pass "
                        "--i-have-hours (and consider --slice i/n)");
                keysearch::SearchBudget budget;
                if (!a_search.slice.empty()) {
                    auto s = parse_slice(a_search.slice);
                    budget.slice_index = s.index;
                    budget.slice_total = s.total;
                }
                if (!a_search.max_guesses.empty())
                    budget.max_guesses =
                        parse_u64(a_search.max_guesses, 10, "--max-guesses");
                unsigned threads = a_search.threads
                                       ? a_search.threads
                                       : std::max(1u, std::thread::hardware_concurrency());
                pool = keysearch::attack_keys_parallel(target, spec, budget,
                                                       threads);
            }
            if (a_search.entropy_tol >= 0)
                pool = keysearch::filter_keys_entropy(pool, spec,
                                                      a_search.entropy_tol);
            keysearch::save_pool(a_search.out, pool, spec);
            std::fprintf(stderr, "# %zu keys for target %s -> %s\n",
                         pool.keys.size(),
                         cipher::format_hex(target.value).c_str(),
                         a_search.out.c_str());
        } else if (*cmd_protect) {
            auto spec = a_protect.spec.resolve();
            emit_header("protect", seed, spec.id);
            auto words = ir::parse_word_dump(read_text_file(a_protect.in));
            packer::Mode mode = a_protect.mode == "concat" ? packer::Mode::Concat
                                                           : packer::Mode::Direct;
            std::unique_ptr<packer::KeySource> source;
            mutation::PoolSet pools;
            if (!a_protect.pools.empty()) {
                pools = mutation::load_pool_set(a_protect.pools, spec);
                source = std::make_unique<mutation::PoolSetSource>(pools, seed);
            } else if (a_protect.live) {
                source = std::make_unique<packer::LiveSearchSource>(spec, seed);
            } else {
                throw CLI::ValidationError("protect needs --pools or --live");
            }
            auto blob = packer::protect_program(words, mode, spec, *source, seed);
            if (!a_protect.profile_seed.empty())
                blob.profile_seed =
                    parse_u64(a_protect.profile_seed, 10, "--profile-seed");
            packer::save_blob(a_protect.out, blob);
            std::fprintf(stderr, "# %zu words -> %zu keys (%s mode)\n",
                         words.size(), blob.keys.size(), a_protect.mode.c_str());
        } else if (*cmd_reveal) {
            auto spec = a_reveal.spec.resolve();
            emit_header("reveal", seed, spec.id);
            auto blob = packer::load_blob(a_reveal.in);
            if (blob.spec_id != spec.id)
                throw Error("blob is for spec '" + blob.spec_id +
                            "', expected '" + spec.id + "'");
            std::unique_ptr<oracle::Channel> channel;
            auto decode = make_decoder(a_reveal.oracle, spec, channel);
            auto words = packer::reveal_program(blob, decode);
            if (channel) channel->shutdown_write();
            write_text_file(a_reveal.out, ir::dump_words(words));
            std::fprintf(stderr, "# %zu keys -> %zu words\n", blob.keys.size(),
                         words.size());
        } else if (*cmd_run) {
            auto spec = a_run.spec.resolve();
            emit_header("run", seed, spec.id);
            std::uint64_t pseed = a_run.profile_seed.empty()
                                      ? seed
                                      : parse_u64(a_run.profile_seed, 10,
                                                  "--profile-seed");
            std::vector<std::uint32_t> words;
            if (!a_run.btc.empty()) {
                words = ir::parse_word_dump(read_text_file(a_run.btc));
            } else if (!a_run.in.empty()) {
                auto blob = packer::load_blob(a_run.in);
                if (blob.spec_id != spec.id)
                    throw Error("blob is for spec '" + blob.spec_id +
                                "', expected '" + spec.id + "'");
                std::unique_ptr<oracle::Channel> channel;
                auto decode = make_decoder(a_run.oracle, spec, channel);
                words = packer::reveal_program(blob, decode);
                if (channel) channel->shutdown_write();
            } else {
                throw CLI::ValidationError("run needs --in or --btc");
            }
            auto profile = ir::new_profile(pseed);
            auto ctx = ir::execute(ir::group_words(words), profile, a_run.fuel);
            print_context(ctx, profile);
        } else if (*cmd_mutate) {
            auto spec = a_mutate.spec.resolve();
            emit_header("mutate", seed, spec.id);
            auto blob = packer::load_blob(a_mutate.in);
            packer::ProtectedBlob out;
            if (a_mutate.stream) {
                out = mutation::mutate_blob_streamed(blob, a_mutate.pools, spec,
                                                     seed);
            } else {
                auto pools = mutation::load_pool_set(a_mutate.pools, spec);
                out = mutation::mutate_blob(blob, pools, seed);
            }
            packer::save_blob(a_mutate.out, out);
            std::fprintf(stderr, "# resampled %zu keys\n", out.keys.size());
        } else if (*cmd_entropy) {
            emit_header("entropy", seed, "");
            auto data = read_binary_file(a_entropy.in);
            double h = entropy::byte_entropy(data);
            if (a_entropy.json_out || a_entropy.profile) {
                auto prof = entropy::sliding_profile(data, a_entropy.window,
                                                     a_entropy.stride);
                if (a_entropy.json_out) {
                    json j{{"entropy", h},
                           {"window", prof.window},
                           {"stride", prof.stride},
                           {"profile", prof.values}};
                    std::printf("%s\n", j.dump().c_str());
                } else {
                    std::printf("offset,entropy\n");
                    for (std::size_t i = 0; i < prof.values.size(); ++i)
                        std::printf("%zu,%.6f\n", i * prof.stride,
                                    prof.values[i]);
                }
            } else {
                std::printf("%.6f\n", h);
            }
        } else if (*cmd_count) {
            mutation::VariantCount count;
            if (!a_count.sizes.empty()) {
                emit_header("count-variants", seed, "");
                std::vector<std::uint64_t> sizes;
                std::istringstream ss(a_count.sizes);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    sizes.push_back(parse_u64(tok, 10, "--sizes"));
                count = mutation::count_sizes(sizes);
            } else if (!a_count.pools.empty()) {
                auto spec = a_count.spec.resolve();
                emit_header("count-variants", seed, spec.id);
                auto pools = mutation::load_pool_set(a_count.pools, spec);
                count = mutation::count_variants(pools);
            } else {
                throw CLI::ValidationError("count-variants needs --pools or --sizes");
            }
            if (a_count.json_out) {
                json j{{"variants", count.exact_decimal}, {"log2", count.log2}};
                std::printf("%s\n", j.dump().c_str());
            } else {
                std::printf("%s\n", count.exact_decimal.c_str());
                std::printf("log2=%.4f\n", count.log2);
            }
        } else if (*cmd_serve) {
            auto spec = a_serve.spec.resolve();
            emit_header("oracle-serve", seed, spec.id);
            mutation::PoolSet pools;
            if (!a_serve.pools.empty())
                pools = mutation::load_pool_set(a_serve.pools, spec);
            if (a_serve.transport != "loopback" && a_serve.addr.empty())
                throw CLI::ValidationError("--addr is required for " +
                                           a_serve.transport);
            if (a_serve.transport == "loopback") {
                // Part V2 is the process on the other end of stdio.
                auto ch = oracle::fd_channel(0, 1, false);
                oracle::serve(*ch, spec, pools, seed);
            } else if (a_serve.transport == "pipe") {
                std::uint64_t conn = 0;
                while (a_serve.max_conns == 0 || conn < a_serve.max_conns) {
                    auto ch = oracle::fifo_serve(a_serve.addr);
                    oracle::serve(*ch, spec, pools,
                                  rng::SplitMix64::substream(seed, conn).next());
                    ++conn;
                }
            } else {
                oracle::Listener listener(a_serve.addr);
                std::fprintf(stderr, "# listening on %s\n", a_serve.addr.c_str());
                std::vector<std::thread> workers;
                std::uint64_t conn = 0;
                while (a_serve.max_conns == 0 || conn < a_serve.max_conns) {
                    auto ch = listener.accept();
                    std::uint64_t conn_seed =
                        rng::SplitMix64::substream(seed, conn).next();
                    workers.emplace_back(
                        [ch = std::move(ch), &spec, &pools, conn_seed] {
                            oracle::serve(*ch, spec, pools, conn_seed);
                        });
                    ++conn;
                }
                for (auto& w : workers) w.join();
            }
        } else if (*cmd_lcg) {
            emit_header("lcg", seed, "");
            auto params = altgen::lcg_preset(a_lcg.preset);
            auto outputs = altgen::lcg_sequence(a_lcg.x0, params, a_lcg.count);
            if (a_lcg.json_out) {
                json j{{"preset", a_lcg.preset}, {"x0", a_lcg.x0},
                       {"outputs", outputs}};
                std::printf("%s\n", j.dump().c_str());
            } else {
                for (auto v : outputs)
                    std::printf("%llu\n", static_cast<unsigned long long>(v));
            }
        } else if (*cmd_hash) {
            emit_header("hashchain", seed, "");
            altgen::HashChainSpec hspec;
            hspec.hash_id = a_hash.hash;
            hspec.padding_seed = seed;
            auto fn = altgen::hash_by_id(a_hash.hash);
            hspec.iv = parse_hex_bytes(a_hash.iv);
            if (hspec.iv.size() > static_cast<std::size_t>(fn.m_bits / 8))
                throw CLI::ValidationError("--iv longer than the hash input");
            // Left-pad to the full input width.
            hspec.iv.insert(hspec.iv.begin(),
                            fn.m_bits / 8 - hspec.iv.size(), 0);
            auto d0 = parse_hex_bytes(a_hash.d0.empty() ? "" : a_hash.d0);
            altgen::HashChain chain(hspec, d0);
            std::vector<std::string> elements;
            for (std::size_t i = 0; i < a_hash.count; ++i)
                elements.push_back(hex_bytes(chain.next()));
            if (a_hash.json_out) {
                json j{{"hash", a_hash.hash},
                       {"iteration_cap", altgen::kMaxChainIterations},
                       {"elements", elements}};
                std::printf("%s\n", j.dump().c_str());
            } else {
                std::fprintf(stderr, "# iteration cap %llu\n",
                             static_cast<unsigned long long>(
                                 altgen::kMaxChainIterations));
                for (const auto& e : elements) std::printf("%s\n", e.c_str());
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
