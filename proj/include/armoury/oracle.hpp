#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "armoury/cipher.hpp"
#include "armoury/mutation.hpp"

namespace armoury::oracle {

// Request/response opcodes. Every frame on the wire is exactly 9 bytes:
// opcode + 8-byte little-endian payload. ERROR carries a one-byte reason in
// payload[0], the rest zero.
enum : std::uint8_t {
    kOpDecode = 0x01,
    kOpMutate = 0x02,
    kOpDecodeOk = 0x81,
    kOpMutateOk = 0x82,
    kOpError = 0xFF,
};
enum : std::uint8_t {
    kErrUnknownOpcode = 0x01,
    kErrPoolRange = 0x02,
};

inline constexpr std::size_t kFrameSize = 9;

struct WireFrame {
    std::uint8_t opcode = 0;
    std::uint64_t payload = 0;
};

std::array<std::uint8_t, kFrameSize> encode_frame(const WireFrame& f);
WireFrame decode_frame(std::span<const std::uint8_t, kFrameSize> bytes);

// A blocking byte stream between the two halves of the split process.
class Channel {
public:
    virtual ~Channel() = default;
    // Fills buf with exactly n bytes. Returns false on a clean end-of-stream
    // before the first byte; throws IoError if the stream dies mid-read.
    virtual bool read_exact(std::uint8_t* buf, std::size_t n) = 0;
    virtual void write_all(std::span<const std::uint8_t> data) = 0;
    // Half-close: peer's next read sees end-of-stream. Reading still works.
    virtual void shutdown_write() {}
};

// In-process pair of cross-connected byte queues.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback();

// Named-pipe transport: two FIFOs, <path>.c2s and <path>.s2c, created on
// demand. The server call blocks until a client connects (FIFO semantics).
std::unique_ptr<Channel> fifo_serve(const std::string& path);
std::unique_ptr<Channel> fifo_connect(const std::string& path);

// Stream socket transport. addr is a unix socket path, or a bare port
// number for TCP on 127.0.0.1.
class Listener {
public:
    explicit Listener(const std::string& addr);
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;
    std::unique_ptr<Channel> accept();
    void close();

private:
    int fd_ = -1;
    std::string unlink_path_;
};

std::unique_ptr<Channel> socket_connect(const std::string& addr);
// Retries for slow-starting servers (tests fork the real binary).
std::unique_ptr<Channel> socket_connect_retry(const std::string& addr,
                                              int attempts, int delay_ms);

// Channel over already-open file descriptors (stdin/stdout serving).
std::unique_ptr<Channel> fd_channel(int read_fd, int write_fd, bool owned);

// Part V1: answer DECODE and MUTATE frames until the channel closes.
// DECODE(K) -> DECODE-OK(sco(K)); MUTATE(i) -> MUTATE-OK(key drawn from
// pool i); unknown opcode -> ERROR 0x01; bad pool index -> ERROR 0x02;
// a short frame closes the connection.
void serve(Channel& channel, const cipher::CipherSpec& spec,
           const mutation::PoolSet& pools, std::uint64_t seed);

// Part V2.
cipher::Chunk client_decode(Channel& channel, cipher::CipherKey key);
cipher::CipherKey client_mutate(Channel& channel, std::uint32_t pool_index);

} // namespace armoury::oracle
