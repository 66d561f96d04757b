#include "armoury/oracle.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "armoury/error.hpp"

namespace armoury::oracle {

std::array<std::uint8_t, kFrameSize> encode_frame(const WireFrame& f) {
    std::array<std::uint8_t, kFrameSize> out{};
    out[0] = f.opcode;
    for (int i = 0; i < 8; ++i)
        out[1 + i] = static_cast<std::uint8_t>(f.payload >> (8 * i));
    return out;
}

WireFrame decode_frame(std::span<const std::uint8_t, kFrameSize> bytes) {
    WireFrame f;
    f.opcode = bytes[0];
    for (int i = 7; i >= 0; --i) f.payload = (f.payload << 8) | bytes[1 + i];
    return f;
}

// ---- loopback ----

namespace {

struct ByteQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> data;
    bool closed = false;

    void push(std::span<const std::uint8_t> bytes) {
        std::lock_guard lock(mu);
        if (closed) throw IoError("loopback peer closed");
        data.insert(data.end(), bytes.begin(), bytes.end());
        cv.notify_all();
    }
    // Blocks for n bytes; false = clean EOF before the first byte.
    bool pop(std::uint8_t* buf, std::size_t n) {
        std::unique_lock lock(mu);
        for (std::size_t got = 0; got < n; ++got) {
            cv.wait(lock, [&] { return !data.empty() || closed; });
            if (data.empty()) {
                if (got == 0) return false;
                throw IoError("loopback closed mid-frame");
            }
            buf[got] = data.front();
            data.pop_front();
        }
        return true;
    }
    void close() {
        std::lock_guard lock(mu);
        closed = true;
        cv.notify_all();
    }
};

class LoopbackChannel : public Channel {
public:
    LoopbackChannel(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out)
        : in_(std::move(in)), out_(std::move(out)) {}
    ~LoopbackChannel() override {
        out_->close();
        in_->close();
    }
    bool read_exact(std::uint8_t* buf, std::size_t n) override {
        return in_->pop(buf, n);
    }
    void write_all(std::span<const std::uint8_t> data) override {
        out_->push(data);
    }
    void shutdown_write() override { out_->close(); }

private:
    std::shared_ptr<ByteQueue> in_, out_;
};

} // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback() {
    auto a = std::make_shared<ByteQueue>();
    auto b = std::make_shared<ByteQueue>();
    return {std::make_unique<LoopbackChannel>(a, b),
            std::make_unique<LoopbackChannel>(b, a)};
}

// ---- file descriptors (FIFOs, sockets, stdio) ----

namespace {

class FdChannel : public Channel {
public:
    FdChannel(int read_fd, int write_fd, bool owned, bool is_socket)
        : rfd_(read_fd), wfd_(write_fd), owned_(owned), socket_(is_socket) {}
    ~FdChannel() override {
        if (!owned_) return;
        if (rfd_ >= 0) ::close(rfd_);
        if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    }
    bool read_exact(std::uint8_t* buf, std::size_t n) override {
        std::size_t got = 0;
        while (got < n) {
            ssize_t r = ::read(rfd_, buf + got, n - got);
            if (r < 0) {
                if (errno == EINTR) continue;
                throw IoError(std::string("read: ") + std::strerror(errno));
            }
            if (r == 0) {
                if (got == 0) return false;
                throw IoError("stream closed mid-frame");
            }
            got += static_cast<std::size_t>(r);
        }
        return true;
    }
    void write_all(std::span<const std::uint8_t> data) override {
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t w = ::write(wfd_, data.data() + sent, data.size() - sent);
            if (w < 0) {
                if (errno == EINTR) continue;
                throw IoError(std::string("write: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(w);
        }
    }
    void shutdown_write() override {
        if (socket_) {
            ::shutdown(wfd_, SHUT_WR);
        } else if (owned_ && wfd_ >= 0 && wfd_ != rfd_) {
            ::close(wfd_);
            wfd_ = -1;
        }
    }

private:
    int rfd_, wfd_;
    bool owned_, socket_;
};

void ensure_fifo(const std::string& path) {
    if (::mkfifo(path.c_str(), 0600) != 0 && errno != EEXIST)
        throw IoError("mkfifo " + path + ": " + std::strerror(errno));
}

bool is_port(const std::string& addr) {
    return !addr.empty() &&
           std::all_of(addr.begin(), addr.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

int open_or_throw(const std::string& path, int flags) {
    int fd = ::open(path.c_str(), flags);
    if (fd < 0) throw IoError("open " + path + ": " + std::strerror(errno));
    return fd;
}

} // namespace

std::unique_ptr<Channel> fifo_serve(const std::string& path) {
    ensure_fifo(path + ".c2s");
    ensure_fifo(path + ".s2c");
    // Read side first: blocks here until a client opens its write side.
    int rfd = open_or_throw(path + ".c2s", O_RDONLY);
    int wfd = ::open((path + ".s2c").c_str(), O_WRONLY);
    if (wfd < 0) {
        int e = errno;
        ::close(rfd);
        throw IoError("open " + path + ".s2c: " + std::strerror(e));
    }
    return std::make_unique<FdChannel>(rfd, wfd, true, false);
}

std::unique_ptr<Channel> fifo_connect(const std::string& path) {
    ensure_fifo(path + ".c2s");
    ensure_fifo(path + ".s2c");
    int wfd = open_or_throw(path + ".c2s", O_WRONLY);
    int rfd = ::open((path + ".s2c").c_str(), O_RDONLY);
    if (rfd < 0) {
        int e = errno;
        ::close(wfd);
        throw IoError("open " + path + ".s2c: " + std::strerror(e));
    }
    return std::make_unique<FdChannel>(rfd, wfd, true, false);
}

Listener::Listener(const std::string& addr) {
    if (is_port(addr)) {
        std::uint16_t port = 0;
        auto [p, ec] = std::from_chars(addr.data(), addr.data() + addr.size(), port);
        if (ec != std::errc{} || p != addr.data() + addr.size())
            throw IoError("bad port: " + addr);
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(port);
        sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
            ::listen(fd_, 8) != 0) {
            int e = errno;
            ::close(fd_);
            fd_ = -1;
            throw IoError("bind/listen port " + addr + ": " + std::strerror(e));
        }
    } else {
        fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
        sockaddr_un sa{};
        sa.sun_family = AF_UNIX;
        if (addr.size() >= sizeof sa.sun_path)
            throw IoError("unix socket path too long: " + addr);
        std::strncpy(sa.sun_path, addr.c_str(), sizeof sa.sun_path - 1);
        ::unlink(addr.c_str());
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
            ::listen(fd_, 8) != 0) {
            int e = errno;
            ::close(fd_);
            fd_ = -1;
            throw IoError("bind/listen " + addr + ": " + std::strerror(e));
        }
        unlink_path_ = addr;
    }
}

Listener::~Listener() { close(); }

void Listener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    if (!unlink_path_.empty()) {
        ::unlink(unlink_path_.c_str());
        unlink_path_.clear();
    }
}

std::unique_ptr<Channel> Listener::accept() {
    for (;;) {
        int c = ::accept(fd_, nullptr, nullptr);
        if (c >= 0)
            return std::make_unique<FdChannel>(c, c, true, true);
        if (errno == EINTR) continue;
        throw IoError(std::string("accept: ") + std::strerror(errno));
    }
}

std::unique_ptr<Channel> socket_connect(const std::string& addr) {
    int fd;
    if (is_port(addr)) {
        std::uint16_t port = 0;
        std::from_chars(addr.data(), addr.data() + addr.size(), port);
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(port);
        sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
            int e = errno;
            ::close(fd);
            throw IoError("connect port " + addr + ": " + std::strerror(e));
        }
    } else {
        fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
        sockaddr_un sa{};
        sa.sun_family = AF_UNIX;
        if (addr.size() >= sizeof sa.sun_path)
            throw IoError("unix socket path too long: " + addr);
        std::strncpy(sa.sun_path, addr.c_str(), sizeof sa.sun_path - 1);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
            int e = errno;
            ::close(fd);
            throw IoError("connect " + addr + ": " + std::strerror(e));
        }
    }
    return std::make_unique<FdChannel>(fd, fd, true, true);
}

std::unique_ptr<Channel> socket_connect_retry(const std::string& addr,
                                              int attempts, int delay_ms) {
    for (int i = 0;; ++i) {
        try {
            return socket_connect(addr);
        } catch (const IoError&) {
            if (i + 1 >= attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        }
    }
}

std::unique_ptr<Channel> fd_channel(int read_fd, int write_fd, bool owned) {
    return std::make_unique<FdChannel>(read_fd, write_fd, owned, false);
}

// ---- protocol ----

void serve(Channel& channel, const cipher::CipherSpec& spec,
           const mutation::PoolSet& pools, std::uint64_t seed) {
    rng::SplitMix64 rand(seed);
    std::array<std::uint8_t, kFrameSize> buf;
    for (;;) {
        try {
            if (!channel.read_exact(buf.data(), buf.size())) return;
        } catch (const IoError&) {
            return;  // short frame: drop the connection
        }
        WireFrame req = decode_frame(buf);
        WireFrame rsp;
        switch (req.opcode) {
            case kOpDecode:
                rsp.opcode = kOpDecodeOk;
                rsp.payload =
                    cipher::sco(cipher::CipherKey{req.payload & spec.key_mask()},
                                spec).value;
                break;
            case kOpMutate: {
                std::uint32_t index = static_cast<std::uint32_t>(req.payload);
                if (index >= pools.pools.size()) {
                    rsp.opcode = kOpError;
                    rsp.payload = kErrPoolRange;
                } else {
                    const auto& keys = pools.pools[index].keys;
                    rsp.opcode = kOpMutateOk;
                    rsp.payload = keys[rand.next_below(keys.size())].value;
                }
                break;
            }
            default:
                rsp.opcode = kOpError;
                rsp.payload = kErrUnknownOpcode;
        }
        channel.write_all(encode_frame(rsp));
    }
}

namespace {

WireFrame round_trip(Channel& channel, const WireFrame& req) {
    channel.write_all(encode_frame(req));
    std::array<std::uint8_t, kFrameSize> buf;
    if (!channel.read_exact(buf.data(), buf.size()))
        throw IoError("oracle channel closed");
    return decode_frame(buf);
}

[[noreturn]] void raise_error_frame(const WireFrame& rsp) {
    std::uint8_t reason = static_cast<std::uint8_t>(rsp.payload);
    if (rsp.opcode == kOpError) {
        if (reason == kErrUnknownOpcode)
            throw UnknownOpcodeError("oracle: unknown opcode");
        if (reason == kErrPoolRange)
            throw Error("oracle: pool index out of range");
        throw Error("oracle: error reason " + std::to_string(reason));
    }
    throw Error("oracle: unexpected response opcode " +
                std::to_string(rsp.opcode));
}

} // namespace

cipher::Chunk client_decode(Channel& channel, cipher::CipherKey key) {
    WireFrame rsp = round_trip(channel, {kOpDecode, key.value});
    if (rsp.opcode != kOpDecodeOk) raise_error_frame(rsp);
    return cipher::Chunk{rsp.payload};
}

cipher::CipherKey client_mutate(Channel& channel, std::uint32_t pool_index) {
    WireFrame rsp = round_trip(channel, {kOpMutate, pool_index});
    if (rsp.opcode != kOpMutateOk) raise_error_frame(rsp);
    return cipher::CipherKey{rsp.payload};
}

} // namespace armoury::oracle
