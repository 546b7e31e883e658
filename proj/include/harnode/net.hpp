#pragma once

// Thin RAII wrapper over a POSIX IPv4 UDP socket.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace harnode::server {

struct Endpoint {
    std::uint32_t address = 0;  // host byte order
    std::uint16_t port = 0;

    static Endpoint resolve(const std::string& host, std::uint16_t port);
    std::string to_string() const;
    bool operator==(const Endpoint&) const = default;
};

struct Datagram {
    std::vector<std::uint8_t> bytes;
    Endpoint from;
};

class UdpSocket {
public:
    UdpSocket();
    ~UdpSocket();
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    /// Port 0 picks an ephemeral port. Throws ConfigError on failure.
    void bind(const std::string& address, std::uint16_t port, bool reuse = false);
    void enable_broadcast();
    void set_receive_buffer(int bytes);
    std::uint16_t local_port() const;

    void send_to(const Endpoint& to, std::span<const std::uint8_t> bytes);
    /// Waits up to timeout; nullopt on timeout or after shutdown().
    std::optional<Datagram> receive(std::chrono::milliseconds timeout);
    /// Non-blocking receive.
    std::optional<Datagram> try_receive();

    void shutdown();

private:
    int fd_ = -1;
};

}  // namespace harnode::server
