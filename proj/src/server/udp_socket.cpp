#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "harnode/error.hpp"
#include "harnode/net.hpp"

namespace harnode::server {
namespace {

sockaddr_in to_sockaddr(const Endpoint& ep) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(ep.address);
    sa.sin_port = htons(ep.port);
    return sa;
}

}  // namespace

Endpoint Endpoint::resolve(const std::string& host, std::uint16_t port) {
    in_addr addr{};
    if (inet_pton(AF_INET, host.c_str(), &addr) == 1) return {ntohl(addr.s_addr), port};
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* result = nullptr;
    if (getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
        throw ConfigError("cannot resolve host '" + host + "'");
    }
    const auto* sa = reinterpret_cast<const sockaddr_in*>(result->ai_addr);
    Endpoint ep{ntohl(sa->sin_addr.s_addr), port};
    freeaddrinfo(result);
    return ep;
}

std::string Endpoint::to_string() const {
    char buf[INET_ADDRSTRLEN];
    in_addr a{htonl(address)};
    inet_ntop(AF_INET, &a, buf, sizeof(buf));
    return std::string(buf) + ":" + std::to_string(port);
}

UdpSocket::UdpSocket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw ConfigError(std::string("socket(): ") + std::strerror(errno));
}

UdpSocket::~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void UdpSocket::bind(const std::string& address, std::uint16_t port, bool reuse) {
    if (reuse) {
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    }
    const auto sa = to_sockaddr(Endpoint::resolve(address, port));
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa)) != 0) {
        throw ConfigError("cannot bind UDP " + address + ":" + std::to_string(port) + ": " + std::strerror(errno));
    }
}

void UdpSocket::enable_broadcast() {
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_BROADCAST, &one, sizeof(one));
}

void UdpSocket::set_receive_buffer(int bytes) { ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof(bytes)); }

std::uint16_t UdpSocket::local_port() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    return ntohs(sa.sin_port);
}

void UdpSocket::send_to(const Endpoint& to, std::span<const std::uint8_t> bytes) {
    const auto sa = to_sockaddr(to);
    ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
}

std::optional<Datagram> UdpSocket::receive(std::chrono::milliseconds timeout) {
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (ready <= 0 || !(p.revents & POLLIN)) return std::nullopt;
    return try_receive();
}

std::optional<Datagram> UdpSocket::try_receive() {
    std::uint8_t buf[2048];
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    const auto n = ::recvfrom(fd_, buf, sizeof(buf), MSG_DONTWAIT, reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) return std::nullopt;
    Datagram d;
    d.bytes.assign(buf, buf + n);
    d.from = {ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)};
    return d;
}

void UdpSocket::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

}  // namespace harnode::server
