#include <spdlog/spdlog.h>

#include "harnode/net.hpp"
#include "harnode/server.hpp"

namespace harnode::server {

UdpServer::UdpServer(ServerCore& core, UdpPorts ports) : core_(core), ports_(std::move(ports)) {}

UdpServer::~UdpServer() { stop(); }

void UdpServer::start() {
    sync_socket_ = std::make_unique<UdpSocket>();
    sync_socket_->bind(ports_.bind_address, ports_.sync);
    data_socket_ = std::make_unique<UdpSocket>();
    data_socket_->set_receive_buffer(8 << 20);
    data_socket_->bind(ports_.bind_address, ports_.data);
    control_socket_ = std::make_unique<UdpSocket>();
    control_socket_->enable_broadcast();

    running_ = true;
    sync_thread_ = std::thread([this] { sync_loop(); });
    data_thread_ = std::thread([this] { data_loop(); });
    spdlog::info("listening: sync {} data {} control->{}:{}", sync_socket_->local_port(), data_socket_->local_port(),
                 ports_.broadcast_address, ports_.control);
}

void UdpServer::stop() {
    if (!running_.exchange(false)) return;
    if (sync_thread_.joinable()) sync_thread_.join();
    if (data_thread_.joinable()) data_thread_.join();
}

std::uint16_t UdpServer::sync_port() const { return sync_socket_ ? sync_socket_->local_port() : ports_.sync; }

std::uint16_t UdpServer::data_port() const { return data_socket_ ? data_socket_->local_port() : ports_.data; }

ControlSink UdpServer::control_sink() {
    return [this](const protocol::ControlMessage& msg, std::optional<std::uint8_t> node) { send_control(msg, node); };
}

void UdpServer::send_control(const protocol::ControlMessage& msg, std::optional<std::uint8_t> node) {
    if (!control_socket_) return;
    const auto bytes = protocol::encode_control(msg);
    if (!node) {
        control_socket_->send_to(Endpoint::resolve(ports_.broadcast_address, ports_.control), bytes);
        return;
    }
    std::lock_guard lock(endpoints_mutex_);
    auto it = node_endpoints_.find(*node);
    if (it == node_endpoints_.end()) {
        spdlog::warn("identify: node {} has no known address", *node);
        return;
    }
    control_socket_->send_to({it->second.first, it->second.second}, bytes);
}

void UdpServer::sync_loop() {
    using namespace std::chrono_literals;
    while (running_) {
        auto d = sync_socket_->receive(100ms);
        if (!d) continue;
        const auto recv = core_.now();
        if (auto response = core_.handle_sync_request(d->bytes, recv)) sync_socket_->send_to(d->from, *response);
    }
}

void UdpServer::data_loop() {
    using namespace std::chrono_literals;
    while (running_) {
        auto d = data_socket_->receive(100ms);
        while (d) {
            const auto recv = core_.now();
            if (!d->bytes.empty()) {
                std::lock_guard lock(endpoints_mutex_);
                node_endpoints_[d->bytes[0]] = {d->from.address, d->from.port};
            }
            core_.ingest_datagram(d->bytes, recv);
            d = data_socket_->try_receive();
        }
    }
}

}  // namespace harnode::server
