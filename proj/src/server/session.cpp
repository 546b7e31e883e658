#include <spdlog/spdlog.h>

#include "harnode/server.hpp"

namespace harnode::server {

Session ServerCore::start_session(const std::map<std::uint8_t, BodyPosition>& positions,
                                  std::optional<SubjectInfo> subject, std::optional<std::string> label_file) {
    Session session;
    {
        std::lock_guard lock(mutex_);
        if (active_) throw SessionAlreadyActive("session " + std::to_string(active_->session_id) + " is active");
        while (std::filesystem::exists(session_directory(config_.storage_root, next_session_id_))) {
            ++next_session_id_;
        }
        session.session_id = next_session_id_++;
        session.started_at_us = now_();
        session.positions = positions;
        session.subject = subject;
        session.label_file = std::move(label_file);
        session.directory = session_directory(config_.storage_root, session.session_id);
        std::filesystem::create_directories(session.directory);
        write_manifest(session, config_);

        for (const auto& [id, pos] : positions) {
            assigned_positions_[id] = pos;
            node_locked(id).status.position = pos;
        }
        for (auto& [id, node] : nodes_) node.status.loss_count = 0;
        writer_ = std::make_unique<SessionWriter>(session.directory);
        active_ = session;
    }
    spdlog::info("session {} started with {} mapped nodes", session.session_id, positions.size());
    if (control_) {
        control_({protocol::ControlKind::StartRecording, session.session_id,
                  static_cast<std::uint64_t>(session.started_at_us)},
                 std::nullopt);
    }
    emit({SessionEventKind::Started, session});
    return session;
}

Session ServerCore::stop_session() {
    Session session;
    std::unique_ptr<SessionWriter> writer;
    {
        std::lock_guard lock(mutex_);
        if (!active_) throw NoActiveSession("no active session");
        session = *active_;
        active_.reset();
        writer = std::move(writer_);
    }
    session.stopped_at_us = now_();
    if (control_) {
        control_({protocol::ControlKind::StopRecording, session.session_id,
                  static_cast<std::uint64_t>(*session.stopped_at_us)},
                 std::nullopt);
    }
    writer->flush();
    session.rows_written = writer->rows_written();
    writer.reset();
    write_manifest(session, config_);
    {
        std::lock_guard lock(mutex_);
        finished_sessions_.push_back(session);
    }
    spdlog::info("session {} stopped, {} rows", session.session_id, session.rows_written);
    emit({SessionEventKind::Stopped, session});
    return session;
}

std::optional<Session> ServerCore::active_session() const {
    std::lock_guard lock(mutex_);
    return active_;
}

std::vector<Session> ServerCore::sessions() const {
    std::lock_guard lock(mutex_);
    auto out = finished_sessions_;
    if (active_) out.push_back(*active_);
    return out;
}

std::optional<Session> ServerCore::find_session(std::uint32_t id) const {
    for (auto& s : sessions()) {
        if (s.session_id == id) return s;
    }
    const auto dir = session_directory(config_.storage_root, id);
    if (std::filesystem::exists(dir / "manifest.json")) return read_manifest(dir);
    return std::nullopt;
}

void ServerCore::flush() {
    std::lock_guard lock(mutex_);
    if (writer_) writer_->flush();
}

void ServerCore::on_session_event(std::function<void(const SessionEvent&)> listener) {
    std::lock_guard lock(listener_mutex_);
    listeners_.push_back(std::move(listener));
}

void ServerCore::emit(const SessionEvent& event) {
    std::lock_guard lock(listener_mutex_);
    for (const auto& l : listeners_) l(event);
}

}  // namespace harnode::server
