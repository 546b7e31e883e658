#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "harnode/server_json.hpp"

namespace harnode::server {

using nlohmann::json;

json status_to_json(const NodeStatus& s) {
    json j = {
        {"node_id", s.node_id},
        {"position", s.position ? json(s.position->to_string()) : json(nullptr)},
        {"last_seen_us", s.last_seen_us},
        {"packet_rate_hz", s.packet_rate_hz},
        {"last_seq", s.last_seq},
        {"loss_count", s.loss_count},
        {"packets_received", s.packets_received},
        {"last_sync_offset_us", s.last_sync_offset_us ? json(*s.last_sync_offset_us) : json(nullptr)},
        {"sync_age_us", s.sync_age_us ? json(*s.sync_age_us) : json(nullptr)},
        {"stale", s.stale},
    };
    return j;
}

json session_to_json(const Session& s) {
    json positions = json::object();
    for (const auto& [id, pos] : s.positions) positions[std::to_string(id)] = pos.to_string();
    json j = {
        {"session_id", s.session_id},
        {"started_at_us", s.started_at_us},
        {"stopped_at_us", s.stopped_at_us ? json(*s.stopped_at_us) : json(nullptr)},
        {"positions", positions},
        {"directory", s.directory.string()},
        {"rows_written", s.rows_written},
        {"active", !s.stopped_at_us.has_value()},
    };
    if (s.subject) {
        j["subject"] = {{"id", s.subject->subject_id},
                        {"footedness", std::string(footedness_name(s.subject->footedness))}};
    }
    return j;
}

BodyPosition parse_position_json(const json& j) {
    if (j.is_string()) {
        auto p = BodyPosition::parse(j.get<std::string>());
        if (!p) throw InvalidArgument("unknown position '" + j.get<std::string>() + "'");
        return *p;
    }
    if (!j.is_object() || !j.contains("location")) throw InvalidArgument("position needs a location");
    const auto loc = parse_location(j.at("location").get<std::string>());
    if (!loc) throw InvalidArgument("unknown location '" + j.at("location").get<std::string>() + "'");
    auto ori = Orientation::Front;
    if (j.contains("orientation")) {
        const auto o = parse_orientation(j.at("orientation").get<std::string>());
        if (!o) throw InvalidArgument("unknown orientation '" + j.at("orientation").get<std::string>() + "'");
        ori = *o;
    }
    return {*loc, ori};
}

std::map<std::uint8_t, BodyPosition> parse_position_map(const json& j) {
    std::map<std::uint8_t, BodyPosition> out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw InvalidArgument("position_map must be an object");
    for (const auto& [key, value] : j.items()) {
        int id = -1;
        try {
            id = std::stoi(key);
        } catch (const std::exception&) {
        }
        if (id < 0 || id > 255) throw InvalidArgument("bad node id '" + key + "'");
        out[static_cast<std::uint8_t>(id)] = parse_position_json(value);
    }
    return out;
}

struct ControlApi::Impl {
    ServerCore& core;
    std::string bind_address;
    std::int64_t status_period_ms;
    std::optional<std::filesystem::path> results_dir;
    httplib::Server http;
    std::thread thread;

    std::mutex mutex;
    std::condition_variable changed;
    std::deque<std::pair<std::uint64_t, std::string>> lifecycle;  // seq, SSE frame
    std::uint64_t next_seq = 1;
    bool closing = false;

    Impl(ServerCore& c, std::string addr, std::int64_t period, std::optional<std::filesystem::path> results)
        : core(c), bind_address(std::move(addr)), status_period_ms(period), results_dir(std::move(results)) {}

    void publish(const SessionEvent& ev) {
        const char* name = ev.kind == SessionEventKind::Started ? "session_started" : "session_stopped";
        std::string frame = std::string("event: ") + name + "\ndata: " + session_to_json(ev.session).dump() + "\n\n";
        {
            std::lock_guard lock(mutex);
            lifecycle.emplace_back(next_seq++, std::move(frame));
            if (lifecycle.size() > 256) lifecycle.pop_front();
        }
        changed.notify_all();
    }

    std::string status_frame() const {
        json arr = json::array();
        for (const auto& s : core.snapshot_status()) arr.push_back(status_to_json(s));
        json payload = {{"server_time_us", core.now()}, {"nodes", arr}};
        if (auto active = core.active_session()) payload["active_session"] = session_to_json(*active);
        return "event: status\ndata: " + payload.dump() + "\n\n";
    }

    void routes();
};

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    reply_json(res, status, {{"error", kind}, {"message", message}});
}

}  // namespace

void ControlApi::Impl::routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
        json arr = json::array();
        for (const auto& s : core.snapshot_status()) arr.push_back(status_to_json(s));
        reply_json(res, 200, arr);
    });

    http.Post("/session/start", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = req.body.empty() ? json::object() : json::parse(req.body);
            auto positions = parse_position_map(body.value("position_map", json(nullptr)));
            std::optional<SubjectInfo> subject;
            if (body.contains("subject") && body["subject"].is_object()) {
                SubjectInfo info;
                info.subject_id = body["subject"].value("id", 0u);
                const auto foot = parse_footedness(body["subject"].value("footedness", std::string("right")));
                if (!foot) throw InvalidArgument("bad footedness");
                info.footedness = *foot;
                subject = info;
            }
            std::optional<std::string> labels;
            if (body.contains("label_file") && body["label_file"].is_string()) labels = body["label_file"];
            reply_json(res, 200, session_to_json(core.start_session(positions, subject, labels)));
        } catch (const SessionAlreadyActive& e) {
            reply_error(res, 409, "SessionAlreadyActive", e.what());
        } catch (const json::exception& e) {
            reply_error(res, 400, "BadRequest", e.what());
        } catch (const InvalidArgument& e) {
            reply_error(res, 400, "BadRequest", e.what());
        }
    });

    http.Post("/session/stop", [this](const httplib::Request&, httplib::Response& res) {
        try {
            reply_json(res, 200, session_to_json(core.stop_session()));
        } catch (const NoActiveSession& e) {
            reply_error(res, 409, "NoActiveSession", e.what());
        }
    });

    http.Post(R"(/node/(\d+)/position)", [this](const httplib::Request& req, httplib::Response& res) {
        const int id = std::stoi(req.matches[1]);
        const auto nodes = core.snapshot_status();
        const bool known =
            std::any_of(nodes.begin(), nodes.end(), [&](const NodeStatus& s) { return s.node_id == id; });
        if (id > 255 || !known) {
            reply_error(res, 404, "UnknownNode", "node " + std::to_string(id) + " has not been seen");
            return;
        }
        try {
            const auto pos = parse_position_json(json::parse(req.body));
            core.set_position(static_cast<std::uint8_t>(id), pos);
            reply_json(res, 200, {{"node_id", id}, {"position", pos.to_string()}});
        } catch (const json::exception& e) {
            reply_error(res, 400, "BadRequest", e.what());
        } catch (const InvalidArgument& e) {
            reply_error(res, 400, "BadRequest", e.what());
        }
    });

    http.Post(R"(/node/(\d+)/identify)", [this](const httplib::Request& req, httplib::Response& res) {
        const int id = std::stoi(req.matches[1]);
        if (id > 255) {
            reply_error(res, 404, "UnknownNode", "bad node id");
            return;
        }
        core.identify(static_cast<std::uint8_t>(id));
        reply_json(res, 200, {{"node_id", id}, {"identify", true}});
    });

    http.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        json arr = json::array();
        for (const auto& s : core.sessions()) arr.push_back(session_to_json(s));
        reply_json(res, 200, arr);
    });

    http.Get(R"(/session/(\d+)/manifest)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto id = static_cast<std::uint32_t>(std::stoul(req.matches[1]));
        const auto path = session_directory(core.config().storage_root, id) / "manifest.json";
        std::ifstream in(path);
        if (!in) {
            reply_error(res, 404, "UnknownSession", "no session " + std::to_string(id));
            return;
        }
        res.set_content(std::string(std::istreambuf_iterator<char>(in), {}), "application/json");
    });

    http.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
        std::uint64_t seen;
        {
            std::lock_guard lock(mutex);
            seen = next_seq - 1;
        }
        auto last_status = std::make_shared<std::chrono::steady_clock::time_point>();
        auto cursor = std::make_shared<std::uint64_t>(seen);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, last_status, cursor](
                                                                  std::size_t, httplib::DataSink& sink) {
            const auto period = std::chrono::milliseconds(status_period_ms);
            std::vector<std::string> frames;
            {
                std::unique_lock lock(mutex);
                const auto deadline = *last_status + period;
                changed.wait_until(lock, deadline, [&] {
                    return closing || (!lifecycle.empty() && lifecycle.back().first > *cursor);
                });
                if (closing) return false;
                for (const auto& [seq, frame] : lifecycle) {
                    if (seq > *cursor) {
                        frames.push_back(frame);
                        *cursor = seq;
                    }
                }
            }
            if (std::chrono::steady_clock::now() >= *last_status + period) {
                frames.push_back(status_frame());
                *last_status = std::chrono::steady_clock::now();
            }
            for (const auto& f : frames) {
                if (!sink.write(f.data(), f.size())) return false;
            }
            return true;
        });
    });

    if (results_dir) http.set_mount_point("/results", results_dir->string());
}

ControlApi::ControlApi(ServerCore& core, std::string bind_address, std::uint16_t port, std::int64_t status_period_ms,
                       std::optional<std::filesystem::path> results_dir)
    : impl_(std::make_shared<Impl>(core, std::move(bind_address), status_period_ms, std::move(results_dir))),
      port_(port) {
    impl_->core.on_session_event([weak = std::weak_ptr<Impl>(impl_)](const SessionEvent& ev) {
        if (auto impl = weak.lock()) impl->publish(ev);
    });
    impl_->routes();
}

ControlApi::~ControlApi() { stop(); }

void ControlApi::start() {
    if (port_ == 0) {
        const int bound = impl_->http.bind_to_any_port(impl_->bind_address);
        if (bound <= 0) throw ConfigError("cannot bind HTTP on " + impl_->bind_address);
        port_ = static_cast<std::uint16_t>(bound);
    } else if (!impl_->http.bind_to_port(impl_->bind_address, port_)) {
        throw ConfigError("cannot bind HTTP " + impl_->bind_address + ":" + std::to_string(port_));
    }
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    spdlog::info("control API on {}:{}", impl_->bind_address, port_);
}

void ControlApi::stop() {
    if (!impl_) return;
    {
        std::lock_guard lock(impl_->mutex);
        impl_->closing = true;
    }
    impl_->changed.notify_all();
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace harnode::server
