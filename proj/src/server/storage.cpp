#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "harnode/server.hpp"

namespace harnode::server {
namespace {

using nlohmann::json;

template <typename T>
void append_number(std::string& out, T value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, end);
}

template <typename T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t lineno) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad field '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

std::filesystem::path session_directory(const std::filesystem::path& root, std::uint32_t session_id) {
    char name[32];
    std::snprintf(name, sizeof(name), "session_%04u", session_id);
    return root / name;
}

std::string csv_header() { return "t_server_us,node_id,seq,ax,ay,az,gx,gy,gz,mx,my,mz"; }

std::string format_row(const RecordRow& row) {
    std::string out;
    out.reserve(128);
    append_number(out, row.t_server_us);
    out.push_back(',');
    append_number(out, static_cast<int>(row.node_id));
    out.push_back(',');
    append_number(out, row.seq);
    for (float v : row.values) {
        out.push_back(',');
        append_number(out, v);
    }
    return out;
}

std::vector<RecordRow> read_node_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != csv_header()) throw InputError(path.string() + ": unexpected header");
    std::vector<RecordRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string_view rest(line);
        std::array<std::string_view, 12> fields;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (i == fields.size() - 1)) {
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 12 fields");
            }
            fields[i] = rest.substr(0, comma);
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
        RecordRow row;
        row.t_server_us = parse_field<std::int64_t>(fields[0], path, lineno);
        row.node_id = static_cast<std::uint8_t>(parse_field<int>(fields[1], path, lineno));
        row.seq = parse_field<std::int64_t>(fields[2], path, lineno);
        for (std::size_t k = 0; k < 9; ++k) row.values[k] = parse_field<float>(fields[3 + k], path, lineno);
        rows.push_back(row);
    }
    return rows;
}

void write_manifest(const Session& session, const ServerConfig& config) {
    json positions = json::object();
    for (const auto& [id, pos] : session.positions) positions[std::to_string(id)] = pos.to_string();

    json nodes = json::object();
    if (std::filesystem::exists(session.directory)) {
        for (const auto& entry : std::filesystem::directory_iterator(session.directory)) {
            const auto name = entry.path().filename().string();
            if (name.rfind("node_", 0) == 0 && entry.path().extension() == ".csv") {
                nodes[name.substr(5, name.size() - 9)] = name;
            }
        }
    }

    json m = {
        {"session_id", session.session_id},
        {"started_at_us", session.started_at_us},
        {"stopped_at_us", session.stopped_at_us ? json(*session.stopped_at_us) : json(nullptr)},
        {"positions", positions},
        {"node_files", nodes},
        {"rows_written", session.rows_written},
        {"sampling_interval_us", config.sampling_interval_us},
        {"config_hash", config.config_hash},
        {"label_file", session.label_file ? json(*session.label_file) : json(nullptr)},
    };
    if (session.subject) {
        m["subject"] = {{"id", session.subject->subject_id},
                        {"footedness", std::string(footedness_name(session.subject->footedness))}};
    } else {
        m["subject"] = nullptr;
    }
    const auto tmp = session.directory / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write manifest in " + session.directory.string());
        out << m.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, session.directory / "manifest.json");
}

Session read_manifest(const std::filesystem::path& session_dir) {
    std::ifstream in(session_dir / "manifest.json");
    if (!in) throw InputError("no manifest in " + session_dir.string());
    json m;
    try {
        m = json::parse(in);
        Session s;
        s.session_id = m.at("session_id").get<std::uint32_t>();
        s.started_at_us = m.at("started_at_us").get<std::int64_t>();
        if (!m.at("stopped_at_us").is_null()) s.stopped_at_us = m.at("stopped_at_us").get<std::int64_t>();
        for (const auto& [id, pos] : m.at("positions").items()) {
            const auto parsed = BodyPosition::parse(pos.get<std::string>());
            if (!parsed) throw InputError("bad position '" + pos.get<std::string>() + "' in manifest");
            s.positions[static_cast<std::uint8_t>(std::stoi(id))] = *parsed;
        }
        s.directory = session_dir;
        s.rows_written = m.value("rows_written", std::uint64_t{0});
        if (m.contains("subject") && !m["subject"].is_null()) {
            SubjectInfo subject;
            subject.subject_id = m["subject"].at("id").get<std::uint32_t>();
            const auto foot = parse_footedness(m["subject"].at("footedness").get<std::string>());
            if (!foot) throw InputError("bad footedness in manifest");
            subject.footedness = *foot;
            s.subject = subject;
        }
        if (m.contains("label_file") && !m["label_file"].is_null()) s.label_file = m["label_file"].get<std::string>();
        return s;
    } catch (const json::exception& e) {
        throw InputError("malformed manifest in " + session_dir.string() + ": " + e.what());
    }
}

SessionWriter::SessionWriter(std::filesystem::path directory)
    : directory_(std::move(directory)), worker_([this] { run(); }) {}

SessionWriter::~SessionWriter() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    worker_.join();
}

void SessionWriter::append(std::uint8_t node_id, std::vector<RecordRow> rows) {
    {
        std::lock_guard lock(mutex_);
        queue_.emplace_back(node_id, std::move(rows));
    }
    wake_.notify_one();
}

void SessionWriter::flush() {
    std::unique_lock lock(mutex_);
    drained_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void SessionWriter::run() {
    std::map<std::uint8_t, std::ofstream> files;
    std::unique_lock lock(mutex_);
    for (;;) {
        wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty() && stopping_) break;
        auto batch = std::move(queue_);
        queue_.clear();
        busy_ = true;
        lock.unlock();

        std::string text;
        for (auto& [node_id, rows] : batch) {
            auto it = files.find(node_id);
            if (it == files.end()) {
                const auto path = directory_ / ("node_" + std::to_string(node_id) + ".csv");
                const bool fresh = !std::filesystem::exists(path);
                it = files.emplace(node_id, std::ofstream(path, std::ios::app)).first;
                if (fresh) it->second << csv_header() << '\n';
            }
            text.clear();
            for (const auto& row : rows) {
                text += format_row(row);
                text.push_back('\n');
            }
            it->second << text;
            rows_written_ += rows.size();
        }
        for (auto& [id, f] : files) f.flush();

        lock.lock();
        busy_ = false;
        if (queue_.empty()) drained_.notify_all();
    }
    lock.unlock();
    for (auto& [id, f] : files) f.close();
}

}  // namespace harnode::server
