#include <algorithm>

#include <spdlog/spdlog.h>

#include "harnode/error.hpp"
#include "harnode/pipeline.hpp"

namespace harnode::pipeline {

std::vector<server::RecordRow> sort_and_dedupe(std::vector<server::RecordRow> rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.t_server_us < b.t_server_us; });
    rows.erase(std::unique(rows.begin(), rows.end(),
                           [](const auto& a, const auto& b) { return a.t_server_us == b.t_server_us; }),
               rows.end());
    return rows;
}

SessionData load_session(const std::filesystem::path& session_dir) {
    SessionData data;
    data.session = server::read_manifest(session_dir);
    for (const auto& [id, position] : data.session.positions) {
        const auto path = session_dir / ("node_" + std::to_string(id) + ".csv");
        if (!std::filesystem::exists(path)) {
            spdlog::warn("{}: node {} has a position but no data", session_dir.string(), id);
            continue;
        }
        data.nodes.push_back({id, position, sort_and_dedupe(server::read_node_csv(path))});
    }
    for (const auto& entry : std::filesystem::directory_iterator(session_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("node_", 0) != 0 || entry.path().extension() != ".csv") continue;
        const auto id = std::stoi(name.substr(5, name.size() - 9));
        if (!data.session.positions.contains(static_cast<std::uint8_t>(id))) {
            spdlog::warn("{}: skipping node {} without a position", session_dir.string(), id);
        }
    }
    std::sort(data.nodes.begin(), data.nodes.end(), [](const auto& a, const auto& b) {
        return std::pair(a.position.index(), a.node_id) < std::pair(b.position.index(), b.node_id);
    });
    if (data.nodes.empty()) throw InputError(session_dir.string() + " holds no positioned node data");
    return data;
}

}  // namespace harnode::pipeline
