#include <fstream>
#include <random>
#include <set>

#include "harnode/error.hpp"
#include "harnode/simnode.hpp"

namespace harnode::sim {

using nlohmann::json;

namespace {

std::int64_t seconds_to_us(double s) { return static_cast<std::int64_t>(std::llround(s * 1e6)); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

BodyPosition position_from(const json& j) {
    if (!j.is_string()) throw ConfigError("node position must be a string like right_foot/front");
    const auto p = BodyPosition::parse(j.get<std::string>());
    if (!p) throw ConfigError("unknown position '" + j.get<std::string>() + "'");
    return *p;
}

StudyScript study_from(const json& j) {
    StudyScript s;
    s.subjects = get_or(j, "subjects", s.subjects);
    s.ascent_approaches = get_or(j, "ascent_approaches", s.ascent_approaches);
    s.descent_approaches = get_or(j, "descent_approaches", s.descent_approaches);
    s.level_walking_s = get_or(j, "level_walking_s", s.level_walking_s);
    s.lead_in_min_s = get_or(j, "lead_in_min_s", s.lead_in_min_s);
    s.lead_in_max_s = get_or(j, "lead_in_max_s", s.lead_in_max_s);
    s.approach_min_s = get_or(j, "approach_min_s", s.approach_min_s);
    s.approach_max_s = get_or(j, "approach_max_s", s.approach_max_s);
    s.gap_between_subjects_s = get_or(j, "gap_between_subjects_s", s.gap_between_subjects_s);
    s.left_footed_subjects = get_or(j, "left_footed_subjects", s.left_footed_subjects);
    if (s.lead_in_min_s <= 0 || s.lead_in_max_s < s.lead_in_min_s || s.approach_min_s <= 0 ||
        s.approach_max_s < s.approach_min_s || s.level_walking_s < 0) {
        throw ConfigError("study durations must be positive with min <= max");
    }
    return s;
}

Schedule schedule_from(const json& j, std::int64_t anchor) {
    if (!j.is_array()) throw ConfigError("schedule must be an array of subjects");
    Schedule schedule;
    for (const auto& sj : j) {
        SubjectSchedule s;
        s.subject_id = get_or(sj, "subject_id", 0u);
        const auto foot = parse_footedness(get_or(sj, "footedness", std::string("right")));
        if (!foot) throw ConfigError("bad footedness");
        s.footedness = *foot;
        for (const auto& seg : sj.value("segments", json::array())) {
            const auto label = parse_activity(get_or(seg, "label", std::string("walking")));
            if (!label) throw ConfigError("bad segment label");
            s.segments.push_back({anchor + seconds_to_us(seg.at("start_s").get<double>()),
                                  anchor + seconds_to_us(seg.at("end_s").get<double>()), *label});
        }
        schedule.subjects.push_back(std::move(s));
    }
    try {
        validate_schedule(schedule);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return schedule;
}

}  // namespace

void check_unique_ids(const std::vector<NodeConfig>& nodes) {
    std::set<std::uint8_t> seen;
    for (const auto& n : nodes) {
        if (!seen.insert(n.node_id).second) throw ConfigError("duplicate node id " + std::to_string(n.node_id));
    }
}

std::vector<NodeConfig> make_nodes(std::size_t count, std::uint64_t seed, double max_drift, double jitter_std_us) {
    if (count == 0 || count > 255) throw ConfigError("node count must be 1..255");
    if (max_drift < 0 || max_drift > clocksync::kMaxDriftRate) throw ConfigError("max_drift must be within 1e-4");
    std::mt19937_64 rng(hash_combine(seed, 0xF1EE7ULL));
    std::uniform_real_distribution<double> drift(-max_drift, max_drift);
    std::uniform_int_distribution<std::int64_t> boot(0, 2'000'000);
    const auto locations = all_locations();
    std::vector<NodeConfig> nodes;
    for (std::size_t i = 0; i < count; ++i) {
        NodeConfig n;
        n.node_id = static_cast<std::uint8_t>(i + 1);
        n.position = {locations[i % kLocationCount],
                      static_cast<Orientation>((i / kLocationCount) % kOrientationCount)};
        n.drift.drift_rate = drift(rng);
        n.drift.initial_offset_us = boot(rng);
        n.drift.jitter_std_us = jitter_std_us;
        nodes.push_back(n);
    }
    return nodes;
}

FleetConfig parse_fleet_config(const json& doc, std::int64_t start_us) {
    if (!doc.is_object()) throw ConfigError("fleet config must be a JSON object");
    FleetConfig c;
    c.seed = get_or(doc, "seed", c.seed);
    c.start_us = start_us;

    const auto interval = get_or<std::int64_t>(doc, "sampling_interval_us", 6000);
    const auto per_packet = get_or<std::size_t>(doc, "samples_per_packet", 30);
    const auto version = get_or(doc, "packet_version", 2);
    const auto resync = seconds_to_us(get_or(doc, "resync_interval_s", 60.0));

    const json nodes = doc.value("nodes", json{{"count", 11}});
    if (nodes.is_array()) {
        std::mt19937_64 rng(hash_combine(c.seed, 0xB007ULL));
        std::uniform_int_distribution<std::int64_t> boot(0, 2'000'000);
        for (const auto& nj : nodes) {
            NodeConfig n;
            const auto id = get_or(nj, "id", -1);
            if (id < 0 || id > 255) throw ConfigError("node id must be 0..255");
            n.node_id = static_cast<std::uint8_t>(id);
            n.position = position_from(nj.value("position", json(nullptr)));
            n.drift.drift_rate = get_or(nj, "drift_rate", 0.0);
            n.drift.initial_offset_us = get_or<std::int64_t>(nj, "initial_offset_us", boot(rng));
            n.drift.jitter_std_us = get_or(nj, "jitter_std_us", 10.0);
            if (std::abs(n.drift.drift_rate) > clocksync::kMaxDriftRate) throw ConfigError("drift_rate exceeds 1e-4");
            c.nodes.push_back(n);
        }
    } else if (nodes.is_object()) {
        c.nodes = make_nodes(get_or<std::size_t>(nodes, "count", 11), c.seed, get_or(nodes, "max_drift", 5e-6),
                             get_or(nodes, "jitter_std_us", 10.0));
    } else {
        throw ConfigError("nodes must be a list or {count: N}");
    }
    if (c.nodes.empty()) throw ConfigError("fleet has no nodes");
    check_unique_ids(c.nodes);
    for (auto& n : c.nodes) {
        n.sampling_interval_us = interval;
        n.samples_per_packet = per_packet;
        n.packet_version = version;
        n.resync_interval_us = resync;
    }

    if (doc.contains("network")) {
        const auto& nj = doc["network"];
        c.network.delay_min_us = get_or(nj, "delay_min_us", c.network.delay_min_us);
        c.network.delay_max_us = get_or(nj, "delay_max_us", c.network.delay_max_us);
        c.network.loss_probability = get_or(nj, "loss_probability", c.network.loss_probability);
        c.network.symmetric_sync = get_or(nj, "symmetric_sync", c.network.symmetric_sync);
        c.network.server_processing_us = get_or(nj, "server_processing_us", c.network.server_processing_us);
    }
    if (c.network.delay_min_us < 0 || c.network.delay_max_us < c.network.delay_min_us) {
        throw ConfigError("network delays must satisfy 0 <= min <= max");
    }
    if (c.network.loss_probability < 0 || c.network.loss_probability > 1) throw ConfigError("loss_probability in [0,1]");

    if (doc.contains("server")) {
        const auto& sj = doc["server"];
        c.server_host = get_or(sj, "host", c.server_host);
        c.sync_port = get_or(sj, "sync_port", c.sync_port);
        c.data_port = get_or(sj, "data_port", c.data_port);
        c.control_port = get_or(sj, "control_port", c.control_port);
        c.http_port = get_or(sj, "http_port", c.http_port);
    }

    const auto warmup = seconds_to_us(get_or(doc, "warmup_s", 3.0));
    const auto anchor = start_us + warmup;
    if (doc.contains("schedule")) {
        c.schedule = schedule_from(doc["schedule"], anchor);
    } else if (doc.contains("study")) {
        c.schedule = build_study_schedule(study_from(doc["study"]), anchor, c.seed);
    }

    if (doc.contains("duration_s")) {
        c.duration_us = seconds_to_us(doc["duration_s"].get<double>());
    } else if (!c.schedule.subjects.empty()) {
        c.duration_us = c.schedule.end_us() - start_us + seconds_to_us(2.0);
    } else {
        c.duration_us = seconds_to_us(60.0);
    }
    if (c.duration_us <= 0) throw ConfigError("duration must be positive");

    c.manage_sessions = get_or(doc, "manage_sessions", c.manage_sessions);
    c.session_margin_us = seconds_to_us(get_or(doc, "session_margin_s", 0.5));
    if (doc.contains("label_file") && doc["label_file"].is_string()) c.label_file = doc["label_file"];
    c.keep_packet_log = get_or(doc, "keep_packet_log", false);

    if (doc.contains("gait")) {
        const auto& gj = doc["gait"];
        c.gait.step_frequency_hz = get_or(gj, "step_frequency_hz", c.gait.step_frequency_hz);
        c.gait.stairs_frequency_drop = get_or(gj, "stairs_frequency_drop", c.gait.stairs_frequency_drop);
        c.gait.stairs_amplitude_gain = get_or(gj, "stairs_amplitude_gain", c.gait.stairs_amplitude_gain);
        c.gait.wander_scale = get_or(gj, "wander_scale", c.gait.wander_scale);
        c.gait.artifact_probability = get_or(gj, "artifact_probability", c.gait.artifact_probability);
        c.gait.artifact_slot_s = get_or(gj, "artifact_slot_s", c.gait.artifact_slot_s);
        if (c.gait.artifact_probability < 0 || c.gait.artifact_probability > 1 || c.gait.artifact_slot_s <= 0) {
            throw ConfigError("artifact_probability must lie in [0,1] and artifact_slot_s be positive");
        }
        const double shift_scale = get_or(gj, "shift_scale", 1.0);
        const double tremor_scale = get_or(gj, "tremor_scale", 1.0);
        for (auto& site : c.gait.sites) {
            for (auto& axis : site.motion) {
                axis.shift *= shift_scale;
                axis.tremor *= tremor_scale;
            }
        }
        if (gj.contains("noise_scale")) {
            const double k = gj["noise_scale"].get<double>();
            for (auto& s : c.gait.noise_std) s *= k;
        }
    }
    return c;
}

FleetConfig load_fleet_config(const std::filesystem::path& path, std::int64_t start_us) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open fleet config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_fleet_config(doc, start_us);
}

json fleet_config_to_json(const FleetConfig& c) {
    json nodes = json::array();
    for (const auto& n : c.nodes) {
        nodes.push_back({{"id", n.node_id},
                         {"position", n.position.to_string()},
                         {"drift_rate", n.drift.drift_rate},
                         {"initial_offset_us", n.drift.initial_offset_us},
                         {"jitter_std_us", n.drift.jitter_std_us},
                         {"sampling_interval_us", n.sampling_interval_us},
                         {"samples_per_packet", n.samples_per_packet},
                         {"packet_version", n.packet_version},
                         {"resync_interval_us", n.resync_interval_us}});
    }
    json schedule = json::array();
    for (const auto& s : c.schedule.subjects) {
        json segs = json::array();
        for (const auto& seg : s.segments) {
            segs.push_back({{"start_us", seg.start_us - c.start_us},
                            {"end_us", seg.end_us - c.start_us},
                            {"label", std::string(activity_name(seg.activity))}});
        }
        schedule.push_back({{"subject_id", s.subject_id},
                            {"footedness", std::string(footedness_name(s.footedness))},
                            {"segments", segs}});
    }
    return {{"seed", c.seed},
            {"nodes", nodes},
            {"network",
             {{"delay_min_us", c.network.delay_min_us},
              {"delay_max_us", c.network.delay_max_us},
              {"loss_probability", c.network.loss_probability},
              {"symmetric_sync", c.network.symmetric_sync},
              {"server_processing_us", c.network.server_processing_us}}},
            {"server",
             {{"host", c.server_host},
              {"sync_port", c.sync_port},
              {"data_port", c.data_port},
              {"control_port", c.control_port},
              {"http_port", c.http_port}}},
            {"duration_us", c.duration_us},
            {"manage_sessions", c.manage_sessions},
            {"label_file", c.label_file ? json(*c.label_file) : json(nullptr)},
            {"gait",
             {{"step_frequency_hz", c.gait.step_frequency_hz},
              {"stairs_frequency_drop", c.gait.stairs_frequency_drop},
              {"stairs_amplitude_gain", c.gait.stairs_amplitude_gain},
              {"wander_scale", c.gait.wander_scale},
              {"artifact_probability", c.gait.artifact_probability},
              {"artifact_slot_s", c.gait.artifact_slot_s}}},
            {"schedule_relative_to_start", schedule}};
}

}  // namespace harnode::sim
