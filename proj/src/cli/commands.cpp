#include "harnode/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "harnode/error.hpp"
#include "harnode/learn.hpp"
#include "harnode/pipeline.hpp"
#include "harnode/server.hpp"
#include "harnode/server_json.hpp"
#include "harnode/simnode.hpp"

namespace harnode::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

/// Fixed virtual epoch for accelerated runs so repeated runs agree byte for byte.
constexpr std::int64_t kAcceleratedEpochUs = 1'700'000'000'000'000;

/// Raised for failures caused by the machine rather than the inputs.
class EnvironmentFailure : public Error {
public:
    using Error::Error;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string digest_of(const std::string& text) {
    std::uint64_t h = 0x484152ULL;
    for (unsigned char c : text) h = sim::hash_combine(h, c);
    return hex64(h);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw EnvironmentFailure("cannot write " + path.string());
    out << text;
    if (!out) throw EnvironmentFailure("write failed for " + path.string());
}

void write_config_echo(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                       json resolved) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw EnvironmentFailure("cannot create " + dir.string() + ": " + ec.message());
    json doc = {{"command", command}, {"args", args}, {"resolved", std::move(resolved)}};
    write_text(dir / "config_echo.json", doc.dump(2) + "\n");
}

// ---------------------------------------------------------------- serve

struct ServeOptions {
    std::string bind = "0.0.0.0";
    std::uint16_t sync_port = protocol::kDefaultSyncPort;
    std::uint16_t data_port = protocol::kDefaultDataPort;
    std::uint16_t control_port = protocol::kDefaultControlPort;
    std::uint16_t http_port = 8080;
    std::string broadcast = "255.255.255.255";
    std::string storage_root = "sessions";
    std::int64_t status_period_ms = 1000;
    std::string results_dir;
    double duration_s = 0;
};

json serve_json(const ServeOptions& o) {
    return {{"bind", o.bind},
            {"sync_port", o.sync_port},
            {"data_port", o.data_port},
            {"control_port", o.control_port},
            {"http_port", o.http_port},
            {"broadcast", o.broadcast},
            {"storage_root", o.storage_root},
            {"status_period_ms", o.status_period_ms},
            {"results_dir", o.results_dir},
            {"duration_s", o.duration_s}};
}

int cmd_serve(const ServeOptions& o, const std::vector<std::string>& args) {
    const auto echo = serve_json(o);
    write_config_echo(o.storage_root, "serve", args, echo);

    server::ServerConfig config;
    config.storage_root = o.storage_root;
    config.config_hash = digest_of(echo.dump());
    server::ServerCore core(config, server::wall_clock_us);
    server::UdpServer udp(core, {o.bind, o.sync_port, o.data_port, o.control_port, o.broadcast});
    std::optional<fs::path> results;
    if (!o.results_dir.empty()) results = fs::path(o.results_dir);
    server::ControlApi api(core, o.bind, o.http_port, o.status_period_ms, results);
    try {
        udp.start();
        core.set_control_sink(udp.control_sink());
        api.start();
    } catch (const ConfigError& e) {
        spdlog::error("cannot start server: {}", e.what());
        udp.stop();
        return kEnvironmentError;
    }
    spdlog::info("serving: sync {} data {} control {} http {} storage {}", udp.sync_port(), udp.data_port(),
                 o.control_port, api.port(), o.storage_root);

    const auto started = std::chrono::steady_clock::now();
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (o.duration_s > 0 &&
            std::chrono::steady_clock::now() - started >= std::chrono::duration<double>(o.duration_s)) {
            break;
        }
    }
    api.stop();
    udp.stop();
    if (core.active_session()) core.stop_session();
    core.flush();
    return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string config;
    bool accelerated = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> nodes;
    std::optional<double> duration_s;
    std::optional<double> loss;
    std::string storage_root = "sessions";
    std::string out;
};

json load_config_doc(const SimulateOptions& o) {
    json doc = json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw InputError("cannot open fleet config " + o.config);
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw InputError(o.config + ": " + e.what());
        }
    }
    if (o.seed) doc["seed"] = *o.seed;
    if (o.nodes) {
        doc["nodes"] = {{"count", *o.nodes}};
        if (!o.config.empty()) {
            doc.erase("study");
            doc.erase("schedule");
        }
    }
    if (o.duration_s) doc["duration_s"] = *o.duration_s;
    if (o.loss) doc["network"]["loss_probability"] = *o.loss;
    return doc;
}

struct LossLine {
    std::uint8_t node_id;
    std::uint64_t sent;
    std::uint64_t dropped_in_network;
    std::uint64_t received;
    std::uint64_t loss_count;
};

std::vector<LossLine> loss_lines(const sim::FleetRunResult& run, const std::vector<server::NodeStatus>& status) {
    std::vector<LossLine> out;
    for (const auto& n : run.nodes) {
        LossLine l{n.node_id, n.packets_sent, n.packets_dropped, 0, 0};
        for (const auto& s : status) {
            if (s.node_id == n.node_id) {
                l.received = s.packets_received;
                l.loss_count = s.loss_count;
            }
        }
        out.push_back(l);
    }
    return out;
}

void report_run(const fs::path& out_dir, const sim::FleetRunResult& run, const std::vector<LossLine>& lines,
                const std::optional<std::vector<std::int64_t>>& latencies) {
    std::ostringstream csv;
    csv << "node_id,packets_sent,dropped_in_network,packets_received,server_loss_count,unaccounted\n";
    std::uint64_t sent = 0, dropped = 0, received = 0, lost = 0;
    std::int64_t unaccounted = 0;
    for (const auto& l : lines) {
        const auto gap = static_cast<std::int64_t>(l.sent) - static_cast<std::int64_t>(l.received) -
                         static_cast<std::int64_t>(l.dropped_in_network);
        csv << int(l.node_id) << ',' << l.sent << ',' << l.dropped_in_network << ',' << l.received << ','
            << l.loss_count << ',' << gap << '\n';
        sent += l.sent;
        dropped += l.dropped_in_network;
        received += l.received;
        lost += l.loss_count;
        unaccounted += gap;
    }
    write_text(out_dir / "loss_report.csv", csv.str());

    double max_err = 0;
    std::vector<double> errs;
    for (const auto& n : run.nodes) errs.insert(errs.end(), n.offset_errors_us.begin(), n.offset_errors_us.end());
    for (double e : errs) max_err = std::max(max_err, e);
    std::sort(errs.begin(), errs.end());
    const double p99 = errs.empty() ? 0 : errs[std::min(errs.size() - 1, errs.size() * 99 / 100)];

    std::cout << "nodes " << lines.size() << "  packets sent " << sent << "  dropped in network " << dropped
              << "  received " << received << "  server loss count " << lost << "  unaccounted " << unaccounted
              << '\n';
    if (sent > 0) {
        std::cout << "loss rate " << static_cast<double>(lost) / static_cast<double>(sent) << "  sync error p99 "
                  << p99 << " us  max " << max_err << " us\n";
    }
    if (latencies && !latencies->empty()) {
        auto l = *latencies;
        std::sort(l.begin(), l.end());
        std::cout << "sync responder latency p99 " << l[std::min(l.size() - 1, l.size() * 99 / 100)] << " us\n";
    }
    std::cout << "sessions " << run.session_ids.size() << "  packet log digest " << hex64(run.log_digest) << '\n';
}

void post_json(httplib::Client& client, const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw EnvironmentFailure("no response from server for " + path);
    if (res->status >= 300) throw InputError(path + " failed: " + res->body);
}

int cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& args) {
    const json doc = load_config_doc(o);
    const fs::path out_dir = o.out.empty() ? fs::path(o.storage_root) : fs::path(o.out);

    if (o.accelerated) {
        sim::FleetConfig config;
        try {
            config = sim::parse_fleet_config(doc, kAcceleratedEpochUs);
        } catch (const ConfigError& e) {
            throw InputError(e.what());
        }
        const auto resolved = sim::fleet_config_to_json(config);
        write_config_echo(out_dir, "simulate", args,
                          {{"accelerated", true}, {"storage_root", o.storage_root}, {"input", doc}, {"fleet", resolved}});
        const auto intervals = sim::export_ground_truth(config.schedule);
        if (!intervals.empty()) {
            sim::write_label_csv(out_dir / "labels.csv", intervals);
            if (!config.label_file) config.label_file = fs::absolute(out_dir / "labels.csv").string();
        }

        sim::VirtualClock clock(config.start_us);
        server::ServerConfig sc;
        sc.storage_root = o.storage_root;
        sc.sampling_interval_us = config.nodes.front().sampling_interval_us;
        sc.config_hash = digest_of(resolved.dump());
        server::ServerCore core(sc, clock.source());
        const auto run = sim::run_fleet_accelerated(config, core, clock);
        report_run(out_dir, run, loss_lines(run, core.snapshot_status()), core.responder_latencies());
        return kOk;
    }

    const auto start = server::wall_clock_us();
    sim::FleetConfig config;
    try {
        config = sim::parse_fleet_config(doc, start);
    } catch (const ConfigError& e) {
        throw InputError(e.what());
    }
    const auto resolved = sim::fleet_config_to_json(config);
    write_config_echo(out_dir, "simulate", args, {{"accelerated", false}, {"input", doc}, {"fleet", resolved}});
    const auto intervals = sim::export_ground_truth(config.schedule);
    if (!intervals.empty()) sim::write_label_csv(out_dir / "labels.csv", intervals);

    httplib::Client client(config.server_host, config.http_port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(5, 0);
    if (auto res = client.Get("/status"); !res) {
        spdlog::error("server at {}:{} is not reachable", config.server_host, config.http_port);
        return kEnvironmentError;
    }

    sim::RealtimeOptions ro;
    ro.duration_us = config.duration_us;
    ro.cancel = &g_stop;
    if (config.manage_sessions && !config.schedule.subjects.empty()) {
        json positions = json::object();
        for (const auto& n : config.nodes) positions[std::to_string(n.node_id)] = n.position.to_string();
        std::string label_path;
        if (!intervals.empty()) label_path = fs::absolute(out_dir / "labels.csv").string();
        if (config.label_file) label_path = *config.label_file;
        ro.sessions = sim::SessionController{
            [&client, positions, label_path](const sim::SubjectSchedule& s) {
                json body = {{"position_map", positions},
                             {"subject", {{"id", s.subject_id},
                                          {"footedness", std::string(footedness_name(s.footedness))}}}};
                if (!label_path.empty()) body["label_file"] = label_path;
                post_json(client, "/session/start", body);
            },
            [&client](const sim::SubjectSchedule&) { post_json(client, "/session/stop", json::object()); }};
    }
    const auto run = sim::run_fleet_realtime(config, ro);

    std::vector<server::NodeStatus> status;
    if (auto res = client.Get("/status"); res && res->status == 200) {
        const auto body = json::parse(res->body, nullptr, false);
        const json& list = body.is_object() && body.contains("nodes") ? body["nodes"] : body;
        if (list.is_array()) {
            for (const auto& j : list) {
                server::NodeStatus s;
                s.node_id = j.value("node_id", 0);
                s.packets_received = j.value("packets_received", std::uint64_t{0});
                s.loss_count = j.value("loss_count", std::uint64_t{0});
                status.push_back(s);
            }
        }
    }
    report_run(out_dir, run, loss_lines(run, status), std::nullopt);
    return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
    std::vector<std::string> sessions;
    std::string labels;
    std::string out = "results";
    bool subset_search = false;
    bool loocv = false;
    std::vector<std::string> sensors;
    std::uint64_t seed = 1;
    std::size_t trees = 100;
    std::size_t max_depth = 0;
    std::size_t features_per_split = 0;
    double train_ratio = 0.7;
    std::string normalization = "train";
    std::size_t max_sensors = 20;
    std::size_t threads = 0;
};

learn::Normalization parse_normalization(const std::string& s) {
    if (s == "train") return learn::Normalization::TrainOnly;
    if (s == "global") return learn::Normalization::Global;
    if (s == "none") return learn::Normalization::None;
    throw InputError("normalization must be train, global or none");
}

std::vector<fs::path> expand_sessions(const std::vector<std::string>& inputs) {
    std::vector<fs::path> dirs;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (!fs::is_directory(p)) throw InputError("session path " + in + " is not a directory");
        if (fs::exists(p / "manifest.json")) {
            dirs.push_back(p);
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(p)) {
            if (e.is_directory() && fs::exists(e.path() / "manifest.json")) found.push_back(e.path());
        }
        if (found.empty()) throw InputError(in + " holds no session directories");
        std::sort(found.begin(), found.end());
        dirs.insert(dirs.end(), found.begin(), found.end());
    }
    return dirs;
}

json report_json(const learn::EvalReport& r) {
    return {{"accuracy", r.accuracy},
            {"precision", {{"walking", r.precision[0]}, {"towards_stairs", r.precision[1]}}},
            {"recall", {{"walking", r.recall[0]}, {"towards_stairs", r.recall[1]}}},
            {"confusion", {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}},
            {"mask", r.mask},
            {"seed", r.seed},
            {"split", r.split_kind},
            {"train_rows", r.train_rows},
            {"test_rows", r.test_rows}};
}

/// Writes into a sibling staging directory and moves it into place only once
/// everything succeeded.
class StagedOutput {
public:
    explicit StagedOutput(fs::path target) : target_(std::move(target)) {
        staging_ = target_;
        staging_ += ".partial";
        std::error_code ec;
        fs::remove_all(staging_, ec);
        fs::create_directories(staging_, ec);
        if (ec) throw EnvironmentFailure("cannot create " + staging_.string() + ": " + ec.message());
    }
    ~StagedOutput() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }
    const fs::path& dir() const { return staging_; }
    void commit() {
        std::error_code ec;
        fs::remove_all(target_, ec);
        fs::rename(staging_, target_, ec);
        if (ec) throw EnvironmentFailure("cannot move results into " + target_.string() + ": " + ec.message());
        committed_ = true;
    }

private:
    fs::path target_;
    fs::path staging_;
    bool committed_ = false;
};

int cmd_analyze(const AnalyzeOptions& o, const std::vector<std::string>& args) {
    if (!fs::is_regular_file(o.labels)) throw InputError("label file " + o.labels + " does not exist");
    const auto labels = sim::read_label_csv(o.labels);
    const auto dirs = expand_sessions(o.sessions);
    const auto normalization = parse_normalization(o.normalization);
    if (!(o.train_ratio > 0 && o.train_ratio < 1)) throw InputError("train ratio must lie in (0, 1)");

    pipeline::PipelineStats stats;
    const auto full = pipeline::build_dataset(dirs, labels, {}, &stats);
    const auto counts = full.class_counts();
    spdlog::info("{} sessions, {} windows ({} walking, {} towards_stairs), {} dropped, {} sensors", stats.sessions,
                 full.rows(), counts[0], counts[1], stats.windows_dropped, full.sensor_count());
    const auto balanced = pipeline::balance(full, o.seed);

    learn::SearchOptions search;
    search.seed = o.seed;
    search.max_sensors = o.max_sensors;
    search.threads = o.threads;
    search.eval.train_ratio = o.train_ratio;
    search.eval.normalization = normalization;
    search.eval.forest.n_trees = o.trees;
    search.eval.forest.max_depth = o.max_depth;
    search.eval.forest.features_per_split = o.features_per_split;
    search.eval.forest.seed = o.seed;

    json resolved = {{"sessions", [&] {
                          json a = json::array();
                          for (const auto& d : dirs) a.push_back(d.string());
                          return a;
                      }()},
                     {"labels", o.labels},
                     {"subset_search", o.subset_search},
                     {"loocv", o.loocv},
                     {"sensors", o.sensors},
                     {"seed", o.seed},
                     {"trees", o.trees},
                     {"max_depth", o.max_depth},
                     {"features_per_split", o.features_per_split},
                     {"train_ratio", o.train_ratio},
                     {"normalization", o.normalization},
                     {"threads", o.threads},
                     {"balanced_rows", balanced.rows()}};

    StagedOutput out(o.out);
    write_config_echo(out.dir(), "analyze", args, resolved);
    pipeline::write_dataset(balanced, out.dir() / "dataset.csv", {{"seed", o.seed}});

    json summary = {{"sensors", [&] {
                         json a = json::array();
                         for (const auto& s : full.sensors()) a.push_back(s.name);
                         return a;
                     }()},
                    {"windows", full.rows()},
                    {"windows_dropped", stats.windows_dropped},
                    {"class_counts", {counts[0], counts[1]}},
                    {"balanced_rows", balanced.rows()}};

    if (!o.sensors.empty()) {
        const auto mask = learn::mask_of(balanced, o.sensors);
        const auto report = learn::evaluate_subset(balanced, mask, search);
        learn::write_confusion_csv(out.dir() / "confusion.csv", report);
        learn::SubsetSearchResult single;
        single.sensor_names = summary["sensors"].get<std::vector<std::string>>();
        single.subsets.push_back({mask, o.sensors, report});
        learn::write_subset_results_csv(out.dir() / "subset_results.csv", single);
        summary["subset"] = report_json(report);
        summary["subset"]["sensors"] = o.sensors;
        std::cout << "subset accuracy " << report.accuracy << '\n';
    } else {
        const auto all_mask = static_cast<std::uint32_t>((std::uint64_t{1} << balanced.sensor_count()) - 1);
        const auto report = learn::evaluate_subset(balanced, all_mask, search);
        learn::write_confusion_csv(out.dir() / "confusion.csv", report);
        summary["all_sensors"] = report_json(report);
        std::cout << "all-sensor accuracy " << report.accuracy << '\n';

        if (o.subset_search) {
            search.progress = [](std::size_t done, std::size_t total) {
                if (done % 128 == 0 || done == total) spdlog::info("subset search {}/{}", done, total);
            };
            const auto result = learn::subset_search(balanced, search);
            learn::write_subset_results_csv(out.dir() / "subset_results.csv", result);
            learn::write_best_per_cardinality_csv(out.dir() / "best_per_cardinality.csv", result);
            learn::write_plot_data(out.dir() / "plot_data.json", result);
            json best = json::array();
            for (const auto& b : result.best_per_cardinality) {
                best.push_back({{"n_sensors", b.sensors.size()}, {"sensors", b.sensors}, {"accuracy", b.report.accuracy}});
            }
            summary["best_per_cardinality"] = best;
            summary["subsets_evaluated"] = result.subsets.size();

            std::vector<learn::NamedSubset> wanted;
            for (const auto& s : learn::default_locations_of_interest()) {
                const bool present = std::all_of(s.sensors.begin(), s.sensors.end(),
                                                 [&](const std::string& n) { return balanced.sensor_index(n); });
                if (present) wanted.push_back(s);
            }
            const auto rows = learn::report_locations_of_interest(balanced, &result, wanted, search);
            learn::write_locations_csv(out.dir() / "locations.csv", rows);
            json loc = json::array();
            for (const auto& r : rows) loc.push_back({{"sensors", r.sensors}, {"accuracy", r.report.accuracy}});
            summary["locations_of_interest"] = loc;
        }
    }

    if (o.loocv) {
        const auto loo = learn::eval_loocv(full, o.seed, search.eval);
        std::ostringstream csv;
        csv << "subject_id,accuracy,train_rows,test_rows\n";
        json folds = json::array();
        for (const auto& [subject, r] : loo.folds) {
            csv << subject << ',' << r.accuracy << ',' << r.train_rows << ',' << r.test_rows << '\n';
            folds.push_back({{"subject_id", subject}, {"accuracy", r.accuracy}});
        }
        write_text(out.dir() / "loocv.csv", csv.str());
        summary["loocv"] = {{"mean_accuracy", loo.mean_accuracy}, {"std_accuracy", loo.std_accuracy}, {"folds", folds}};
        std::cout << "LOOCV accuracy " << loo.mean_accuracy << " +- " << loo.std_accuracy << '\n';
    }

    write_text(out.dir() / "summary.json", summary.dump(2) + "\n");
    out.commit();
    return kOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
    std::string results = "results";
};

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100);
    return buf;
}

std::string join(const json& names) {
    std::string s;
    for (const auto& n : names) {
        if (!s.empty()) s += ", ";
        s += n.get<std::string>();
    }
    return s;
}

int cmd_report(const ReportOptions& o, const std::vector<std::string>& args) {
    const fs::path dir(o.results);
    std::ifstream in(dir / "summary.json");
    if (!in) throw InputError("no summary.json in " + dir.string());
    json summary;
    try {
        summary = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(e.what());
    }

    std::ostringstream text;
    text << "windows " << summary.value("windows", 0) << " (dropped " << summary.value("windows_dropped", 0)
         << "), balanced rows " << summary.value("balanced_rows", 0) << "\n";
    if (summary.contains("all_sensors")) {
        text << "all sensors: accuracy " << percent(summary["all_sensors"]["accuracy"].get<double>()) << "\n";
    }
    if (summary.contains("subset")) {
        text << "subset " << join(summary["subset"]["sensors"]) << ": accuracy "
             << percent(summary["subset"]["accuracy"].get<double>()) << "\n";
    }
    if (summary.contains("best_per_cardinality")) {
        text << "\nbest subset per number of sensors\n";
        for (const auto& b : summary["best_per_cardinality"]) {
            text << "  " << b["n_sensors"].get<int>() << "  " << percent(b["accuracy"].get<double>()) << "  "
                 << join(b["sensors"]) << "\n";
        }
    }
    if (summary.contains("locations_of_interest")) {
        text << "\nlocations of interest\n";
        for (const auto& r : summary["locations_of_interest"]) {
            text << "  " << percent(r["accuracy"].get<double>()) << "  " << join(r["sensors"]) << "\n";
        }
    }
    if (summary.contains("loocv")) {
        text << "\nleave-one-subject-out accuracy " << percent(summary["loocv"]["mean_accuracy"].get<double>())
             << " (std " << percent(summary["loocv"]["std_accuracy"].get<double>()) << ")\n";
    }
    std::cout << text.str();
    write_config_echo(dir / "report", "report", args, {{"results", o.results}});
    write_text(dir / "report" / "report.txt", text.str());
    return kOk;
}

}  // namespace

void request_stop() { g_stop.store(true); }

int run(const std::vector<std::string>& args) {
    g_stop.store(false);
    CLI::App app{"HARNode sensor network: server, simulated fleet and activity analysis"};
    app.require_subcommand(1);

    ServeOptions serve;
    auto* s = app.add_subcommand("serve", "run the ingest server and control API");
    s->add_option("--bind", serve.bind, "bind address");
    s->add_option("--sync-port", serve.sync_port);
    s->add_option("--data-port", serve.data_port);
    s->add_option("--control-port", serve.control_port);
    s->add_option("--http-port", serve.http_port);
    s->add_option("--broadcast", serve.broadcast, "destination of control messages");
    s->add_option("--storage-root", serve.storage_root);
    s->add_option("--status-period-ms", serve.status_period_ms)->check(CLI::PositiveNumber);
    s->add_option("--results-dir", serve.results_dir, "analysis output served under /results");
    s->add_option("--duration", serve.duration_s, "seconds to run; 0 runs until interrupted");

    SimulateOptions sim_opts;
    std::uint64_t seed_value = 0;
    std::size_t nodes_value = 0;
    double duration_value = 0, loss_value = 0;
    auto* m = app.add_subcommand("simulate", "run a simulated node fleet");
    m->add_option("--config", sim_opts.config, "fleet config JSON");
    m->add_flag("--accelerated", sim_opts.accelerated, "virtual time with an embedded server");
    auto* seed_opt = m->add_option("--seed", seed_value);
    auto* nodes_opt = m->add_option("--nodes", nodes_value)->check(CLI::Range(1, 256));
    auto* duration_opt = m->add_option("--duration", duration_value, "seconds")->check(CLI::PositiveNumber);
    auto* loss_opt = m->add_option("--loss", loss_value, "data packet drop probability")->check(CLI::Range(0.0, 1.0));
    m->add_option("--storage-root", sim_opts.storage_root, "session storage for accelerated runs");
    m->add_option("--out", sim_opts.out, "directory for labels, loss report and config echo");

    AnalyzeOptions an;
    auto* a = app.add_subcommand("analyze", "features, classifier evaluation and sensor subset search");
    a->add_option("--sessions", an.sessions, "session directories or roots holding them")->required();
    a->add_option("--labels", an.labels, "ground-truth label CSV")->required();
    a->add_option("--out", an.out);
    a->add_flag("--subset-search", an.subset_search);
    a->add_flag("--loocv", an.loocv);
    a->add_option("--sensors", an.sensors, "evaluate only this sensor subset")->delimiter(',');
    a->add_option("--seed", an.seed);
    a->add_option("--trees", an.trees)->check(CLI::PositiveNumber);
    a->add_option("--max-depth", an.max_depth);
    a->add_option("--features-per-split", an.features_per_split);
    a->add_option("--train-ratio", an.train_ratio);
    a->add_option("--normalization", an.normalization)->check(CLI::IsMember({"train", "global", "none"}));
    a->add_option("--max-sensors", an.max_sensors);
    a->add_option("--threads", an.threads, "subset search workers; 0 uses every hardware thread");

    ReportOptions rep;
    auto* r = app.add_subcommand("report", "render an analysis summary");
    r->add_option("--results", rep.results);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (s->parsed()) return cmd_serve(serve, args);
        if (m->parsed()) {
            if (*seed_opt) sim_opts.seed = seed_value;
            if (*nodes_opt) sim_opts.nodes = nodes_value;
            if (*duration_opt) sim_opts.duration_s = duration_value;
            if (*loss_opt) sim_opts.loss = loss_value;
            return cmd_simulate(sim_opts, args);
        }
        if (a->parsed()) return cmd_analyze(an, args);
        if (r->parsed()) return cmd_report(rep, args);
    } catch (const EnvironmentFailure& e) {
        spdlog::error("{}", e.what());
        return kEnvironmentError;
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kEnvironmentError;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kInputError;
    } catch (const std::system_error& e) {
        spdlog::error("{}", e.what());
        return kEnvironmentError;
    }
    return kInputError;
}

}  // namespace harnode::cli
