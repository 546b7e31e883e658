// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is the number of failed lines (capped at 255).

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "harnode/learn.hpp"
#include "harnode/net.hpp"
#include "harnode/pipeline.hpp"
#include "harnode/protocol.hpp"
#include "harnode/server.hpp"
#include "harnode/simnode.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace harnode;

namespace {

// Sync accuracy
constexpr double kSyncDrift = 5e-6;
constexpr std::int64_t kSyncJitterMinUs = 1000;
constexpr std::int64_t kSyncJitterMaxUs = 10000;
constexpr std::int64_t kSyncRunUs = 10 * 60 * 1'000'000LL;
constexpr double kSyncMeanLimitUs = 1000.0;
constexpr double kSyncMaxLimitUs = 5000.0;

// Throughput soak
constexpr std::size_t kSoakNodes = 100;
constexpr std::int64_t kSoakRunUs = 60'000'000;
constexpr double kSoakRateHz = 5.6;
constexpr double kSoakRateRelTol = 0.01;
constexpr double kSoakMbps = 4.8;
constexpr double kSoakMbpsRelTol = 0.05;

// Wire fidelity
constexpr std::size_t kWireMessages = 10'000;
constexpr std::size_t kCanonicalV1Bytes = 1082;

// Feature oracle
constexpr std::size_t kOracleWindows = 1000;
constexpr double kOracleRelTol = 1e-9;

// Learner oracles
constexpr int kStumpInstances = 200;
constexpr double kBlobAccuracy = 0.99;

// End-to-end study
constexpr std::uint64_t kAnalysisSeed = 1;
constexpr std::size_t kTrees = 100;
constexpr double kAllSensorAccuracy = 0.95;
constexpr double kBestThreeGapPoints = 2.0;
constexpr double kFootBelowThreePoints = 5.0;
constexpr double kSearchBudgetSeconds = 600.0;
constexpr double kMonotoneSlackPoints = 1.0;
constexpr std::size_t kSensors = 11;

int g_failures = 0;

void line(const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    fmt::print("{} {:<34} {}\n", pass ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
}

void info(const std::string& name, const std::string& detail) {
    fmt::print("INFO {:<34} {}\n", name, detail);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// ---------------------------------------------------------------- sync

struct SyncErrors {
    double mean = 0;
    double max = 0;
    std::size_t samples = 0;
};

SyncErrors sync_run(bool symmetric) {
    sim::FleetConfig cfg;
    cfg.seed = 41;
    cfg.nodes = sim::make_nodes(2, cfg.seed);
    cfg.nodes[0].drift.drift_rate = kSyncDrift;
    cfg.nodes[1].drift.drift_rate = -kSyncDrift;
    cfg.network.delay_min_us = kSyncJitterMinUs;
    cfg.network.delay_max_us = kSyncJitterMaxUs;
    cfg.network.symmetric_sync = symmetric;
    cfg.start_us = 1'700'000'000'000'000;
    cfg.duration_us = kSyncRunUs;
    sim::VirtualClock clock(cfg.start_us);
    server::ServerCore core({}, clock.source());
    const auto run = sim::run_fleet_accelerated(cfg, core, clock);
    SyncErrors out;
    double sum = 0;
    for (const auto& n : run.nodes) {
        for (double e : n.offset_errors_us) {
            sum += e;
            out.max = std::max(out.max, e);
            ++out.samples;
        }
    }
    out.mean = out.samples ? sum / static_cast<double>(out.samples) : 0;
    return out;
}

void check_sync() {
    const auto t = std::chrono::steady_clock::now();
    const auto sym = sync_run(true);
    line("sync accuracy", sym.samples > 0 && sym.mean <= kSyncMeanLimitUs && sym.max <= kSyncMaxLimitUs,
         fmt::format("mean {:.1f} us (<= {:.0f}), max {:.1f} us (<= {:.0f}), {} packets, {:.1f} s", sym.mean,
                     kSyncMeanLimitUs, sym.max, kSyncMaxLimitUs, sym.samples, seconds_since(t)));
    const auto asym = sync_run(false);
    info("sync sensitivity, independent legs", fmt::format("mean {:.1f} us, max {:.1f} us", asym.mean, asym.max));
}

// ---------------------------------------------------------------- soak

void check_soak() {
    oracle::TempDir dir("acceptance-soak");
    server::ServerConfig sc;
    sc.storage_root = dir.path();
    server::ServerCore core(sc, server::wall_clock_us);
    server::UdpServer udp(core, {"127.0.0.1", 0, 0, 0, "127.0.0.1"});
    udp.start();
    core.set_control_sink(udp.control_sink());

    sim::FleetConfig cfg;
    cfg.seed = 77;
    cfg.nodes = sim::make_nodes(kSoakNodes, cfg.seed);
    cfg.server_host = "127.0.0.1";
    cfg.sync_port = udp.sync_port();
    cfg.data_port = udp.data_port();
    cfg.manage_sessions = false;
    sim::RealtimeOptions ro;
    ro.duration_us = kSoakRunUs;
    ro.listen_control = false;
    const auto run = sim::run_fleet_realtime(cfg, ro);
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    const auto status = core.snapshot_status();
    const auto counters = core.counters();
    udp.stop();

    std::map<std::uint8_t, server::NodeStatus> by_id;
    for (const auto& s : status) by_id[s.node_id] = s;

    std::int64_t unaccounted = 0;
    std::uint64_t received = 0, sent = 0, gaps = 0;
    double worst_rate_dev = 0, min_rate = 1e9, max_rate = 0;
    std::int64_t first_send = INT64_MAX, last_send = INT64_MIN;
    for (const auto& n : run.nodes) {
        const auto it = by_id.find(n.node_id);
        const std::uint64_t got = it == by_id.end() ? 0 : it->second.packets_received;
        const std::uint64_t lost = it == by_id.end() ? 0 : it->second.loss_count;
        unaccounted += static_cast<std::int64_t>(n.packets_sent) - static_cast<std::int64_t>(n.packets_dropped) -
                       static_cast<std::int64_t>(got);
        gaps += lost;
        received += got;
        sent += n.packets_sent;
        const auto& t = n.packet_send_times_us;
        if (t.size() < 2) {
            worst_rate_dev = 1e9;
            continue;
        }
        first_send = std::min(first_send, t.front());
        last_send = std::max(last_send, t.back());
        const double rate = static_cast<double>(t.size() - 1) / (static_cast<double>(t.back() - t.front()) * 1e-6);
        min_rate = std::min(min_rate, rate);
        max_rate = std::max(max_rate, rate);
        worst_rate_dev = std::max(worst_rate_dev, std::abs(rate - kSoakRateHz) / kSoakRateHz);
    }
    line("soak: unaccounted packets", run.nodes.size() == kSoakNodes && unaccounted == 0 && gaps == 0,
         fmt::format("{} nodes, sent {}, received {}, unaccounted {}, sequence gaps {}, duplicates {}",
                     run.nodes.size(), sent, received, unaccounted, gaps, counters.duplicate_packets));
    line("soak: per-node rate", worst_rate_dev <= kSoakRateRelTol,
         fmt::format("{:.4f}..{:.4f} Hz, worst deviation {:.2f}% from {} Hz (<= {:.0f}%)", min_rate, max_rate,
                     100 * worst_rate_dev, kSoakRateHz, 100 * kSoakRateRelTol));
    const double span_s = static_cast<double>(last_send - first_send) * 1e-6;
    const double mbps = span_s > 0 ? static_cast<double>(received * protocol::v2_length(30)) * 8 / span_s / 1e6 : 0;
    line("soak: aggregate throughput", std::abs(mbps - kSoakMbps) / kSoakMbps <= kSoakMbpsRelTol,
         fmt::format("{:.3f} Mbit/s over {:.1f} s (target {} +- {:.0f}%)", mbps, span_s, kSoakMbps,
                     100 * kSoakMbpsRelTol));
}

// ---------------------------------------------------------------- wire

void check_wire() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> value(-2000.0f, 2000.0f);
    std::uniform_int_distribution<std::size_t> count(1, protocol::kMaxSamplesPerPacket);
    std::uniform_int_distribution<std::uint64_t> u64;
    std::uniform_int_distribution<std::uint32_t> u32;
    std::uniform_int_distribution<int> byte(0, 255), kind(1, 3);
    std::size_t ok = 0, total = 0;
    for (std::size_t i = 0; i < kWireMessages; ++i) {
        std::vector<protocol::SensorSample> samples(count(rng));
        for (auto& s : samples) {
            std::array<float, 9> a{};
            for (auto& v : a) v = value(rng);
            s = protocol::SensorSample::from_axes(a);
        }
        const auto id = static_cast<std::uint8_t>(byte(rng));
        const protocol::DataPacket p1 = protocol::DataPacketV1{id, samples};
        const protocol::DataPacket p2 = protocol::DataPacketV2{id, u32(rng), u64(rng), samples};
        for (const auto& p : {p1, p2}) {
            const auto bytes = protocol::encode_data_packet(p);
            const auto back = protocol::decode_data_packet(bytes);
            ok += back == p && back.index() == p.index();
            ++total;
        }
        const auto t2 = u64(rng) / 2;
        const protocol::SyncMessage req = protocol::SyncRequest{id, u64(rng)};
        const protocol::SyncMessage resp = protocol::SyncResponse{u64(rng), t2, t2 + u32(rng)};
        for (const auto& m : {req, resp}) {
            ok += protocol::decode_sync(protocol::encode_sync(m)) == m;
            ++total;
        }
        const protocol::ControlMessage c{static_cast<protocol::ControlKind>(kind(rng)), u32(rng), u64(rng)};
        ok += protocol::decode_control(protocol::encode_control(c)) == c;
        ++total;
    }
    bool lengths_disjoint = true;
    for (std::size_t a = 0; a <= protocol::kMaxSamplesPerPacket; ++a) {
        for (std::size_t b = 0; b <= protocol::kMaxSamplesPerPacket; ++b) {
            lengths_disjoint &= protocol::v1_length(a) != protocol::v2_length(b);
        }
    }
    std::vector<protocol::SensorSample> thirty(30);
    const auto canonical = protocol::encode_data_packet(protocol::DataPacketV1{1, thirty}).size();
    line("wire fidelity", ok == total && total >= kWireMessages && lengths_disjoint && canonical == kCanonicalV1Bytes,
         fmt::format("{}/{} round trips, version lengths disjoint: {}, canonical v1 {} bytes", ok, total,
                     lengths_disjoint, canonical));
}

// ---------------------------------------------------------------- features

void check_features() {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> offset(-20, 20), log_scale(-2, 1);
    std::normal_distribution<double> g(0, 1);
    std::exponential_distribution<double> e(1.0);
    std::size_t agree = 0;
    double worst = 0;
    for (std::size_t w = 0; w < kOracleWindows; ++w) {
        const double scale = std::pow(10.0, log_scale(rng));
        const double base = offset(rng) * scale;
        std::vector<double> x(pipeline::kWindowLength);
        for (auto& v : x) v = base + scale * (w % 3 == 0 ? e(rng) : g(rng));
        const auto got = pipeline::window_statistics(x);
        const auto want = oracle::naive_statistics(x);
        double magnitude = 0;
        for (double v : x) magnitude = std::max(magnitude, std::abs(v));
        agree += oracle::statistics_agree(got, want, magnitude, kOracleRelTol);
        for (std::size_t i = 0; i < 8; ++i) {
            const double floor = i >= 6 ? 1.0 : magnitude;
            worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(std::abs(want[i]), floor));
        }
    }
    bool constant_ok = true;
    for (double c : {0.0, -3.25, 9.81, 1e6}) {
        const std::vector<double> x(pipeline::kWindowLength, c);
        const std::array<double, 8> want{c, 0, c, c, 0, c, 0, 0};
        constant_ok &= pipeline::window_statistics(x) == want;
    }
    line("feature oracle", agree == kOracleWindows && constant_ok,
         fmt::format("{}/{} windows within {:g} (worst {:.2e}), constant-window rules exact: {}", agree,
                     kOracleWindows, kOracleRelTol, worst, constant_ok));
}

// ---------------------------------------------------------------- learner

void check_learner() {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> nrows(4, 100), nfeat(1, 5), label(0, 1);
    std::normal_distribution<double> g(0, 1);
    int matched = 0, instances = 0;
    while (instances < kStumpInstances) {
        const auto n = static_cast<std::size_t>(nrows(rng));
        const auto f = static_cast<std::size_t>(nfeat(rng));
        std::vector<std::vector<double>> rows(n, std::vector<double>(f));
        std::vector<double> flat;
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = label(rng);
            for (auto& v : rows[i]) {
                v = g(rng) + 0.7 * y[i];
                flat.push_back(v);
            }
        }
        if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) continue;
        ++instances;
        learn::ForestConfig c;
        c.n_trees = 1;
        c.max_depth = 1;
        c.features_per_split = f;
        c.bootstrap = false;
        c.seed = static_cast<std::uint64_t>(instances);
        const auto forest = learn::fit_forest({flat.data(), n, f}, y, c);
        const auto want = oracle::brute_force_stump(rows, y);
        const auto& root = forest.trees().at(0).nodes.at(0);
        if (!want) {
            matched += root.is_leaf();
        } else {
            matched += !root.is_leaf() && static_cast<std::size_t>(root.feature) == want->feature &&
                       std::abs(root.threshold - want->threshold) <= 1e-12 * std::max(1.0, std::abs(want->threshold));
        }
    }
    line("learner: depth-1 tree = best stump", matched == kStumpInstances,
         fmt::format("{}/{} instances", matched, kStumpInstances));

    const auto train = oracle::make_blobs(1000, 8, 6.0, 31);
    const auto test = oracle::make_blobs(1000, 8, 6.0, 32);
    learn::ForestConfig c;
    c.n_trees = 50;
    c.seed = 9;
    const auto a = learn::fit_forest({train.x.data(), train.rows, train.cols}, train.y, c);
    const auto b = learn::fit_forest({train.x.data(), train.rows, train.cols}, train.y, c);
    const auto pa = a.predict_all({test.x.data(), test.rows, test.cols});
    const auto pb = b.predict_all({test.x.data(), test.rows, test.cols});
    const double acc = learn::make_report(test.y, pa).accuracy;
    line("learner: separable blobs", acc >= kBlobAccuracy,
         fmt::format("holdout accuracy {:.4f} (>= {})", acc, kBlobAccuracy));

    bool same = pa == pb && a.trees().size() == b.trees().size();
    for (std::size_t t = 0; same && t < a.trees().size(); ++t) {
        const auto& na = a.trees()[t].nodes;
        const auto& nb = b.trees()[t].nodes;
        same = na.size() == nb.size();
        for (std::size_t i = 0; same && i < na.size(); ++i) {
            same = na[i].feature == nb[i].feature && na[i].threshold == nb[i].threshold &&
                   na[i].left == nb[i].left && na[i].right == nb[i].right && na[i].counts == nb[i].counts;
        }
    }
    line("learner: determinism", same, fmt::format("two fits with seed {}: identical trees and votes", c.seed));
}

// ---------------------------------------------------------------- end to end

std::vector<std::uint32_t> masks_of_size(std::size_t k) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t m = 1; m < (1u << kSensors); ++m) {
        if (static_cast<std::size_t>(std::popcount(m)) == k) out.push_back(m);
    }
    return out;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

std::size_t check_end_to_end(const fs::path& source_dir, bool full_search) {
    oracle::TempDir dir("acceptance-study");
    const auto t_sim = std::chrono::steady_clock::now();
    auto config = sim::load_fleet_config(source_dir / "configs" / "study.json", 1'700'000'000'000'000);
    const auto intervals = sim::export_ground_truth(config.schedule);
    sim::write_label_csv(dir.path() / "labels.csv", intervals);
    config.label_file = (dir.path() / "labels.csv").string();
    {
        sim::VirtualClock clock(config.start_us);
        server::ServerConfig sc;
        sc.storage_root = dir.path() / "sessions";
        server::ServerCore core(sc, clock.source());
        sim::run_fleet_accelerated(config, core, clock);
    }
    std::vector<fs::path> sessions;
    for (const auto& e : fs::directory_iterator(dir.path() / "sessions")) {
        if (fs::exists(e.path() / "manifest.json")) sessions.push_back(e.path());
    }
    std::sort(sessions.begin(), sessions.end());
    pipeline::PipelineStats stats;
    const auto full = pipeline::build_dataset(sessions, intervals, {}, &stats);
    const auto balanced = pipeline::balance(full, kAnalysisSeed);
    const auto counts = full.class_counts();
    info("study data", fmt::format("{} sessions, {} windows ({} / {}), {} balanced rows, {} sensors, {:.1f} s",
                                   sessions.size(), full.rows(), counts[0], counts[1], balanced.rows(),
                                   full.sensor_count(), seconds_since(t_sim)));
    if (full.sensor_count() != kSensors) {
        line("end-to-end study", false, fmt::format("expected {} sensors, found {}", kSensors, full.sensor_count()));
        return full.cols();
    }

    learn::SearchOptions search;
    search.seed = kAnalysisSeed;
    search.eval.forest.n_trees = kTrees;
    search.eval.forest.seed = kAnalysisSeed;

    std::array<double, kSensors + 1> seconds_per_model{};
    std::map<std::uint32_t, double> accuracy;
    auto run_masks = [&](const std::vector<std::uint32_t>& masks) {
        auto o = search;
        o.masks = masks;
        const auto t = std::chrono::steady_clock::now();
        const auto r = learn::subset_search(balanced, o);
        const double per = seconds_since(t) / static_cast<double>(masks.size());
        for (const auto& s : r.subsets) accuracy[s.mask] = s.report.accuracy;
        return per;
    };

    const std::uint32_t all = (1u << kSensors) - 1;
    if (full_search) {
        const auto t = std::chrono::steady_clock::now();
        const auto r = learn::subset_search(balanced, search);
        const double total = seconds_since(t);
        for (const auto& s : r.subsets) accuracy[s.mask] = s.report.accuracy;
        line("e2e: subset search runtime", total <= kSearchBudgetSeconds,
             fmt::format("{} models measured in {:.0f} s (<= {:.0f} s)", r.subsets.size(), total,
                         kSearchBudgetSeconds));
    } else {
        for (std::size_t k = 1; k <= kSensors; ++k) {
            if (k == 1 || k == 3) {
                seconds_per_model[k] = run_masks(masks_of_size(k));
            } else {
                seconds_per_model[k] = run_masks({masks_of_size(k).front()});
            }
        }
        double projected = 0;
        for (std::size_t k = 1; k <= kSensors; ++k) projected += binomial(kSensors, k) * seconds_per_model[k];
        line("e2e: subset search runtime", projected <= kSearchBudgetSeconds,
             fmt::format("projected {:.0f} s for 2047 models from measured per-model cost "
                         "({:.2f} s at 1 sensor, {:.2f} s at 11) on {} hardware thread(s) (<= {:.0f} s)",
                         projected, seconds_per_model[1], seconds_per_model[kSensors],
                         std::max(1u, std::thread::hardware_concurrency()), kSearchBudgetSeconds));
    }

    auto best_of = [&](std::size_t k) {
        std::pair<double, std::uint32_t> best{-1, 0};
        for (auto m : masks_of_size(k)) {
            if (auto it = accuracy.find(m); it != accuracy.end() && it->second > best.first) best = {it->second, m};
        }
        return best;
    };
    auto names = [&](std::uint32_t mask) {
        std::string s;
        for (std::size_t i = 0; i < kSensors; ++i) {
            if (mask >> i & 1u) s += (s.empty() ? "" : "+") + full.sensors()[i].name;
        }
        return s;
    };

    const double acc_all = accuracy.at(all);
    line("e2e (a): 11-sensor accuracy", acc_all >= kAllSensorAccuracy,
         fmt::format("{:.2f}% (>= {:.0f}%)", 100 * acc_all, 100 * kAllSensorAccuracy));

    const auto [acc3, mask3] = best_of(3);
    line("e2e (b): best 3 vs 11 sensors", 100 * (acc_all - acc3) <= kBestThreeGapPoints,
         fmt::format("best 3 {} {:.2f}%, gap {:.2f} points (<= {})", names(mask3), 100 * acc3, 100 * (acc_all - acc3),
                     kBestThreeGapPoints));

    const auto [acc1, mask1] = best_of(1);
    const auto foot = learn::mask_of(full, std::vector<std::string>{"right_foot"});
    const double acc_foot = accuracy.at(foot);
    line("e2e (c): right foot single sensor", mask1 == foot && 100 * (acc3 - acc_foot) >= kFootBelowThreePoints,
         fmt::format("right_foot {:.2f}%, best single {} {:.2f}%, {:.2f} points below best 3 (>= {})", 100 * acc_foot,
                     names(mask1), 100 * acc1, 100 * (acc3 - acc_foot), kFootBelowThreePoints));

    const auto t_loo = std::chrono::steady_clock::now();
    const auto loo = learn::eval_loocv(full, kAnalysisSeed, search.eval);
    line("e2e (d): LOOCV <= 70/30", loo.mean_accuracy <= acc_all,
         fmt::format("LOOCV {:.2f}% (std {:.2f}) vs 70/30 {:.2f}%, {:.0f} s", 100 * loo.mean_accuracy,
                     100 * loo.std_accuracy, 100 * acc_all, seconds_since(t_loo)));

    if (full_search) {
        double worst_drop = 0;
        for (std::size_t k = 1; k < kSensors; ++k) worst_drop = std::max(worst_drop, best_of(k).first - best_of(k + 1).first);
        line("e2e: best per cardinality monotone", 100 * worst_drop <= kMonotoneSlackPoints,
             fmt::format("largest drop {:.2f} points (<= {})", 100 * worst_drop, kMonotoneSlackPoints));
    }
    return full.cols();
}

// ---------------------------------------------------------------- window laws

void check_laws(std::optional<std::size_t> study_columns) {
    const bool counts = pipeline::window_count(25) == 1 && pipeline::window_count(49) == 5 &&
                        pipeline::window_count(24) == 0;
    const auto windows = fmt::format("N=25 -> {}, N=49 -> {}, N=24 -> {}", pipeline::window_count(25),
                                     pipeline::window_count(49), pipeline::window_count(24));
    if (!study_columns) {
        line("window laws (columns not measured)", counts, windows);
        return;
    }
    line("window/count laws", counts && *study_columns == 72 * kSensors + 1,
         fmt::format("{}, 11-sensor dataset columns {}", windows, *study_columns));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string source_dir = HARNODE_SOURCE_DIR;
    bool full_search = false, skip_soak = false, skip_study = false;
    app.add_option("--source-dir", source_dir, "repository root holding configs/");
    app.add_flag("--full-search", full_search, "time the complete 2047-model subset search");
    app.add_flag("--skip-soak", skip_soak, "skip the 60 s real-time soak");
    app.add_flag("--skip-study", skip_study, "skip the simulated study and subset search");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::warn);

    check_sync();
    if (!skip_soak) check_soak();
    check_wire();
    check_features();
    check_learner();
    std::optional<std::size_t> columns;
    if (!skip_study) columns = check_end_to_end(source_dir, full_search);
    check_laws(columns);

    fmt::print("{} failed\n", g_failures);
    return std::min(g_failures, 255);
}
