#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "harnode/pipeline.hpp"
#include "support/oracles.hpp"

using namespace harnode;
using namespace harnode::pipeline;

namespace {

NodeRecording linear_node(std::uint8_t id, Location loc, std::int64_t start, std::int64_t step, std::size_t n,
                          double slope) {
    NodeRecording node;
    node.node_id = id;
    node.position = {loc, Orientation::Front};
    for (std::size_t i = 0; i < n; ++i) {
        server::RecordRow r;
        r.t_server_us = start + static_cast<std::int64_t>(i) * step;
        r.node_id = id;
        for (std::size_t a = 0; a < kAxes; ++a) {
            r.values[a] = static_cast<float>(static_cast<double>(i) * slope + static_cast<double>(a));
        }
        node.rows.push_back(r);
    }
    return node;
}

FeatureDataset toy_dataset(std::size_t sensors, std::size_t rows, std::size_t stairs_every, std::uint64_t seed) {
    std::vector<SensorColumns> cols;
    for (std::size_t s = 0; s < sensors; ++s) {
        const auto loc = static_cast<Location>(s);
        cols.push_back({std::string(location_name(loc)), {loc, Orientation::Front}, 0});
    }
    FeatureDataset d(cols);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::vector<double> row(d.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto& v : row) v = g(rng);
        row.back() = static_cast<double>(r % 3 == 0);
        d.append_row(row, r % stairs_every == 0 ? 1 : 0, static_cast<std::uint32_t>(r % 4),
                     static_cast<std::int64_t>(r) * 36000);
    }
    return d;
}

}  // namespace

TEST_CASE("window count law") {
    CHECK(window_count(25) == 1);
    CHECK(window_count(49) == 5);
    CHECK(window_count(24) == 0);
    CHECK(window_count(0) == 0);
    CHECK(window_count(31) == 2);
    CHECK(window_count(30) == 1);
    for (std::size_t n = 0; n < 500; ++n) {
        const std::size_t expect = n < 25 ? 0 : (n - 25) / 6 + 1;
        REQUIRE(window_count(n) == expect);
        std::vector<std::optional<Activity>> labels(n, Activity::Walking);
        REQUIRE(label_windows(labels).starts.size() == expect);
    }
    CHECK(window_count(100, 25, 7) == 11);
    CHECK_THROWS_AS(window_count(10, 25, 0), InvalidArgument);
}

TEST_CASE("feature layout law") {
    for (std::size_t k = 1; k <= 11; ++k) {
        auto d = toy_dataset(k, 3, 2, 1);
        REQUIRE(d.cols() == 72 * k + 1);
        REQUIRE(d.column_names().size() == d.cols());
        for (std::size_t s = 0; s < k; ++s) REQUIRE(d.sensors()[s].first_column == 72 * s);
    }
    CHECK(toy_dataset(11, 1, 2, 1).cols() == 793);
    CHECK(toy_dataset(11, 1, 2, 1).column_names().back() == "footedness");
    CHECK(toy_dataset(2, 1, 2, 1).column_names()[72] == "right_foot.ax.mean");
    CHECK(toy_dataset(2, 1, 2, 1).column_names()[79] == "right_foot.ax.kurtosis");
}

TEST_CASE("subset slicing keeps whole sensor blocks and footedness") {
    auto d = toy_dataset(5, 20, 3, 2);
    const auto sub = d.select_mask(0b10110);
    REQUIRE(sub.cols() == 3 * 72 + 1);
    REQUIRE(sub.sensors().size() == 3);
    CHECK(sub.sensors()[0].name == "right_foot");
    CHECK(sub.sensors()[1].name == "left_shin");
    CHECK(sub.sensors()[2].name == "left_thigh");
    const std::size_t src_sensor[] = {1, 2, 4};
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t k = 0; k < 3; ++k) {
            for (std::size_t c = 0; c < 72; ++c) REQUIRE(sub.at(r, k * 72 + c) == d.at(r, src_sensor[k] * 72 + c));
        }
        REQUIRE(sub.at(r, sub.footedness_column()) == d.at(r, d.footedness_column()));
    }
    CHECK(sub.labels() == d.labels());
    CHECK_THROWS_AS(d.select_mask(0), InvalidArgument);
}

TEST_CASE("window statistics examples") {
    SUBCASE("constant window") {
        const std::vector<double> x(25, 7.0);
        const auto s = window_statistics(x);
        const std::array<double, 8> expect{7, 0, 7, 7, 0, 7, 0, 0};
        CHECK(s == expect);
    }
    SUBCASE("values 1..5") {
        const std::vector<double> x{1, 2, 3, 4, 5};
        const auto s = window_statistics(x);
        CHECK(s[0] == doctest::Approx(3));
        CHECK(s[1] == doctest::Approx(std::sqrt(2.5)));
        CHECK(s[2] == 1);
        CHECK(s[3] == 5);
        CHECK(s[4] == 4);
        CHECK(s[5] == 3);
        CHECK(s[6] == doctest::Approx(0).scale(1));
        CHECK(s[7] == doctest::Approx(-1.3));
    }
    SUBCASE("median of 25 is the 13th order statistic") {
        std::vector<double> x(25);
        std::iota(x.begin(), x.end(), 0.0);
        std::shuffle(x.begin(), x.end(), std::mt19937_64(3));
        CHECK(window_statistics(x)[5] == 12.0);
    }
    SUBCASE("rejects non-finite and too short input") {
        CHECK_THROWS_AS(window_statistics(std::vector<double>{1.0}), InvalidArgument);
        CHECK_THROWS_AS(window_statistics(std::vector<double>{1.0, NAN, 2.0}), InvalidArgument);
        CHECK_THROWS_AS(window_statistics(std::vector<double>{1.0, INFINITY}), InvalidArgument);
    }
}

TEST_CASE("window statistics agree with the naive oracle on random windows") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> scale(0.01, 500.0), center(-1000, 1000);
    for (int i = 0; i < 1000; ++i) {
        std::normal_distribution<double> g(center(rng), scale(rng));
        std::vector<double> x(25);
        for (auto& v : x) v = g(rng);
        if (i % 10 == 0) x[i % 25] = x[(i + 1) % 25];
        double magnitude = 0;
        for (double v : x) magnitude = std::max(magnitude, std::abs(v));
        const auto got = window_statistics(x);
        const auto want = oracle::naive_statistics(x);
        REQUIRE(oracle::statistics_agree(got, want, magnitude, 1e-9));
    }
}

TEST_CASE("extract_features lays out axis-major statistics") {
    AlignedStream s;
    for (std::size_t a = 0; a < kAxes; ++a) {
        for (std::size_t i = 0; i < 40; ++i) s.channels[a].push_back(static_cast<double>(a * 100 + i * i));
    }
    std::array<double, kFeaturesPerSensor> out{};
    extract_features(s, 6, 25, out.data());
    for (std::size_t a = 0; a < kAxes; ++a) {
        std::vector<double> slice(s.channels[a].begin() + 6, s.channels[a].begin() + 31);
        const auto want = window_statistics(slice);
        for (std::size_t k = 0; k < kStatsPerAxis; ++k) REQUIRE(out[a * kStatsPerAxis + k] == want[k]);
    }
}

TEST_CASE("interpolation") {
    SUBCASE("midpoint of a linear segment") {
        const std::vector<std::int64_t> t{0, 6000};
        const std::vector<double> v{0, 6};
        const auto out = interpolate_channel(t, v, Grid{3000, 6000, 1});
        REQUIRE(out.size() == 1);
        CHECK(out[0] == 3.0);
    }
    SUBCASE("on-grid samples reproduce exactly") {
        const auto node = linear_node(1, Location::Head, 1'000'000, 6000, 50, 0.37);
        const auto s = interpolate_to_grid(node, Grid{1'000'000, 6000, 50});
        for (std::size_t a = 0; a < kAxes; ++a) {
            for (std::size_t i = 0; i < 50; ++i) REQUIRE(s.channels[a][i] == node.rows[i].values[a]);
        }
    }
    SUBCASE("linear signals are reproduced at off-grid points") {
        std::mt19937_64 rng(4);
        std::uniform_int_distribution<std::int64_t> jitter(-2500, 2500);
        std::vector<std::int64_t> t;
        std::vector<double> v;
        for (int i = 0; i < 200; ++i) {
            t.push_back(i * 6000 + jitter(rng));
            v.push_back(2.5 * static_cast<double>(t.back()) - 17.0);
        }
        const Grid g{t.front() + 1, 6000, static_cast<std::size_t>((t.back() - t.front() - 1) / 6000) + 1};
        const auto out = interpolate_channel(t, v, g);
        for (std::size_t i = 0; i < g.count; ++i) {
            REQUIRE(out[i] == doctest::Approx(2.5 * static_cast<double>(g.time_at(i)) - 17.0).epsilon(1e-12));
        }
    }
    SUBCASE("common grid starts at the latest node start") {
        std::vector<NodeRecording> nodes;
        for (std::uint8_t i = 0; i < 11; ++i) {
            const std::int64_t start = i == 5 ? 12'000 : 0;
            nodes.push_back(linear_node(i, static_cast<Location>(i), start, 6000, 100, 1.0));
        }
        const auto g = common_grid(nodes);
        CHECK(g.start_us == 12'000);
        CHECK(g.time_at(g.count - 1) <= 99 * 6000);
        CHECK(g.count == 98);
        for (const auto& n : nodes) CHECK(interpolate_to_grid(n, g).length() == g.count);
    }
    SUBCASE("errors") {
        auto one = linear_node(1, Location::Head, 0, 6000, 1, 1.0);
        CHECK_THROWS_AS(interpolate_to_grid(one, Grid{0, 6000, 1}), InsufficientData);
        auto two = linear_node(1, Location::Head, 0, 6000, 2, 1.0);
        CHECK_THROWS_AS(interpolate_to_grid(two, Grid{0, 6000, 3}), InvalidArgument);
        std::vector<NodeRecording> disjoint{linear_node(1, Location::Head, 0, 6000, 5, 1),
                                            linear_node(2, Location::Waist, 100'000, 6000, 5, 1)};
        CHECK_THROWS_AS(common_grid(disjoint), InsufficientData);
    }
}

TEST_CASE("sort_and_dedupe keeps the first of repeated timestamps") {
    std::vector<server::RecordRow> rows(4);
    rows[0].t_server_us = 30, rows[1].t_server_us = 10, rows[2].t_server_us = 10, rows[3].t_server_us = 20;
    rows[1].values[0] = 1, rows[2].values[0] = 2;
    const auto out = sort_and_dedupe(rows);
    REQUIRE(out.size() == 3);
    CHECK(out[0].t_server_us == 10);
    CHECK(out[0].values[0] == 1);
    CHECK(out[2].t_server_us == 30);
}

TEST_CASE("window labelling") {
    const Grid grid{0, 6000, 60};
    SUBCASE("whole window inside a walking interval") {
        std::vector<sim::LabelInterval> iv{{1, 0, 60 * 6000, Activity::Walking}};
        const auto w = label_windows(label_grid(grid, iv));
        REQUIRE(w.labels.size() == window_count(60));
        for (auto l : w.labels) CHECK(l == Activity::Walking);
        CHECK(w.dropped == 0);
    }
    SUBCASE("13 towards-stairs against 12 walking points") {
        std::vector<std::optional<Activity>> p(25, Activity::Walking);
        for (std::size_t i = 12; i < 25; ++i) p[i] = Activity::TowardsStairs;
        const auto w = label_windows(p);
        REQUIRE(w.labels.size() == 1);
        CHECK(w.labels[0] == Activity::TowardsStairs);
        p[12] = Activity::Walking;
        CHECK(label_windows(p).labels[0] == Activity::Walking);
    }
    SUBCASE("exact tie goes to towards-stairs") {
        std::vector<std::optional<Activity>> p(24, Activity::Walking);
        for (std::size_t i = 0; i < 12; ++i) p[i] = Activity::TowardsStairs;
        const auto w = label_windows(p, 24, 6);
        REQUIRE(w.labels.size() == 1);
        CHECK(w.labels[0] == Activity::TowardsStairs);
    }
    SUBCASE("windows over an unlabelled gap are dropped") {
        std::vector<sim::LabelInterval> iv{{1, 0, 20 * 6000, Activity::Walking},
                                           {1, 22 * 6000, 60 * 6000, Activity::Walking}};
        const auto labels = label_grid(grid, iv);
        CHECK_FALSE(labels[20].has_value());
        const auto w = label_windows(labels);
        CHECK(w.dropped == 4);
        CHECK(w.labels.size() + w.dropped == window_count(60));
        for (auto s : w.starts) CHECK((s > 21 || s + 25 <= 20));
    }
    SUBCASE("overlapping intervals are rejected") {
        std::vector<sim::LabelInterval> iv{{1, 0, 10, Activity::Walking}, {1, 5, 20, Activity::TowardsStairs}};
        CHECK_THROWS_AS(label_grid(grid, iv), InvalidArgument);
    }
}

TEST_CASE("normalization") {
    std::vector<SensorColumns> none;
    FeatureDataset d(none);  // footedness column only
    for (double v : {8.0, 12.0, 10.0, 14.0}) d.append_row(std::vector<double>{v}, 0, 1, 0);
    SUBCASE("z-score with fitted mean and std") {
        const std::size_t fit[] = {0, 1};
        const auto n = normalize(d, fit);
        CHECK(n.at(3, 0) == doctest::Approx(2.0));
        CHECK(n.at(0, 0) == doctest::Approx(-1.0));
        CHECK(n.at(2, 0) == doctest::Approx(0.0));
    }
    SUBCASE("zero-variance columns are centred only") {
        const std::size_t fit[] = {2};
        const auto n = normalize(d, fit);
        CHECK(n.at(3, 0) == 4.0);
        CHECK(n.at(0, 0) == -2.0);
    }
    SUBCASE("fitting on a subset leaves the other rows off-centre") {
        auto big = toy_dataset(1, 200, 2, 8);
        std::vector<std::size_t> train(140);
        std::iota(train.begin(), train.end(), 0);
        for (std::size_t r = 140; r < 200; ++r) {
            double* row = big.row(r);
            for (std::size_t c = 0; c < big.cols(); ++c) row[c] += 3.0;
        }
        const auto n = normalize(big, train);
        double train_mean = 0, test_mean = 0;
        for (std::size_t r = 0; r < 140; ++r) train_mean += n.at(r, 0);
        for (std::size_t r = 140; r < 200; ++r) test_mean += n.at(r, 0);
        CHECK(std::abs(train_mean / 140) < 1e-12);
        CHECK(test_mean / 60 > 1.0);
    }
    CHECK_THROWS_AS(normalize(d, std::span<const std::size_t>{}), InvalidArgument);
}

TEST_CASE("class balancing") {
    SUBCASE("600 walking and 200 towards-stairs become 200 each") {
        auto d = toy_dataset(1, 800, 4, 5);
        REQUIRE(d.class_counts() == std::array<std::size_t, 2>{600, 200});
        const auto b = balance(d, 9);
        CHECK(b.class_counts() == std::array<std::size_t, 2>{200, 200});
        const auto again = balance(d, 9);
        CHECK(again.matrix() == b.matrix());
        CHECK(balance(d, 10).matrix() != b.matrix());
        CHECK(std::is_sorted(b.window_start_us().begin(), b.window_start_us().end()));
    }
    SUBCASE("already balanced input is unchanged") {
        auto d = toy_dataset(1, 100, 2, 6);
        const auto b = balance(d, 1);
        CHECK(b.matrix() == d.matrix());
        CHECK(b.labels() == d.labels());
    }
    SUBCASE("a single class is rejected") {
        auto d = toy_dataset(1, 10, 1000, 6);
        for (std::size_t r = 0; r < d.rows(); ++r) REQUIRE(d.labels()[r] == (r == 0 ? 1 : 0));
        auto only_walking = d.select_rows(std::vector<std::size_t>{1, 2, 3});
        CHECK_THROWS_AS(balance(only_walking, 1), SingleClass);
    }
}

TEST_CASE("dataset CSV round trip") {
    oracle::TempDir dir("dataset");
    auto d = toy_dataset(3, 25, 3, 11);
    write_dataset(d, dir.path() / "features.csv", {{"seed", 11}});
    CHECK(std::filesystem::exists(dir.path() / "features.csv.manifest.json"));
    const auto back = read_dataset(dir.path() / "features.csv");
    CHECK(back.cols() == d.cols());
    CHECK(back.matrix() == d.matrix());
    CHECK(back.labels() == d.labels());
    CHECK(back.subject_ids() == d.subject_ids());
    CHECK(back.window_start_us() == d.window_start_us());
    REQUIRE(back.sensors().size() == 3);
    CHECK(back.sensors()[2].name == "left_shin");
}
