#include <doctest.h>

#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "harnode/learn.hpp"
#include "support/oracles.hpp"

using namespace harnode;
using namespace harnode::learn;
using harnode::pipeline::FeatureDataset;
using harnode::pipeline::SensorColumns;

namespace {

/// Sensors with graded informativeness: sensor s shifts its first column by
/// strength[s] * label.
FeatureDataset graded_dataset(const std::vector<double>& strength, std::size_t rows, std::size_t subjects,
                              std::uint64_t seed) {
    std::vector<SensorColumns> cols;
    for (std::size_t s = 0; s < strength.size(); ++s) {
        const auto loc = static_cast<Location>(s);
        cols.push_back({std::string(location_name(loc)), {loc, Orientation::Front}, 0});
    }
    FeatureDataset d(cols);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::vector<double> row(d.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        const int label = static_cast<int>(r % 2);
        for (auto& v : row) v = g(rng);
        for (std::size_t s = 0; s < strength.size(); ++s) row[s * 72] += strength[s] * label;
        row.back() = static_cast<double>((r / 2) % subjects == 3);
        d.append_row(row, label, static_cast<std::uint32_t>((r / 2) % subjects), static_cast<std::int64_t>(r));
    }
    return d;
}

ForestConfig small_forest(std::size_t trees = 15) {
    ForestConfig c;
    c.n_trees = trees;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("gini examples") {
    CHECK(gini(std::vector<double>{2, 2}) == doctest::Approx(0.5));
    CHECK(gini(std::vector<double>{4, 0}) == 0.0);
    CHECK(gini(std::vector<double>{3, 1}) == doctest::Approx(0.375));
    CHECK_THROWS_AS(gini(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(gini(std::vector<double>{0, 0}), InvalidArgument);
}

TEST_CASE("best split examples") {
    const std::vector<double> x{1, 2, 8, 9};
    const std::vector<int> y{0, 0, 1, 1};
    const std::vector<std::size_t> rows{0, 1, 2, 3}, features{0};
    const auto s = best_split({x.data(), 4, 1}, y, rows, features);
    REQUIRE(s);
    CHECK(s->feature == 0);
    CHECK(s->threshold == 5.0);
    CHECK(s->impurity == 0.0);

    const std::vector<int> same{1, 1, 1, 1};
    CHECK_FALSE(best_split({x.data(), 4, 1}, same, rows, features));

    SUBCASE("ties go to the lower feature") {
        const std::vector<double> two{1, 1, 2, 2, 8, 8, 9, 9};  // identical columns
        const auto t = best_split({two.data(), 4, 2}, y, rows, std::vector<std::size_t>{1, 0});
        REQUIRE(t);
        CHECK(t->feature == 0);
    }
}

TEST_CASE("best split equals brute force on small random instances") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> nrows(2, 100), nfeat(1, 5), value(0, 12), label(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(nrows(rng));
        const auto f = static_cast<std::size_t>(nfeat(rng));
        std::vector<std::vector<double>> rowsv(n, std::vector<double>(f));
        std::vector<double> flat;
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : rowsv[i]) {
                v = value(rng) * 0.5;
                flat.push_back(v);
            }
            y[i] = label(rng);
        }
        std::vector<std::size_t> rows(n), feats(f);
        std::iota(rows.begin(), rows.end(), 0);
        std::iota(feats.begin(), feats.end(), 0);
        const auto got = best_split({flat.data(), n, f}, y, rows, feats);
        const auto want = oracle::brute_force_stump(rowsv, y);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            REQUIRE(got->feature == want->feature);
            REQUIRE(got->threshold == doctest::Approx(want->threshold).epsilon(1e-12));
            REQUIRE(got->impurity == doctest::Approx(want->impurity).epsilon(1e-12));
        }
    }
}

TEST_CASE("single depth-1 tree over all features is the best stump") {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<int> nrows(4, 100), nfeat(1, 5), label(0, 1);
    std::normal_distribution<double> g(0, 1);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(nrows(rng));
        const auto f = static_cast<std::size_t>(nfeat(rng));
        std::vector<std::vector<double>> rowsv(n, std::vector<double>(f));
        std::vector<double> flat;
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = label(rng);
            for (auto& v : rowsv[i]) {
                v = g(rng) + 0.7 * y[i];
                flat.push_back(v);
            }
        }
        if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) continue;
        ForestConfig c;
        c.n_trees = 1;
        c.max_depth = 1;
        c.features_per_split = f;
        c.bootstrap = false;
        c.seed = static_cast<std::uint64_t>(trial);
        const auto forest = fit_forest({flat.data(), n, f}, y, c);
        const auto want = oracle::brute_force_stump(rowsv, y);
        REQUIRE(forest.trees().size() == 1);
        const auto& root = forest.trees()[0].nodes.at(0);
        if (!want) {
            REQUIRE(root.is_leaf());
            continue;
        }
        REQUIRE_FALSE(root.is_leaf());
        REQUIRE(static_cast<std::size_t>(root.feature) == want->feature);
        REQUIRE(root.threshold == doctest::Approx(want->threshold).epsilon(1e-12));
        REQUIRE(forest.trees()[0].depth() == 1);
        ++compared;
    }
    CHECK(compared > 150);
}

TEST_CASE("forest separates blobs and is deterministic") {
    const auto train = oracle::make_blobs(600, 6, 6.0, 1);
    const auto test = oracle::make_blobs(400, 6, 6.0, 2);
    ForestConfig c = small_forest(25);
    const auto a = fit_forest({train.x.data(), train.rows, train.cols}, train.y, c);
    const auto pred = a.predict_all({test.x.data(), test.rows, test.cols});
    const auto report = make_report(test.y, pred);
    CHECK(report.accuracy >= 0.99);

    const auto b = fit_forest({train.x.data(), train.rows, train.cols}, train.y, c);
    CHECK(b.predict_all({test.x.data(), test.rows, test.cols}) == pred);
    REQUIRE(a.trees().size() == b.trees().size());
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        REQUIRE(a.trees()[t].nodes.size() == b.trees()[t].nodes.size());
        for (std::size_t i = 0; i < a.trees()[t].nodes.size(); ++i) {
            REQUIRE(a.trees()[t].nodes[i].feature == b.trees()[t].nodes[i].feature);
            REQUIRE(a.trees()[t].nodes[i].threshold == b.trees()[t].nodes[i].threshold);
        }
    }
}

TEST_CASE("fit_forest input checks") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK_THROWS_AS(fit_forest({x.data(), 4, 1}, std::vector<int>{1, 1, 1, 1}, small_forest()), SingleClass);
    CHECK_THROWS_AS(fit_forest({x.data(), 4, 1}, std::vector<int>{0, 1, 2, 1}, small_forest()), InvalidArgument);
    CHECK_THROWS_AS(fit_forest({x.data(), 4, 1}, std::vector<int>{0, 1}, small_forest()), InvalidArgument);
}

TEST_CASE("majority vote, tie rule and width checks") {
    Tree zero{{TreeNode{-1, 0, -1, -1, {3, 0}}}};
    Tree one{{TreeNode{-1, 0, -1, -1, {0, 3}}}};
    const std::vector<double> row{0.0, 0.0};
    CHECK(Forest({one, one, one}, 2).predict(row) == 1);
    CHECK(Forest({zero, one}, 2).predict(row) == 0);
    CHECK(Forest({one, zero, one, zero}, 2).predict(row) == 0);
    CHECK(Forest({one, zero, one}, 2).predict(row) == 1);
    CHECK_THROWS_AS(Forest({one}, 3).predict(row), InvalidArgument);
    Tree tied{{TreeNode{-1, 0, -1, -1, {2, 2}}}};
    CHECK(tied.predict(row.data()) == 0);

    SUBCASE("vote equals the mode of tree outputs") {
        const auto train = oracle::make_blobs(200, 3, 1.0, 5);
        const auto forest = fit_forest({train.x.data(), train.rows, train.cols}, train.y, small_forest(8));
        const auto probe = oracle::make_blobs(300, 3, 1.0, 6);
        for (std::size_t r = 0; r < probe.rows; ++r) {
            const double* p = probe.x.data() + r * probe.cols;
            int ones = 0;
            for (const auto& t : forest.trees()) ones += t.predict(p);
            const int mode = 2 * ones > static_cast<int>(forest.trees().size()) ? 1 : 0;
            REQUIRE(forest.predict({p, probe.cols}) == mode);
        }
    }
}

TEST_CASE("reports are consistent with their confusion matrix") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> t(50), p(50);
        for (auto& v : t) v = bit(rng);
        for (auto& v : p) v = bit(rng);
        const auto r = make_report(t, p);
        const auto& m = r.confusion;
        const double total = static_cast<double>(m[0][0] + m[0][1] + m[1][0] + m[1][1]);
        REQUIRE(total == 50);
        REQUIRE(r.accuracy == static_cast<double>(m[0][0] + m[1][1]) / total);
        for (int c = 0; c < 2; ++c) {
            const auto pc = m[0][c] + m[1][c];
            const auto ac = m[c][0] + m[c][1];
            REQUIRE(r.precision[c] == (pc ? static_cast<double>(m[c][c]) / static_cast<double>(pc) : 0.0));
            REQUIRE(r.recall[c] == (ac ? static_cast<double>(m[c][c]) / static_cast<double>(ac) : 0.0));
        }
    }
    const std::vector<int> truth{0, 1, 1, 0, 1};
    const auto perfect = make_report(truth, truth);
    CHECK(perfect.confusion[0][1] == 0);
    CHECK(perfect.confusion[1][0] == 0);
    CHECK(perfect.precision == std::array<double, 2>{1, 1});
    CHECK(perfect.recall == std::array<double, 2>{1, 1});
}

TEST_CASE("random split sizes and determinism") {
    const auto s = random_split(200, 0.7, 4);
    CHECK(s.train.size() == 140);
    CHECK(s.test.size() == 60);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 200);
    CHECK(random_split(200, 0.7, 4).train == s.train);
    CHECK(random_split(200, 0.7, 5).train != s.train);
    CHECK_THROWS_AS(random_split(10, 1.0, 1), InvalidArgument);

    const auto d = graded_dataset({3.0}, 200, 4, 1);
    EvalOptions o;
    o.forest = small_forest(5);
    const auto r = eval_random_split(d, 4, o);
    CHECK(r.train_rows == 140);
    CHECK(r.test_rows == 60);
    CHECK(r.split_kind == "random_70_30");
    CHECK_THROWS_AS(eval_random_split(d.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}), 4, o),
                    InsufficientData);
}

TEST_CASE("leave-one-subject-out") {
    const auto d = graded_dataset({2.0, 0.5}, 400, 10, 2);
    EvalOptions o;
    o.forest = small_forest(10);
    const auto r = eval_loocv(d, 7, o);
    REQUIRE(r.folds.size() == 10);
    double sum = 0;
    for (const auto& [subject, report] : r.folds) {
        std::size_t rows_of_subject = 0;
        for (auto s : d.subject_ids()) rows_of_subject += s == subject;
        CHECK(report.test_rows == rows_of_subject);
        CHECK(report.split_kind == "loso_subject_" + std::to_string(subject));
        sum += report.accuracy;
    }
    CHECK(r.mean_accuracy == doctest::Approx(sum / 10));
    CHECK(r.std_accuracy >= 0);
    CHECK(eval_loocv(d, 7, o).mean_accuracy == r.mean_accuracy);

    auto single = d.select_rows(std::vector<std::size_t>{0, 1, 20, 21});
    CHECK_THROWS_AS(eval_loocv(single, 1, o), InvalidArgument);
}

TEST_CASE("subset search matches a scripted loop over every subset") {
    const auto d = graded_dataset({2.5, 0.3, 1.2}, 240, 4, 9);
    SearchOptions o;
    o.eval.forest = small_forest(7);
    o.seed = 77;
    const auto result = subset_search(d, o);
    REQUIRE(result.subsets.size() == 7);
    REQUIRE(result.best_per_cardinality.size() == 3);
    for (std::uint32_t mask = 1; mask < 8; ++mask) {
        const auto& got = result.subsets[mask - 1];
        REQUIRE(got.mask == mask);
        const auto sliced = d.select_mask(mask);
        const auto want = eval_random_split(sliced, subset_seed(o.seed, mask), o.eval);
        CHECK(got.report.confusion == want.confusion);
        CHECK(got.report.accuracy == want.accuracy);
        CHECK(got.report.seed == subset_seed(o.seed, mask));
        CHECK(evaluate_subset(d, mask, o).confusion == want.confusion);
    }
    for (std::size_t n = 1; n <= 3; ++n) {
        double best = -1;
        for (const auto& s : result.subsets) {
            if (s.sensors.size() == n) best = std::max(best, s.report.accuracy);
        }
        CHECK(result.best_per_cardinality[n - 1].report.accuracy == best);
        CHECK(result.best_per_cardinality[n - 1].sensors.size() == n);
    }
    CHECK(result.subsets[0].sensors == std::vector<std::string>{"left_foot"});
    CHECK(result.subsets[6].sensors == std::vector<std::string>{"left_foot", "right_foot", "left_shin"});
}

TEST_CASE("subset search results do not depend on threads or order") {
    const auto d = graded_dataset({1.5, 0.8, 0.4, 1.0}, 160, 4, 10);
    SearchOptions o;
    o.eval.forest = small_forest(5);
    o.threads = 1;
    const auto one = subset_search(d, o);
    o.threads = 4;
    const auto four = subset_search(d, o);
    REQUIRE(one.subsets.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) CHECK(one.subsets[i].report.confusion == four.subsets[i].report.confusion);

    o.masks = std::vector<std::uint32_t>{9, 3, 9};
    const auto some = subset_search(d, o);
    REQUIRE(some.subsets.size() == 2);
    CHECK(some.subsets[0].mask == 3);
    CHECK(some.subsets[0].report.confusion == one.subsets[2].report.confusion);
    CHECK(some.subsets[1].report.confusion == one.subsets[8].report.confusion);
}

TEST_CASE("subset search edge cases") {
    SearchOptions o;
    o.eval.forest = small_forest(5);
    const auto d1 = graded_dataset({2.0}, 100, 4, 12);
    const auto r = subset_search(d1, o);
    REQUIRE(r.subsets.size() == 1);
    CHECK(r.subsets[0].report.confusion == evaluate_subset(d1, 1, o).confusion);
    CHECK(r.best_per_cardinality.size() == 1);

    auto limited = o;
    limited.max_sensors = 2;
    CHECK_THROWS_AS(subset_search(graded_dataset({1, 1, 1}, 40, 2, 1), limited), InvalidArgument);
    CHECK_THROWS_AS(evaluate_subset(d1, 0, o), InvalidArgument);
    CHECK_THROWS_AS(evaluate_subset(d1, 2, o), InvalidArgument);
}

TEST_CASE("locations of interest") {
    const auto d = graded_dataset({0.5, 2.0, 0.1, 0.1, 0.1, 1.0, 0.1, 0.3, 0.1, 0.1, 0.6}, 200, 4, 13);
    SearchOptions o;
    o.eval.forest = small_forest(5);
    const std::vector<std::string> names{"right_foot", "right_thigh"};
    CHECK(mask_of(d, names) == ((1u << 1) | (1u << 5)));
    CHECK_THROWS_AS(mask_of(d, std::vector<std::string>{"elbow"}), InvalidArgument);

    const auto defaults = default_locations_of_interest();
    CHECK(defaults.size() == 5);
    CHECK(defaults.back().sensors == std::vector<std::string>{"right_foot"});

    CHECK(report_locations_of_interest(d, nullptr, {}, o).empty());
    const std::vector<NamedSubset> asked{{{"right_thigh", "right_foot"}}, {{"head"}}};
    const auto rows = report_locations_of_interest(d, nullptr, asked, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mask == mask_of(d, names));
    CHECK(rows[0].report.confusion == evaluate_subset(d, rows[0].mask, o).confusion);
    CHECK(rows[1].sensors == std::vector<std::string>{"head"});
    const std::vector<NamedSubset> unknown{{{"tail"}}};
    CHECK_THROWS_AS(report_locations_of_interest(d, nullptr, unknown, o), InvalidArgument);

    o.masks = std::vector<std::uint32_t>{mask_of(d, names)};
    const auto cache = subset_search(d, o);
    const auto cached = report_locations_of_interest(d, &cache, asked, o);
    CHECK(cached[0].report.confusion == rows[0].report.confusion);
    CHECK(cached[1].report.confusion == rows[1].report.confusion);
}

TEST_CASE("report files") {
    oracle::TempDir dir("reports");
    const auto d = graded_dataset({2.0, 0.5}, 120, 4, 14);
    SearchOptions o;
    o.eval.forest = small_forest(5);
    const auto r = subset_search(d, o);
    write_subset_results_csv(dir.path() / "subsets.csv", r);
    write_best_per_cardinality_csv(dir.path() / "best.csv", r);
    write_confusion_csv(dir.path() / "confusion.csv", r.subsets.back().report);
    write_plot_data(dir.path() / "plot.json", r);

    auto lines = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::vector<std::string> out;
        for (std::string l; std::getline(in, l);) out.push_back(l);
        return out;
    };
    const auto subsets = lines(dir.path() / "subsets.csv");
    REQUIRE(subsets.size() == 4);
    CHECK(subsets[0].rfind("mask,n_sensors,sensors,accuracy", 0) == 0);
    CHECK(subsets[3].rfind("3,2,left_foot;right_foot,", 0) == 0);
    CHECK(lines(dir.path() / "best.csv").size() == 3);
    const auto confusion = lines(dir.path() / "confusion.csv");
    REQUIRE(confusion.size() == 3);
    CHECK(confusion[0] == "actual,predicted_walking,predicted_towards_stairs");
    const auto plot = nlohmann::json::parse(std::ifstream(dir.path() / "plot.json"));
    CHECK(plot["best_per_cardinality"].size() == 2);
    CHECK(plot["points"].size() == 3);
}
