#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harnode/pipeline.hpp"

namespace harnode::learn {

/// Row-major matrix view.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data + r * cols; }
};

MatrixView view_of(const pipeline::FeatureDataset& data);

/// 1 - sum p_i^2. Throws InvalidArgument on an empty or all-zero count list.
double gini(std::span<const double> counts);

struct Split {
    std::size_t feature = 0;
    double threshold = 0;
    double impurity = 0;  // weighted child Gini
};

/// Minimum weighted child Gini over candidates x midpoints of consecutive
/// distinct values; ties go to the lower feature, then the lower threshold.
/// Nothing when no split lowers the parent impurity.
std::optional<Split> best_split(const MatrixView& x, std::span<const int> y, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features);

struct TreeNode {
    std::int32_t feature = -1;  // -1 for a leaf
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<std::uint32_t, 2> counts{0, 0};

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at 0

    /// Leaf majority; a tie goes to class 0.
    int predict(const double* row) const;
    std::size_t depth() const;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;           // 0 = unlimited
    std::size_t min_samples_split = 2;
    std::size_t features_per_split = 0;  // 0 = floor(sqrt(F))
    bool bootstrap = true;               // false: every tree sees every row once
    std::uint64_t seed = 1;
};

class Forest {
public:
    Forest() = default;
    Forest(std::vector<Tree> trees, std::size_t width) : trees_(std::move(trees)), width_(width) {}

    /// Majority vote; a tie goes to class 0. Throws InvalidArgument on a width mismatch.
    int predict(std::span<const double> row) const;
    std::vector<int> predict_all(const MatrixView& x) const;
    const std::vector<Tree>& trees() const { return trees_; }
    std::size_t width() const { return width_; }

private:
    std::vector<Tree> trees_;
    std::size_t width_ = 0;
};

/// For each column, the row indices of x in non-decreasing value order.
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;
ColumnOrder sort_columns(const MatrixView& x);

/// Throws SingleClass when y has one class and InvalidArgument on bad input.
/// `order` may carry a precomputed sort_columns(x).
Forest fit_forest(const MatrixView& x, std::span<const int> y, const ForestConfig& config,
                  const ColumnOrder* order = nullptr);
Forest fit_forest(const pipeline::FeatureDataset& data, const ForestConfig& config);

struct EvalReport {
    double accuracy = 0;
    std::array<double, 2> precision{0, 0};  // per class; 0 when nothing was predicted as that class
    std::array<double, 2> recall{0, 0};
    std::array<std::array<std::uint64_t, 2>, 2> confusion{};  // [actual][predicted]
    std::uint32_t mask = 0;
    std::uint64_t seed = 0;
    std::string split_kind;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

EvalReport make_report(std::span<const int> truth, std::span<const int> predicted);

enum class Normalization { TrainOnly, Global, None };

struct EvalOptions {
    ForestConfig forest;
    double train_ratio = 0.7;
    Normalization normalization = Normalization::TrainOnly;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle; the first floor(ratio * n) rows train.
SplitIndices random_split(std::size_t n, double ratio, std::uint64_t seed);

/// Throws InsufficientData for fewer than 10 rows.
EvalReport eval_random_split(const pipeline::FeatureDataset& data, std::uint64_t seed, const EvalOptions& options);

struct LoocvResult {
    double mean_accuracy = 0;
    double std_accuracy = 0;  // population
    std::vector<std::pair<std::uint32_t, EvalReport>> folds;
};

/// One fold per subject: balance and normalize within the training rows, test
/// on every row of the held-out subject. Throws InvalidArgument for fewer
/// than two subjects.
LoocvResult eval_loocv(const pipeline::FeatureDataset& data, std::uint64_t seed, const EvalOptions& options);

std::uint64_t subset_seed(std::uint64_t global_seed, std::uint32_t mask);

struct SubsetResult {
    std::uint32_t mask = 0;
    std::vector<std::string> sensors;
    EvalReport report;
};

struct SubsetSearchResult {
    std::vector<std::string> sensor_names;
    std::vector<SubsetResult> subsets;              // ascending mask
    std::vector<SubsetResult> best_per_cardinality;  // index n-1
};

struct SearchOptions {
    EvalOptions eval;
    std::uint64_t seed = 1;
    std::size_t max_sensors = 20;
    std::optional<std::vector<std::uint32_t>> masks;  // restrict to these subsets
    std::size_t threads = 0;                          // 0 = one per hardware thread
    /// Called from the worker that finished a subset, serialized.
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Evaluates one subset with its derived seed.
EvalReport evaluate_subset(const pipeline::FeatureDataset& data, std::uint32_t mask, const SearchOptions& options);

/// Every non-empty subset of the dataset's sensors. Results do not depend on
/// the thread count. Throws InvalidArgument when the sensor count exceeds
/// max_sensors.
SubsetSearchResult subset_search(const pipeline::FeatureDataset& data, const SearchOptions& options);

std::uint32_t mask_of(const pipeline::FeatureDataset& data, std::span<const std::string> sensors);

struct NamedSubset {
    std::vector<std::string> sensors;
};

struct LocationRow {
    std::vector<std::string> sensors;
    std::uint32_t mask = 0;
    EvalReport report;
};

/// The practical placements compared in the original study.
std::vector<NamedSubset> default_locations_of_interest();

/// Accuracy per named subset, in the given order; subsets missing from the
/// cache are evaluated with the same seed rule. Throws InvalidArgument on an
/// unknown sensor name.
std::vector<LocationRow> report_locations_of_interest(const pipeline::FeatureDataset& data,
                                                      const SubsetSearchResult* cache,
                                                      std::span<const NamedSubset> subsets,
                                                      const SearchOptions& options);

void write_subset_results_csv(const std::filesystem::path& path, const SubsetSearchResult& result);
void write_best_per_cardinality_csv(const std::filesystem::path& path, const SubsetSearchResult& result);
void write_confusion_csv(const std::filesystem::path& path, const EvalReport& report);
void write_locations_csv(const std::filesystem::path& path, std::span<const LocationRow> rows);
/// Accuracy against subset size: best per size plus every subset's point.
void write_plot_data(const std::filesystem::path& path, const SubsetSearchResult& result);

}  // namespace harnode::learn
