#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "evaluate_detail.hpp"
#include "harnode/error.hpp"
#include "harnode/gait.hpp"

namespace harnode::learn {

EvalReport make_report(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) throw InvalidArgument("truth and prediction lengths differ");
    EvalReport r;
    for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion[truth[i]][predicted[i]];
    const auto total = truth.size();
    r.accuracy = total ? double(r.confusion[0][0] + r.confusion[1][1]) / double(total) : 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto predicted_c = r.confusion[0][c] + r.confusion[1][c];
        const auto actual_c = r.confusion[c][0] + r.confusion[c][1];
        r.precision[c] = predicted_c ? double(r.confusion[c][c]) / double(predicted_c) : 0.0;
        r.recall[c] = actual_c ? double(r.confusion[c][c]) / double(actual_c) : 0.0;
    }
    r.test_rows = total;
    return r;
}

SplitIndices random_split(std::size_t n, double ratio, std::uint64_t seed) {
    if (ratio <= 0 || ratio >= 1) throw InvalidArgument("train ratio must be in (0, 1)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * double(n) + 1e-9));
    SplitIndices s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

namespace detail {

EvalReport evaluate_columns(const pipeline::FeatureDataset& data, std::span<const std::size_t> columns,
                            const SplitIndices& split, Normalization mode, const ForestConfig& forest,
                            const ColumnOrder* full_order) {
    const std::size_t k = columns.size();
    const std::size_t n_train = split.train.size();
    const std::size_t n_test = split.test.size();
    std::vector<double> train(n_train * k), test(n_test * k);
    std::vector<int> y_train(n_train), y_test(n_test);
    for (std::size_t i = 0; i < n_train; ++i) {
        const double* src = data.row(split.train[i]);
        for (std::size_t j = 0; j < k; ++j) train[i * k + j] = src[columns[j]];
        y_train[i] = data.labels()[split.train[i]];
    }
    for (std::size_t i = 0; i < n_test; ++i) {
        const double* src = data.row(split.test[i]);
        for (std::size_t j = 0; j < k; ++j) test[i * k + j] = src[columns[j]];
        y_test[i] = data.labels()[split.test[i]];
    }

    if (mode != Normalization::None) {
        std::vector<double> mean(k, 0.0), scale(k, 0.0);
        const bool global = mode == Normalization::Global;
        const std::size_t n_fit = global ? data.rows() : n_train;
        auto fit_row = [&](std::size_t i) -> const double* {
            return global ? nullptr : train.data() + i * k;
        };
        for (std::size_t i = 0; i < n_fit; ++i) {
            if (global) {
                const double* src = data.row(i);
                for (std::size_t j = 0; j < k; ++j) mean[j] += src[columns[j]];
            } else {
                const double* src = fit_row(i);
                for (std::size_t j = 0; j < k; ++j) mean[j] += src[j];
            }
        }
        for (auto& m : mean) m /= double(n_fit);
        for (std::size_t i = 0; i < n_fit; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const double v = global ? data.row(i)[columns[j]] : fit_row(i)[j];
                const double d = v - mean[j];
                scale[j] += d * d;
            }
        }
        for (auto& s : scale) {
            s = std::sqrt(s / double(n_fit));
            if (s == 0) s = 1;
        }
        for (std::size_t i = 0; i < n_train; ++i) {
            for (std::size_t j = 0; j < k; ++j) train[i * k + j] = (train[i * k + j] - mean[j]) / scale[j];
        }
        for (std::size_t i = 0; i < n_test; ++i) {
            for (std::size_t j = 0; j < k; ++j) test[i * k + j] = (test[i * k + j] - mean[j]) / scale[j];
        }
    }

    const MatrixView train_view{train.data(), n_train, k};
    std::optional<ColumnOrder> order;
    if (full_order) {
        std::vector<std::int64_t> position(data.rows(), -1);
        for (std::size_t i = 0; i < n_train; ++i) position[split.train[i]] = static_cast<std::int64_t>(i);
        order.emplace(k);
        for (std::size_t j = 0; j < k; ++j) {
            auto& ord = (*order)[j];
            ord.reserve(n_train);
            for (auto r : (*full_order)[columns[j]]) {
                if (position[r] >= 0) ord.push_back(static_cast<std::uint32_t>(position[r]));
            }
        }
    } else {
        order = sort_columns(train_view);
    }

    const auto model = fit_forest(train_view, y_train, forest, &*order);
    const auto predicted = model.predict_all({test.data(), n_test, k});
    auto report = make_report(y_test, predicted);
    report.train_rows = n_train;
    return report;
}

}  // namespace detail

EvalReport eval_random_split(const pipeline::FeatureDataset& data, std::uint64_t seed, const EvalOptions& options) {
    if (data.rows() < 10) throw InsufficientData("need at least 10 rows for a split");
    const auto split = random_split(data.rows(), options.train_ratio, seed);
    std::vector<std::size_t> columns(data.cols());
    std::iota(columns.begin(), columns.end(), 0);
    auto forest = options.forest;
    forest.seed = sim::hash_combine(seed, options.forest.seed);
    auto report = detail::evaluate_columns(data, columns, split, options.normalization, forest, nullptr);
    report.seed = seed;
    report.split_kind = "random_" + std::to_string(static_cast<int>(std::lround(options.train_ratio * 100))) + "_" +
                        std::to_string(static_cast<int>(std::lround((1 - options.train_ratio) * 100)));
    return report;
}

LoocvResult eval_loocv(const pipeline::FeatureDataset& data, std::uint64_t seed, const EvalOptions& options) {
    const std::set<std::uint32_t> subjects(data.subject_ids().begin(), data.subject_ids().end());
    if (subjects.size() < 2) throw InvalidArgument("leave-one-subject-out needs at least two subjects");
    std::vector<std::size_t> columns(data.cols());
    std::iota(columns.begin(), columns.end(), 0);

    LoocvResult result;
    for (auto subject : subjects) {
        SplitIndices split;
        std::vector<std::size_t> others;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            (data.subject_ids()[r] == subject ? split.test : others).push_back(r);
        }
        const auto fold_seed = sim::hash_combine(seed, subject);
        split.train = pipeline::balance_rows(data.labels(), others, fold_seed);
        for (auto r : split.train) {
            if (data.subject_ids()[r] == subject) throw InvalidArgument("held-out subject leaked into training");
        }
        auto forest = options.forest;
        forest.seed = sim::hash_combine(fold_seed, options.forest.seed);
        auto report = detail::evaluate_columns(data, columns, split, options.normalization, forest, nullptr);
        report.seed = fold_seed;
        report.split_kind = "loso_subject_" + std::to_string(subject);
        result.folds.emplace_back(subject, report);
    }
    double sum = 0;
    for (const auto& [s, r] : result.folds) sum += r.accuracy;
    result.mean_accuracy = sum / double(result.folds.size());
    double var = 0;
    for (const auto& [s, r] : result.folds) var += (r.accuracy - result.mean_accuracy) * (r.accuracy - result.mean_accuracy);
    result.std_accuracy = std::sqrt(var / double(result.folds.size()));
    return result;
}

}  // namespace harnode::learn
