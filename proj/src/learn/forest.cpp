#include <algorithm>
#include <cmath>
#include <numeric>

#include "harnode/error.hpp"
#include "harnode/gait.hpp"
#include "tree_builder.hpp"

namespace harnode::learn {

ColumnOrder sort_columns(const MatrixView& x) {
    ColumnOrder order(x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) {
        auto& ord = order[c];
        ord.resize(x.rows);
        std::iota(ord.begin(), ord.end(), 0u);
        std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = x.at(a, c), vb = x.at(b, c);
            return va != vb ? va < vb : a < b;
        });
    }
    return order;
}

Forest fit_forest(const MatrixView& x, std::span<const int> y, const ForestConfig& config, const ColumnOrder* order) {
    if (x.rows < 2) throw InvalidArgument("need at least 2 rows");
    if (x.cols == 0) throw InvalidArgument("need at least 1 feature");
    if (y.size() != x.rows) throw InvalidArgument("label count does not match rows");
    if (config.n_trees == 0 || config.min_samples_split < 2) throw InvalidArgument("bad forest configuration");
    std::size_t counts[2] = {0, 0};
    for (int label : y) {
        if (label != 0 && label != 1) throw InvalidArgument("labels must be 0 or 1");
        ++counts[label];
    }
    if (counts[0] == 0 || counts[1] == 0) throw SingleClass("training data has a single class");
    for (std::size_t i = 0; i < x.rows * x.cols; ++i) {
        if (!std::isfinite(x.data[i])) throw InvalidArgument("non-finite training value");
    }

    detail::GrowParams params;
    params.max_depth = config.max_depth;
    params.min_samples_split = config.min_samples_split;
    params.features_per_split = config.features_per_split > 0
                                    ? config.features_per_split
                                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(x.cols))));

    std::optional<ColumnOrder> own;
    if (!order) {
        own = sort_columns(x);
        order = &*own;
    }
    const auto ranked = detail::rank_matrix(x, *order);

    std::vector<Tree> trees;
    trees.reserve(config.n_trees);
    std::vector<std::uint32_t> weight(x.rows);
    std::vector<std::uint32_t> rows;
    rows.reserve(x.rows);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        std::mt19937_64 rng(sim::hash_combine(config.seed, t));
        if (config.bootstrap) {
            std::fill(weight.begin(), weight.end(), 0u);
            std::uniform_int_distribution<std::uint32_t> draw(0, static_cast<std::uint32_t>(x.rows - 1));
            for (std::size_t i = 0; i < x.rows; ++i) ++weight[draw(rng)];
        } else {
            std::fill(weight.begin(), weight.end(), 1u);
        }
        rows.clear();
        for (std::uint32_t r = 0; r < x.rows; ++r) {
            if (weight[r] > 0) rows.push_back(r);
        }
        trees.push_back(detail::grow_tree(ranked, y, rows, weight, params, rng));
    }
    return Forest(std::move(trees), x.cols);
}

Forest fit_forest(const pipeline::FeatureDataset& data, const ForestConfig& config) {
    return fit_forest(view_of(data), data.labels(), config);
}

int Forest::predict(std::span<const double> row) const {
    if (row.size() != width_) throw InvalidArgument("row width does not match the forest");
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += static_cast<std::size_t>(t.predict(row.data()));
    return 2 * votes > trees_.size() ? 1 : 0;
}

std::vector<int> Forest::predict_all(const MatrixView& x) const {
    if (x.cols != width_) throw InvalidArgument("matrix width does not match the forest");
    std::vector<int> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict({x.row(r), x.cols});
    return out;
}

}  // namespace harnode::learn
