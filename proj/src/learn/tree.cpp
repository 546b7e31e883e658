#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "harnode/error.hpp"
#include "harnode/simd/kernels.hpp"
#include "tree_builder.hpp"

namespace harnode::learn {

MatrixView view_of(const pipeline::FeatureDataset& data) { return {data.matrix().data(), data.rows(), data.cols()}; }

double gini(std::span<const double> counts) {
    if (counts.empty()) throw InvalidArgument("gini of no classes");
    double total = 0;
    for (double c : counts) {
        if (c < 0) throw InvalidArgument("negative class count");
        total += c;
    }
    if (total <= 0) throw InvalidArgument("gini of an empty node");
    double sq = 0;
    for (double c : counts) sq += (c / total) * (c / total);
    return 1 - sq;
}

std::optional<Split> best_split(const MatrixView& x, std::span<const int> y, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_features) {
    if (rows.size() < 2) return std::nullopt;
    double c0 = 0, c1 = 0;
    for (auto r : rows) (y[r] == 0 ? c0 : c1) += 1;
    if (c0 == 0 || c1 == 0) return std::nullopt;
    const double parent = detail::node_gini(c0, c1);

    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());
    std::vector<std::pair<double, int>> column(rows.size());

    std::optional<Split> best;
    double best_impurity = parent - detail::kImpurityTie;
    for (auto f : features) {
        if (f >= x.cols) throw InvalidArgument("feature index out of range");
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x.at(rows[i], f), y[rows[i]]};
        std::sort(column.begin(), column.end());
        double l0 = 0, l1 = 0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            (column[i].second == 0 ? l0 : l1) += 1;
            if (column[i].first == column[i + 1].first) continue;
            const double imp = detail::weighted_gini(l0, l1, c0, c1);
            if (imp < best_impurity) {
                best_impurity = imp - detail::kImpurityTie;
                best = Split{f, detail::split_threshold(column[i].first, column[i + 1].first), imp};
            }
        }
    }
    return best;
}

int Tree::predict(const double* row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].counts[1] > nodes[i].counts[0] ? 1 : 0;
}

std::size_t Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
        }
    }
    return deepest;
}

namespace detail {

RankedMatrix rank_matrix(const MatrixView& x, const ColumnOrder& order) {
    if (order.size() != x.cols) throw InvalidArgument("column order width mismatch");
    RankedMatrix m;
    m.rows = x.rows;
    m.cols = x.cols;
    m.rank.resize(x.rows * x.cols);
    m.distinct.resize(x.cols);
    std::uint32_t max_rank = 0;
    for (std::size_t c = 0; c < x.cols; ++c) {
        const auto& ord = order[c];
        if (ord.size() != x.rows) throw InvalidArgument("column order length mismatch");
        auto& uniq = m.distinct[c];
        std::uint32_t* rank = m.rank.data() + c * x.rows;
        for (auto r : ord) {
            const double v = x.at(r, c);
            if (uniq.empty() || v != uniq.back()) {
                if (!uniq.empty() && v < uniq.back()) throw InvalidArgument("column order is not sorted");
                uniq.push_back(v);
            }
            rank[r] = static_cast<std::uint32_t>(uniq.size() - 1);
        }
        max_rank = std::max<std::uint32_t>(max_rank, static_cast<std::uint32_t>(uniq.size() - 1));
    }
    unsigned bits = 1;
    while ((std::uint64_t{1} << bits) <= (std::uint64_t{max_rank} << 1 | 1)) ++bits;
    m.key_bits = bits;
    return m;
}

namespace {

constexpr std::size_t kSmallSort = 96;

/// Sorts (key << 32 | weight) elements by key with one histogram pass for
/// every digit, skipping digits on which all elements agree.
void radix_sort(std::uint64_t* keys, std::uint64_t* scratch, std::size_t n, unsigned key_bits) {
    if (n <= kSmallSort) {
        std::sort(keys, keys + n);
        return;
    }
    const unsigned digits = (key_bits + 7) / 8;
    std::array<std::array<std::uint32_t, 256>, 4> count{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::uint32_t>(keys[i] >> 32);
        for (unsigned d = 0; d < digits; ++d) ++count[d][(k >> (8 * d)) & 0xFF];
    }
    std::uint64_t* src = keys;
    std::uint64_t* dst = scratch;
    for (unsigned d = 0; d < digits; ++d) {
        auto& c = count[d];
        const unsigned shift = 32 + 8 * d;
        if (c[(src[0] >> shift) & 0xFF] == n) continue;
        std::uint32_t offset = 0;
        for (auto& b : c) {
            const auto v = b;
            b = offset;
            offset += v;
        }
        for (std::size_t i = 0; i < n; ++i) dst[c[(src[i] >> shift) & 0xFF]++] = src[i];
        std::swap(src, dst);
    }
    if (src != keys) std::copy_n(src, n, keys);
}

struct Pending {
    std::int32_t node;
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
};

}  // namespace

Tree grow_tree(const RankedMatrix& m, std::span<const int> y, std::vector<std::uint32_t> rows,
               std::span<const std::uint32_t> weight, const GrowParams& params, std::mt19937_64& rng) {
    const auto& kernels = simd::active_kernels();
    const std::size_t n_all = rows.size();
    const std::size_t mtry = std::clamp<std::size_t>(params.features_per_split, 1, m.cols);
    if (m.key_bits > 32) throw InvalidArgument("rank keys exceed 32 bits");

    std::vector<std::uint64_t> keys(n_all), scratch(n_all);
    std::vector<double> left0(n_all), left1(n_all), impurity(n_all);
    std::vector<std::uint32_t> boundary(n_all);
    std::vector<std::size_t> features(m.cols);
    std::iota(features.begin(), features.end(), 0);
    std::vector<std::size_t> candidates(mtry);

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, n_all, 0}};
    while (!stack.empty()) {
        const Pending p = stack.back();
        stack.pop_back();
        const std::size_t n = p.end - p.begin;
        std::uint32_t c[2] = {0, 0};
        for (std::size_t i = p.begin; i < p.end; ++i) c[y[rows[i]]] += weight[rows[i]];
        tree.nodes[static_cast<std::size_t>(p.node)].counts = {c[0], c[1]};

        if (c[0] == 0 || c[1] == 0 || std::size_t{c[0]} + c[1] < params.min_samples_split ||
            (params.max_depth > 0 && p.depth >= params.max_depth)) {
            continue;
        }

        if (mtry == m.cols) {
            std::copy(features.begin(), features.end(), candidates.begin());
        } else {
            for (std::size_t k = 0; k < mtry; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, m.cols - 1);
                std::swap(features[k], features[pick(rng)]);
            }
            std::copy_n(features.begin(), mtry, candidates.begin());
            std::sort(candidates.begin(), candidates.end());
        }

        const double total0 = c[0], total1 = c[1];
        double best_impurity = node_gini(total0, total1) - kImpurityTie;
        std::size_t best_feature = m.cols;
        std::uint32_t best_lo = 0, best_hi = 0;
        const std::uint32_t* node_rows = rows.data() + p.begin;
        for (auto f : candidates) {
            const std::uint32_t* rank = m.rank.data() + f * m.rows;
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = node_rows[i];
                const std::uint64_t key = rank[r] << 1 | static_cast<std::uint32_t>(y[r]);
                keys[i] = key << 32 | weight[r];
            }
            radix_sort(keys.data(), scratch.data(), n, m.key_bits);

            std::size_t boundaries = 0;
            std::uint32_t l[2] = {0, 0};
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto k = keys[i];
                l[k >> 32 & 1] += static_cast<std::uint32_t>(k);
                left0[boundaries] = l[0];
                left1[boundaries] = l[1];
                boundary[boundaries] = static_cast<std::uint32_t>(i);
                boundaries += (k >> 33) != (keys[i + 1] >> 33);
            }
            if (boundaries == 0) continue;
            kernels.split_impurity(left0.data(), left1.data(), boundaries, total0, total1, impurity.data());
            for (std::size_t b = 0; b < boundaries; ++b) {
                if (impurity[b] < best_impurity) {
                    best_impurity = impurity[b] - kImpurityTie;
                    best_feature = f;
                    const auto i = boundary[b];
                    best_lo = static_cast<std::uint32_t>(keys[i] >> 33);
                    best_hi = static_cast<std::uint32_t>(keys[i + 1] >> 33);
                }
            }
        }
        if (best_feature == m.cols) continue;

        const std::uint32_t* rank = m.rank.data() + best_feature * m.rows;
        const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                        rows.begin() + static_cast<std::ptrdiff_t>(p.end),
                                        [&](std::uint32_t r) { return rank[r] <= best_lo; });
        const auto split_at = static_cast<std::size_t>(mid - rows.begin());

        const auto left = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
        node.feature = static_cast<std::int32_t>(best_feature);
        node.threshold = split_threshold(m.distinct[best_feature][best_lo], m.distinct[best_feature][best_hi]);
        node.left = left;
        node.right = left + 1;
        stack.push_back({left + 1, split_at, p.end, p.depth + 1});
        stack.push_back({left, p.begin, split_at, p.depth + 1});
    }
    return tree;
}

}  // namespace detail
}  // namespace harnode::learn
