#pragma once

#include <random>

#include "harnode/learn.hpp"

namespace harnode::learn::detail {

/// Ties within this margin count as equal so the lower feature and
/// threshold win regardless of rounding in the impurity arithmetic.
inline constexpr double kImpurityTie = 1e-12;

/// Weighted child Gini for one boundary; the exact expression the kernels use.
inline double weighted_gini(double l0, double l1, double total0, double total1) {
    const double r0 = total0 - l0;
    const double r1 = total1 - l1;
    const double nl = l0 + l1;
    const double nr = r0 + r1;
    const double wl = nl - (l0 * l0 + l1 * l1) / nl;
    const double wr = nr - (r0 * r0 + r1 * r1) / nr;
    return (wl + wr) / (total0 + total1);
}

inline double node_gini(double c0, double c1) {
    const double n = c0 + c1;
    return (n - (c0 * c0 + c1 * c1) / n) / n;
}

/// Midpoint of a < b that still sends a left and b right.
inline double split_threshold(double a, double b) {
    double t = a / 2 + b / 2;
    if (t >= b || t < a) t = a;
    return t;
}

/// Dense per-column ranks of a training matrix, shared by every tree.
struct RankedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> rank;            // column-major: rank[c * rows + r]
    std::vector<std::vector<double>> distinct;  // per column, ascending
    unsigned key_bits = 1;                      // bits needed for rank << 1 | label
};

RankedMatrix rank_matrix(const MatrixView& x, const ColumnOrder& order);

struct GrowParams {
    std::size_t max_depth = 0;
    std::size_t min_samples_split = 2;
    std::size_t features_per_split = 1;
};

/// Grows one CART on the distinct training rows in `rows`, each counted
/// weight[row] times.
Tree grow_tree(const RankedMatrix& m, std::span<const int> y, std::vector<std::uint32_t> rows,
               std::span<const std::uint32_t> weight, const GrowParams& params, std::mt19937_64& rng);

}  // namespace harnode::learn::detail
