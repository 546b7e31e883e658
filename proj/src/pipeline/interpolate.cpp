#include <algorithm>

#include "harnode/error.hpp"
#include "harnode/pipeline.hpp"
#include "harnode/simd/kernels.hpp"

namespace harnode::pipeline {

Grid common_grid(std::span<const NodeRecording> nodes, std::int64_t interval_us) {
    if (nodes.empty()) throw InsufficientData("no nodes");
    if (interval_us <= 0) throw InvalidArgument("grid interval must be positive");
    std::int64_t start = std::numeric_limits<std::int64_t>::min();
    std::int64_t end = std::numeric_limits<std::int64_t>::max();
    for (const auto& n : nodes) {
        if (n.rows.size() < 2) throw InsufficientData("node " + std::to_string(n.node_id) + " has fewer than 2 rows");
        start = std::max(start, n.rows.front().t_server_us);
        end = std::min(end, n.rows.back().t_server_us);
    }
    if (end < start) throw InsufficientData("node recordings do not overlap");
    return {start, interval_us, static_cast<std::size_t>((end - start) / interval_us) + 1};
}

std::vector<double> interpolate_channel(std::span<const std::int64_t> t_us, std::span<const double> values,
                                        const Grid& grid) {
    if (t_us.size() < 2 || t_us.size() != values.size()) throw InsufficientData("need at least 2 samples");
    if (grid.count == 0) return {};
    if (grid.time_at(0) < t_us.front() || grid.time_at(grid.count - 1) > t_us.back()) {
        throw InvalidArgument("grid extends beyond the recording");
    }
    std::vector<double> lo(grid.count), hi(grid.count), frac(grid.count), out(grid.count);
    std::size_t j = 0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const auto t = grid.time_at(i);
        while (j + 1 < t_us.size() && t_us[j + 1] <= t) ++j;
        if (t_us[j] == t || j + 1 == t_us.size()) {
            lo[i] = hi[i] = values[j];
            frac[i] = 0;
        } else {
            lo[i] = values[j];
            hi[i] = values[j + 1];
            frac[i] = static_cast<double>(t - t_us[j]) / static_cast<double>(t_us[j + 1] - t_us[j]);
        }
    }
    simd::active_kernels().lerp(lo.data(), hi.data(), frac.data(), grid.count, out.data());
    return out;
}

AlignedStream interpolate_to_grid(const NodeRecording& node, const Grid& grid) {
    if (node.rows.size() < 2) throw InsufficientData("node " + std::to_string(node.node_id) + " has fewer than 2 rows");
    std::vector<std::int64_t> t(node.rows.size());
    std::vector<double> v(node.rows.size());
    for (std::size_t i = 0; i < node.rows.size(); ++i) t[i] = node.rows[i].t_server_us;
    if (!std::is_sorted(t.begin(), t.end())) throw InvalidArgument("rows are not time-sorted");

    AlignedStream out;
    out.node_id = node.node_id;
    out.position = node.position;
    out.grid_start_us = grid.start_us;
    out.grid_interval_us = grid.interval_us;
    for (std::size_t axis = 0; axis < kAxes; ++axis) {
        for (std::size_t i = 0; i < node.rows.size(); ++i) v[i] = node.rows[i].values[axis];
        out.channels[axis] = interpolate_channel(t, v, grid);
    }
    return out;
}

}  // namespace harnode::pipeline
