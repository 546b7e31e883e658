#include <algorithm>

#include "harnode/error.hpp"
#include "harnode/pipeline.hpp"

namespace harnode::pipeline {

std::size_t window_count(std::size_t n, std::size_t length, std::size_t stride) {
    if (length == 0 || stride == 0) throw InvalidArgument("window length and stride must be positive");
    return n < length ? 0 : (n - length) / stride + 1;
}

std::vector<std::optional<Activity>> label_grid(const Grid& grid, std::span<const sim::LabelInterval> intervals) {
    std::vector<sim::LabelInterval> sorted(intervals.begin(), intervals.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start_us < b.start_us; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start_us < sorted[i - 1].end_us) throw InvalidArgument("label intervals overlap");
    }
    std::vector<std::optional<Activity>> out(grid.count);
    std::size_t k = 0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const auto t = grid.time_at(i);
        while (k < sorted.size() && sorted[k].end_us <= t) ++k;
        if (k < sorted.size() && sorted[k].start_us <= t) out[i] = sorted[k].label;
    }
    return out;
}

WindowLabels label_windows(std::span<const std::optional<Activity>> point_labels, std::size_t length,
                           std::size_t stride) {
    WindowLabels out;
    const auto count = window_count(point_labels.size(), length, stride);
    for (std::size_t w = 0; w < count; ++w) {
        const auto start = w * stride;
        std::size_t stairs = 0;
        bool complete = true;
        for (std::size_t i = start; i < start + length; ++i) {
            if (!point_labels[i]) {
                complete = false;
                break;
            }
            if (*point_labels[i] == Activity::TowardsStairs) ++stairs;
        }
        if (!complete) {
            ++out.dropped;
            continue;
        }
        out.starts.push_back(start);
        out.labels.push_back(2 * stairs >= length ? Activity::TowardsStairs : Activity::Walking);
    }
    return out;
}

}  // namespace harnode::pipeline
