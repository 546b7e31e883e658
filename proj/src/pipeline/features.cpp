#include <algorithm>
#include <cmath>

#include "harnode/error.hpp"
#include "harnode/pipeline.hpp"
#include "harnode/simd/kernels.hpp"

namespace harnode::pipeline {

namespace {

double median_of(std::span<const double> x, double* scratch) {
    const auto n = x.size();
    std::copy(x.begin(), x.end(), scratch);
    const auto mid = n / 2;
    std::nth_element(scratch, scratch + mid, scratch + n);
    if (n % 2 == 1) return scratch[mid];
    const double upper = scratch[mid];
    const double lower = *std::max_element(scratch, scratch + mid);
    return (lower + upper) / 2;
}

void statistics_into(std::span<const double> x, double* scratch, double* out) {
    const auto m = simd::active_kernels().window_moments(x.data(), x.size());
    const double n = static_cast<double>(x.size());
    out[0] = m.mean;
    out[1] = std::sqrt(m.m2 * n / (n - 1));
    out[2] = m.min;
    out[3] = m.max;
    out[4] = m.max - m.min;
    out[5] = median_of(x, scratch);
    if (m.m2 == 0) {
        out[6] = 0;
        out[7] = 0;
    } else {
        out[6] = m.m3 / std::pow(m.m2, 1.5);
        out[7] = m.m4 / (m.m2 * m.m2) - 3;
    }
}

}  // namespace

std::array<double, kStatsPerAxis> window_statistics(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("a window needs at least 2 values");
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
        throw InvalidArgument("non-finite value in window");
    }
    std::vector<double> scratch(x.size());
    std::array<double, kStatsPerAxis> out{};
    statistics_into(x, scratch.data(), out.data());
    return out;
}

void extract_features(const AlignedStream& stream, std::size_t start, std::size_t length, double* out) {
    if (length < 2) throw InvalidArgument("a window needs at least 2 values");
    if (start + length > stream.length()) throw InvalidArgument("window beyond stream end");
    double scratch[64];
    std::vector<double> heap;
    double* buffer = scratch;
    if (length > std::size(scratch)) {
        heap.resize(length);
        buffer = heap.data();
    }
    for (std::size_t axis = 0; axis < kAxes; ++axis) {
        const std::span<const double> x(stream.channels[axis].data() + start, length);
        for (double v : x) {
            if (!std::isfinite(v)) throw InvalidArgument("non-finite value in window");
        }
        statistics_into(x, buffer, out + axis * kStatsPerAxis);
    }
}

}  // namespace harnode::pipeline
