#include <algorithm>

#include "harnode/simd/kernels.hpp"

namespace harnode::simd {
namespace {

WindowMoments window_moments_scalar(const double* x, std::size_t n) {
    const std::size_t body = n - n % 4;

    double acc[4] = {0, 0, 0, 0};
    double lo = x[0];
    double hi = x[0];
    for (std::size_t i = 0; i < body; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) acc[l] += x[i + l];
    }
    double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (std::size_t i = body; i < n; ++i) sum += x[i];
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }

    const double count = static_cast<double>(n);
    const double mean = sum / count;

    double s2[4] = {0, 0, 0, 0};
    double s3[4] = {0, 0, 0, 0};
    double s4[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < body; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double d = x[i + l] - mean;
            const double d2 = d * d;
            s2[l] += d2;
            s3[l] += d2 * d;
            s4[l] += d2 * d2;
        }
    }
    double m2 = (s2[0] + s2[1]) + (s2[2] + s2[3]);
    double m3 = (s3[0] + s3[1]) + (s3[2] + s3[3]);
    double m4 = (s4[0] + s4[1]) + (s4[2] + s4[3]);
    for (std::size_t i = body; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    return {mean, lo, hi, m2 / count, m3 / count, m4 / count};
}

void split_impurity_scalar(const double* left0, const double* left1, std::size_t n, double total0, double total1,
                           double* out) {
    const double total = total0 + total1;
    for (std::size_t i = 0; i < n; ++i) {
        const double l0 = left0[i];
        const double l1 = left1[i];
        const double r0 = total0 - l0;
        const double r1 = total1 - l1;
        const double nl = l0 + l1;
        const double nr = r0 + r1;
        const double wl = nl - (l0 * l0 + l1 * l1) / nl;
        const double wr = nr - (r0 * r0 + r1 * r1) / nr;
        out[i] = (wl + wr) / total;
    }
}

void lerp_scalar(const double* lo, const double* hi, const double* frac, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * frac[i];
}

constexpr KernelTable kScalar{Isa::Scalar, window_moments_scalar, split_impurity_scalar, lerp_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace harnode::simd
