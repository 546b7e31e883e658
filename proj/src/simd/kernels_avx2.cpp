// Compiled with -mavx2. Only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>

#include "harnode/simd/kernels.hpp"

namespace harnode::simd {
namespace {

inline double combine(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

WindowMoments window_moments_avx2(const double* x, std::size_t n) {
    const std::size_t body = n - n % 4;

    __m256d acc = _mm256_setzero_pd();
    __m256d vmin = _mm256_set1_pd(x[0]);
    __m256d vmax = vmin;
    for (std::size_t i = 0; i < body; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, v);
        vmin = _mm256_min_pd(vmin, v);
        vmax = _mm256_max_pd(vmax, v);
    }
    double sum = combine(acc);
    alignas(32) double mins[4];
    alignas(32) double maxs[4];
    _mm256_store_pd(mins, vmin);
    _mm256_store_pd(maxs, vmax);
    double lo = std::min(std::min(mins[0], mins[1]), std::min(mins[2], mins[3]));
    double hi = std::max(std::max(maxs[0], maxs[1]), std::max(maxs[2], maxs[3]));
    for (std::size_t i = body; i < n; ++i) {
        sum += x[i];
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }

    const double count = static_cast<double>(n);
    const double mean = sum / count;
    const __m256d vmean = _mm256_set1_pd(mean);

    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    __m256d s4 = _mm256_setzero_pd();
    for (std::size_t i = 0; i < body; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmean);
        const __m256d d2 = _mm256_mul_pd(d, d);
        s2 = _mm256_add_pd(s2, d2);
        s3 = _mm256_add_pd(s3, _mm256_mul_pd(d2, d));
        s4 = _mm256_add_pd(s4, _mm256_mul_pd(d2, d2));
    }
    double m2 = combine(s2);
    double m3 = combine(s3);
    double m4 = combine(s4);
    for (std::size_t i = body; i < n; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    return {mean, lo, hi, m2 / count, m3 / count, m4 / count};
}

void split_impurity_avx2(const double* left0, const double* left1, std::size_t n, double total0, double total1,
                         double* out) {
    const double total = total0 + total1;
    const __m256d t0 = _mm256_set1_pd(total0);
    const __m256d t1 = _mm256_set1_pd(total1);
    const __m256d tt = _mm256_set1_pd(total);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l0 = _mm256_loadu_pd(left0 + i);
        const __m256d l1 = _mm256_loadu_pd(left1 + i);
        const __m256d r0 = _mm256_sub_pd(t0, l0);
        const __m256d r1 = _mm256_sub_pd(t1, l1);
        const __m256d nl = _mm256_add_pd(l0, l1);
        const __m256d nr = _mm256_add_pd(r0, r1);
        const __m256d ql = _mm256_add_pd(_mm256_mul_pd(l0, l0), _mm256_mul_pd(l1, l1));
        const __m256d qr = _mm256_add_pd(_mm256_mul_pd(r0, r0), _mm256_mul_pd(r1, r1));
        const __m256d wl = _mm256_sub_pd(nl, _mm256_div_pd(ql, nl));
        const __m256d wr = _mm256_sub_pd(nr, _mm256_div_pd(qr, nr));
        _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_add_pd(wl, wr), tt));
    }
    for (; i < n; ++i) {
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

void lerp_avx2(const double* lo, const double* hi, const double* frac, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(lo + i);
        const __m256d b = _mm256_loadu_pd(hi + i);
        const __m256d f = _mm256_loadu_pd(frac + i);
        _mm256_storeu_pd(out + i, _mm256_add_pd(a, _mm256_mul_pd(_mm256_sub_pd(b, a), f)));
    }
    for (; i < n; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * frac[i];
}

constexpr KernelTable kAvx2{Isa::Avx2, window_moments_avx2, split_impurity_avx2, lerp_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace harnode::simd
