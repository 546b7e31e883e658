// AArch64 variant. Two float64x2 registers stand in for one 4-lane vector so
// the reduction order matches the scalar reference.
#include <arm_neon.h>

#include <algorithm>

#include "harnode/simd/kernels.hpp"

namespace harnode::simd {
namespace {

struct Quad {
    float64x2_t lo;
    float64x2_t hi;
};

inline Quad load4(const double* p) { return {vld1q_f64(p), vld1q_f64(p + 2)}; }

inline double combine(const Quad& q) {
    const double l0 = vgetq_lane_f64(q.lo, 0);
    const double l1 = vgetq_lane_f64(q.lo, 1);
    const double l2 = vgetq_lane_f64(q.hi, 0);
    const double l3 = vgetq_lane_f64(q.hi, 1);
    return (l0 + l1) + (l2 + l3);
}

WindowMoments window_moments_neon(const double* x, std::size_t n) {
    const std::size_t body = n - n % 4;
    Quad acc{vdupq_n_f64(0), vdupq_n_f64(0)};
    double lo = x[0];
    double hi = x[0];
    for (std::size_t i = 0; i < body; i += 4) {
        const Quad v = load4(x + i);
        acc.lo = vaddq_f64(acc.lo, v.lo);
        acc.hi = vaddq_f64(acc.hi, v.hi);
    }
    double sum = combine(acc);
    for (std::size_t i = body; i < n; ++i) sum += x[i];
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    const double count = static_cast<double>(n);
    const double mean = sum / count;
    const float64x2_t vm = vdupq_n_f64(mean);

    Quad s2{vdupq_n_f64(0), vdupq_n_f64(0)};
    Quad s3 = s2;
    Quad s4 = s2;
    for (std::size_t i = 0; i < body; i += 4) {
        const Quad v = load4(x + i);
        const float64x2_t dl = vsubq_f64(v.lo, vm);
        const float64x2_t dh = vsubq_f64(v.hi, vm);
        const float64x2_t dl2 = vmulq_f64(dl, dl);
        const float64x2_t dh2 = vmulq_f64(dh, dh);
        s2.lo = vaddq_f64(s2.lo, dl2);
        s2.hi = vaddq_f64(s2.hi, dh2);
        s3.lo = vaddq_f64(s3.lo, vmulq_f64(dl2, dl));
        s3.hi = vaddq_f64(s3.hi, vmulq_f64(dh2, dh));
        s4.lo = vaddq_f64(s4.lo, vmulq_f64(dl2, dl2));
        s4.hi = vaddq_f64(s4.hi, vmulq_f64(dh2, dh2));
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

void split_impurity_neon(const double* left0, const double* left1, std::size_t n, double total0, double total1,
                         double* out) {
    const double total = total0 + total1;
    const float64x2_t t0 = vdupq_n_f64(total0);
    const float64x2_t t1 = vdupq_n_f64(total1);
    const float64x2_t tt = vdupq_n_f64(total);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t l0 = vld1q_f64(left0 + i);
        const float64x2_t l1 = vld1q_f64(left1 + i);
        const float64x2_t r0 = vsubq_f64(t0, l0);
        const float64x2_t r1 = vsubq_f64(t1, l1);
        const float64x2_t nl = vaddq_f64(l0, l1);
        const float64x2_t nr = vaddq_f64(r0, r1);
        const float64x2_t ql = vaddq_f64(vmulq_f64(l0, l0), vmulq_f64(l1, l1));
        const float64x2_t qr = vaddq_f64(vmulq_f64(r0, r0), vmulq_f64(r1, r1));
        const float64x2_t wl = vsubq_f64(nl, vdivq_f64(ql, nl));
        const float64x2_t wr = vsubq_f64(nr, vdivq_f64(qr, nr));
        vst1q_f64(out + i, vdivq_f64(vaddq_f64(wl, wr), tt));
    }
    for (; i < n; ++i) {
        const double l0 = left0[i];
        const double l1 = left1[i];
        const double r0 = total0 - l0;
        const double r1 = total1 - l1;
        const double nl = l0 + l1;
        const double nr = r0 + r1;
        out[i] = ((nl - (l0 * l0 + l1 * l1) / nl) + (nr - (r0 * r0 + r1 * r1) / nr)) / total;
    }
}

void lerp_neon(const double* lo, const double* hi, const double* frac, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t a = vld1q_f64(lo + i);
        const float64x2_t b = vld1q_f64(hi + i);
        const float64x2_t f = vld1q_f64(frac + i);
        vst1q_f64(out + i, vaddq_f64(a, vmulq_f64(vsubq_f64(b, a), f)));
    }
    for (; i < n; ++i) out[i] = lo[i] + (hi[i] - lo[i]) * frac[i];
}

constexpr KernelTable kNeon{Isa::Neon, window_moments_neon, split_impurity_neon, lerp_neon};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace harnode::simd
