#pragma once

// Data-parallel inner loops used by the feature extractor, the resampler and
// the tree learner. Each kernel has a scalar reference and vector variants;
// one table is selected at runtime from what the CPU supports.
//
// The scalar reference accumulates reductions in four interleaved lanes and
// combines them as (l0 + l1) + (l2 + l3), the same order the vector variants
// use, so every variant is bit-identical to the reference.

#include <cstddef>
#include <string_view>

namespace harnode::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Central moments use divisor N.
struct WindowMoments {
    double mean = 0;
    double min = 0;
    double max = 0;
    double m2 = 0;
    double m3 = 0;
    double m4 = 0;
};

struct KernelTable {
    Isa isa;

    /// Requires n >= 1.
    WindowMoments (*window_moments)(const double* x, std::size_t n);

    /// Weighted child Gini at each candidate boundary i, where left0/left1
    /// are class counts left of the boundary and total0/total1 the node
    /// totals: out[i] = (nL*gini(L) + nR*gini(R)) / (nL + nR).
    void (*split_impurity)(const double* left0, const double* left1, std::size_t n, double total0,
                           double total1, double* out);

    /// out[i] = lo[i] + (hi[i] - lo[i]) * frac[i]
    void (*lerp)(const double* lo, const double* hi, const double* frac, std::size_t n, double* out);
};

const KernelTable& scalar_kernels();
bool isa_available(Isa isa);
/// Throws InvalidArgument if the ISA is not available on this machine/build.
const KernelTable& kernels_for(Isa isa);

/// Best available table. HARNODE_SIMD=scalar|avx2|neon in the environment
/// overrides the choice.
const KernelTable& active_kernels();

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace harnode::simd
