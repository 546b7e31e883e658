#include <cstdlib>
#include <string>

#include "harnode/error.hpp"
#include "harnode/simd/kernels.hpp"

namespace harnode::simd {

#if !defined(HARNODE_HAVE_AVX2)
const KernelTable* detail::avx2_table() { return nullptr; }
#endif
#if !defined(HARNODE_HAVE_NEON)
const KernelTable* detail::neon_table() { return nullptr; }
#endif

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(HARNODE_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon:
            return detail::neon_table() != nullptr;
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_available(isa)) throw InvalidArgument("ISA " + std::string(isa_name(isa)) + " not available");
    switch (isa) {
        case Isa::Avx2: return *detail::avx2_table();
        case Isa::Neon: return *detail::neon_table();
        case Isa::Scalar: break;
    }
    return scalar_kernels();
}

namespace {

const KernelTable& choose() {
    if (const char* env = std::getenv("HARNODE_SIMD")) {
        const std::string want(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
            if (want == isa_name(isa) && isa_available(isa)) return kernels_for(isa);
        }
    }
    if (isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
    if (isa_available(Isa::Neon)) return kernels_for(Isa::Neon);
    return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
    static const KernelTable& table = choose();
    return table;
}

}  // namespace harnode::simd
