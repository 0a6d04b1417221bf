#include "kernels_impl.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hipaa::simd {

namespace {

#define HIPAA_KERNEL_TABLE(ns, isa_value)                                                         \
    KernelTable {                                                                                 \
        isa_value, &ns::find_literal, &ns::find_line_break, &ns::find_byte, &ns::ascii_prefix,    \
            &ns::count_code_points                                                                \
    }

const KernelTable kScalar = HIPAA_KERNEL_TABLE(scalar, Isa::scalar);
#if HIPAA_SIMD_X86
const KernelTable kSse2 = HIPAA_KERNEL_TABLE(sse2, Isa::sse2);
const KernelTable kAvx2 = HIPAA_KERNEL_TABLE(avx2, Isa::avx2);
#endif
#if HIPAA_SIMD_NEON
const KernelTable kNeon = HIPAA_KERNEL_TABLE(neon, Isa::neon);
#endif

#undef HIPAA_KERNEL_TABLE

bool cpu_supports(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return true;
#if HIPAA_SIMD_X86
    case Isa::sse2:
        return true;
    case Isa::avx2:
        return __builtin_cpu_supports("avx2");
#endif
#if HIPAA_SIMD_NEON
    case Isa::neon:
        return true;
#endif
    default:
        return false;
    }
}

const KernelTable& select_default() {
    if (const char* forced = std::getenv("HIPAACHECKER_SIMD"); forced != nullptr && *forced != '\0') {
        const std::string name(forced);
        for (Isa isa : supported_isas()) {
            if (isa_name(isa) == name) {
                return kernels_for(isa);
            }
        }
    }
    return kernels_for(supported_isas().back());
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return "scalar";
    case Isa::sse2:
        return "sse2";
    case Isa::avx2:
        return "avx2";
    case Isa::neon:
        return "neon";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() { return kScalar; }

std::vector<Isa> supported_isas() {
    std::vector<Isa> isas;
    for (Isa isa : {Isa::scalar, Isa::sse2, Isa::avx2, Isa::neon}) {
        if (cpu_supports(isa)) {
            isas.push_back(isa);
        }
    }
    return isas;
}

const KernelTable& kernels_for(Isa isa) {
    if (!cpu_supports(isa)) {
        throw std::invalid_argument("SIMD variant not supported here: " + std::string(isa_name(isa)));
    }
    switch (isa) {
#if HIPAA_SIMD_X86
    case Isa::sse2:
        return kSse2;
    case Isa::avx2:
        return kAvx2;
#endif
#if HIPAA_SIMD_NEON
    case Isa::neon:
        return kNeon;
#endif
    default:
        return kScalar;
    }
}

const KernelTable& active_kernels() {
    static const KernelTable& table = select_default();
    return table;
}

} // namespace hipaa::simd
