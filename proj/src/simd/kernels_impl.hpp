#pragma once

// Per-ISA kernel entry points. Only the dispatcher and the tests' equivalence
// checks should need these directly.

#include "hipaa/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HIPAA_SIMD_X86 1
#else
#define HIPAA_SIMD_X86 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define HIPAA_SIMD_NEON 1
#else
#define HIPAA_SIMD_NEON 0
#endif

namespace hipaa::simd {

#define HIPAA_DECLARE_KERNELS                                                                   \
    std::size_t find_literal(std::string_view haystack, std::string_view needle,                \
                             std::size_t from);                                                 \
    std::size_t find_line_break(std::string_view text, std::size_t from);                       \
    std::size_t find_byte(std::string_view text, char value);                                   \
    std::size_t ascii_prefix(std::string_view text);                                            \
    std::size_t count_code_points(std::string_view text);

namespace scalar {
HIPAA_DECLARE_KERNELS
}
#if HIPAA_SIMD_X86
namespace sse2 {
HIPAA_DECLARE_KERNELS
}
namespace avx2 {
HIPAA_DECLARE_KERNELS
}
#endif
#if HIPAA_SIMD_NEON
namespace neon {
HIPAA_DECLARE_KERNELS
}
#endif

#undef HIPAA_DECLARE_KERNELS

} // namespace hipaa::simd
