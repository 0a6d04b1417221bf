#pragma once

// Byte-level text kernels used on the scanning hot path.
//
// Every kernel has a portable scalar reference implementation plus vector
// variants (SSE2 / AVX2 on x86-64, NEON on AArch64). The variant used by the
// library is chosen once at startup from the running CPU; tests call each
// variant directly and compare it against the scalar reference.

#include <cstddef>
#include <string_view>
#include <vector>

namespace hipaa::simd {

inline constexpr std::size_t npos = std::string_view::npos;

enum class Isa { scalar, sse2, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;

    // Position of the first occurrence of `needle` in `haystack` at or after
    // `from`, or npos. An empty needle matches at `from` when from <= size.
    std::size_t (*find_literal)(std::string_view haystack, std::string_view needle,
                                std::size_t from);

    // Position of the first '\n' or '\r' at or after `from`, or npos.
    std::size_t (*find_line_break)(std::string_view text, std::size_t from);

    // Position of the first byte equal to `value`, or npos.
    std::size_t (*find_byte)(std::string_view text, char value);

    // Length of the longest prefix made only of 7-bit ASCII bytes.
    std::size_t (*ascii_prefix)(std::string_view text);

    // Number of UTF-8 code points, counted as bytes that are not 10xxxxxx.
    std::size_t (*count_code_points)(std::string_view text);
};

const KernelTable& scalar_kernels();

// Variants compiled into this binary whose instructions the CPU supports,
// scalar first.
std::vector<Isa> supported_isas();

// Table for a specific variant; throws std::invalid_argument when the variant
// is not supported on this machine.
const KernelTable& kernels_for(Isa isa);

// Table used by the library. Picks the widest supported variant unless the
// HIPAACHECKER_SIMD environment variable names another one.
const KernelTable& active_kernels();

} // namespace hipaa::simd
