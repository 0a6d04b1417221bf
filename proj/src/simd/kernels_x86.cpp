#include "kernels_impl.hpp"

#if HIPAA_SIMD_X86

#include <immintrin.h>

#include <cstdint>
#include <cstring>

#define HIPAA_TARGET_AVX2 __attribute__((target("avx2")))

namespace hipaa::simd {

namespace {

inline unsigned ctz32(std::uint32_t v) { return static_cast<unsigned>(__builtin_ctz(v)); }

// Rejects the degenerate cases shared by all find_literal variants. Returns
// true when `result` holds the final answer.
inline bool find_literal_trivial(std::string_view haystack, std::string_view needle,
                                 std::size_t from, std::size_t& result) {
    if (from > haystack.size() || haystack.size() - from < needle.size()) {
        result = npos;
        return true;
    }
    if (needle.empty()) {
        result = from;
        return true;
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// SSE2 (x86-64 baseline)
// ---------------------------------------------------------------------------

namespace sse2 {

std::size_t find_byte(std::string_view text, char value) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m128i needle = _mm_set1_epi8(value);
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const __m128i block = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm_movemask_epi8(_mm_cmpeq_epi8(block, needle)));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    for (; i < size; ++i) {
        if (s[i] == value) {
            return i;
        }
    }
    return npos;
}

std::size_t find_literal(std::string_view haystack, std::string_view needle, std::size_t from) {
    std::size_t result = npos;
    if (find_literal_trivial(haystack, needle, from, result)) {
        return result;
    }
    const std::size_t n = needle.size();
    if (n == 1) {
        const std::size_t hit = find_byte(haystack.substr(from), needle[0]);
        return hit == npos ? npos : from + hit;
    }
    const char* s = haystack.data();
    const std::size_t end = haystack.size() - n + 1;
    const __m128i first = _mm_set1_epi8(needle.front());
    const __m128i last = _mm_set1_epi8(needle.back());
    std::size_t i = from;
    for (; i + 16 <= end; i += 16) {
        const __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        const __m128i b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i + n - 1));
        auto mask = static_cast<std::uint32_t>(
            _mm_movemask_epi8(_mm_and_si128(_mm_cmpeq_epi8(a, first), _mm_cmpeq_epi8(b, last))));
        while (mask != 0) {
            const std::size_t at = i + ctz32(mask);
            if (std::memcmp(s + at + 1, needle.data() + 1, n - 2) == 0) {
                return at;
            }
            mask &= mask - 1;
        }
    }
    return scalar::find_literal(haystack, needle, i);
}

std::size_t find_line_break(std::string_view text, std::size_t from) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m128i lf = _mm_set1_epi8('\n');
    const __m128i cr = _mm_set1_epi8('\r');
    std::size_t i = from;
    for (; i + 16 <= size; i += 16) {
        const __m128i block = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm_movemask_epi8(
            _mm_or_si128(_mm_cmpeq_epi8(block, lf), _mm_cmpeq_epi8(block, cr))));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    return scalar::find_line_break(text, i);
}

std::size_t ascii_prefix(std::string_view text) {
    const char* s = text.data();
    const std::size_t size = text.size();
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const __m128i block = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm_movemask_epi8(block));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    return i + scalar::ascii_prefix(text.substr(i));
}

std::size_t count_code_points(std::string_view text) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m128i threshold = _mm_set1_epi8(static_cast<char>(0xBF));
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const __m128i block = _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        // Continuation bytes 0x80..0xBF are exactly the signed values <= -65.
        const auto mask = static_cast<std::uint32_t>(_mm_movemask_epi8(_mm_cmpgt_epi8(block, threshold)));
        count += static_cast<std::size_t>(__builtin_popcount(mask));
    }
    return count + scalar::count_code_points(text.substr(i));
}

} // namespace sse2

// ---------------------------------------------------------------------------
// AVX2
// ---------------------------------------------------------------------------

namespace avx2 {

HIPAA_TARGET_AVX2 std::size_t find_byte(std::string_view text, char value) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m256i needle = _mm256_set1_epi8(value);
    std::size_t i = 0;
    for (; i + 32 <= size; i += 32) {
        const __m256i block = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(block, needle)));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    const std::size_t tail = sse2::find_byte(text.substr(i), value);
    return tail == npos ? npos : i + tail;
}

HIPAA_TARGET_AVX2 std::size_t find_literal(std::string_view haystack, std::string_view needle,
                                           std::size_t from) {
    std::size_t result = npos;
    if (find_literal_trivial(haystack, needle, from, result)) {
        return result;
    }
    const std::size_t n = needle.size();
    if (n == 1) {
        const std::size_t hit = find_byte(haystack.substr(from), needle[0]);
        return hit == npos ? npos : from + hit;
    }
    const char* s = haystack.data();
    const std::size_t end = haystack.size() - n + 1;
    const __m256i first = _mm256_set1_epi8(needle.front());
    const __m256i last = _mm256_set1_epi8(needle.back());
    std::size_t i = from;
    for (; i + 32 <= end; i += 32) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i + n - 1));
        auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(
            _mm256_and_si256(_mm256_cmpeq_epi8(a, first), _mm256_cmpeq_epi8(b, last))));
        while (mask != 0) {
            const std::size_t at = i + ctz32(mask);
            if (std::memcmp(s + at + 1, needle.data() + 1, n - 2) == 0) {
                return at;
            }
            mask &= mask - 1;
        }
    }
    return sse2::find_literal(haystack, needle, i);
}

HIPAA_TARGET_AVX2 std::size_t find_line_break(std::string_view text, std::size_t from) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m256i lf = _mm256_set1_epi8('\n');
    const __m256i cr = _mm256_set1_epi8('\r');
    std::size_t i = from;
    for (; i + 32 <= size; i += 32) {
        const __m256i block = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(
            _mm256_or_si256(_mm256_cmpeq_epi8(block, lf), _mm256_cmpeq_epi8(block, cr))));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    return sse2::find_line_break(text, i);
}

HIPAA_TARGET_AVX2 std::size_t ascii_prefix(std::string_view text) {
    const char* s = text.data();
    const std::size_t size = text.size();
    std::size_t i = 0;
    for (; i + 32 <= size; i += 32) {
        const __m256i block = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
        const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(block));
        if (mask != 0) {
            return i + ctz32(mask);
        }
    }
    return i + sse2::ascii_prefix(text.substr(i));
}

HIPAA_TARGET_AVX2 std::size_t count_code_points(std::string_view text) {
    const char* s = text.data();
    const std::size_t size = text.size();
    const __m256i threshold = _mm256_set1_epi8(static_cast<char>(0xBF));
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 32 <= size; i += 32) {
        const __m256i block = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(s + i));
        const auto mask =
            static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpgt_epi8(block, threshold)));
        count += static_cast<std::size_t>(__builtin_popcount(mask));
    }
    return count + sse2::count_code_points(text.substr(i));
}

} // namespace avx2

} // namespace hipaa::simd

#endif // HIPAA_SIMD_X86
