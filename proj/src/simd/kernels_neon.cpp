#include "kernels_impl.hpp"

#if HIPAA_SIMD_NEON

#include <arm_neon.h>

#include <cstdint>
#include <cstring>

namespace hipaa::simd::neon {

namespace {

// Narrows a byte-wise comparison result to 4 bits per lane.
inline std::uint64_t nibble_mask(uint8x16_t cmp) {
    const uint8x8_t narrowed = vshrn_n_u16(vreinterpretq_u16_u8(cmp), 4);
    return vget_lane_u64(vreinterpret_u64_u8(narrowed), 0);
}

inline std::size_t first_lane(std::uint64_t mask) {
    return static_cast<std::size_t>(__builtin_ctzll(mask)) / 4;
}

} // namespace

std::size_t find_byte(std::string_view text, char value) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::size_t size = text.size();
    const uint8x16_t needle = vdupq_n_u8(static_cast<std::uint8_t>(value));
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const std::uint64_t mask = nibble_mask(vceqq_u8(vld1q_u8(s + i), needle));
        if (mask != 0) {
            return i + first_lane(mask);
        }
    }
    const std::size_t tail = scalar::find_byte(text.substr(i), value);
    return tail == npos ? npos : i + tail;
}

std::size_t find_literal(std::string_view haystack, std::string_view needle, std::size_t from) {
    const std::size_t n = needle.size();
    if (from > haystack.size() || haystack.size() - from < n) {
        return npos;
    }
    if (n == 0) {
        return from;
    }
    if (n == 1) {
        const std::size_t hit = find_byte(haystack.substr(from), needle[0]);
        return hit == npos ? npos : from + hit;
    }
    const auto* s = reinterpret_cast<const std::uint8_t*>(haystack.data());
    const std::size_t end = haystack.size() - n + 1;
    const uint8x16_t first = vdupq_n_u8(static_cast<std::uint8_t>(needle.front()));
    const uint8x16_t last = vdupq_n_u8(static_cast<std::uint8_t>(needle.back()));
    std::size_t i = from;
    for (; i + 16 <= end; i += 16) {
        const uint8x16_t hits =
            vandq_u8(vceqq_u8(vld1q_u8(s + i), first), vceqq_u8(vld1q_u8(s + i + n - 1), last));
        std::uint64_t mask = nibble_mask(hits) & 0x8888888888888888ULL;
        while (mask != 0) {
            const std::size_t at = i + first_lane(mask);
            if (std::memcmp(s + at + 1, needle.data() + 1, n - 2) == 0) {
                return at;
            }
            mask &= mask - 1;
        }
    }
    return scalar::find_literal(haystack, needle, i);
}

std::size_t find_line_break(std::string_view text, std::size_t from) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::size_t size = text.size();
    const uint8x16_t lf = vdupq_n_u8('\n');
    const uint8x16_t cr = vdupq_n_u8('\r');
    std::size_t i = from;
    for (; i + 16 <= size; i += 16) {
        const uint8x16_t block = vld1q_u8(s + i);
        const std::uint64_t mask = nibble_mask(vorrq_u8(vceqq_u8(block, lf), vceqq_u8(block, cr)));
        if (mask != 0) {
            return i + first_lane(mask);
        }
    }
    return scalar::find_line_break(text, i);
}

std::size_t ascii_prefix(std::string_view text) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::size_t size = text.size();
    const uint8x16_t high = vdupq_n_u8(0x80);
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const std::uint64_t mask = nibble_mask(vtstq_u8(vld1q_u8(s + i), high));
        if (mask != 0) {
            return i + first_lane(mask);
        }
    }
    return i + scalar::ascii_prefix(text.substr(i));
}

std::size_t count_code_points(std::string_view text) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::size_t size = text.size();
    const uint8x16_t top_bits = vdupq_n_u8(0xC0);
    const uint8x16_t continuation = vdupq_n_u8(0x80);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 16 <= size; i += 16) {
        const uint8x16_t is_cont = vceqq_u8(vandq_u8(vld1q_u8(s + i), top_bits), continuation);
        // Each lane is 0xFF or 0x00; shift to 1/0 and sum.
        count += 16 - vaddvq_u8(vshrq_n_u8(is_cont, 7));
    }
    return count + scalar::count_code_points(text.substr(i));
}

} // namespace hipaa::simd::neon

#endif // HIPAA_SIMD_NEON
