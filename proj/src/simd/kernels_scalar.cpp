#include "kernels_impl.hpp"

#include <cstring>

namespace hipaa::simd::scalar {

std::size_t find_literal(std::string_view haystack, std::string_view needle, std::size_t from) {
    const std::size_t size = haystack.size();
    const std::size_t n = needle.size();
    if (from > size || size - from < n) {
        return npos;
    }
    if (n == 0) {
        return from;
    }
    const char* s = haystack.data();
    for (std::size_t i = from; i + n <= size; ++i) {
        if (s[i] == needle[0] && std::memcmp(s + i, needle.data(), n) == 0) {
            return i;
        }
    }
    return npos;
}

std::size_t find_line_break(std::string_view text, std::size_t from) {
    for (std::size_t i = from; i < text.size(); ++i) {
        if (text[i] == '\n' || text[i] == '\r') {
            return i;
        }
    }
    return npos;
}

std::size_t find_byte(std::string_view text, char value) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == value) {
            return i;
        }
    }
    return npos;
}

std::size_t ascii_prefix(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && static_cast<unsigned char>(text[i]) < 0x80) {
        ++i;
    }
    return i;
}

std::size_t count_code_points(std::string_view text) {
    std::size_t count = 0;
    for (char c : text) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++count;
        }
    }
    return count;
}

} // namespace hipaa::simd::scalar
