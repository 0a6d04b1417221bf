#pragma once

#include <cstdint>
#include <string>

namespace hipaa {

// An exact ratio shown as a percentage. A zero denominator reads as 0.
struct Percentage {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 0;

    double value() const {
        return denominator == 0 ? 0.0 : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
    }

    // One decimal place, halves rounded up, computed without floating point.
    std::string to_string() const {
        if (denominator == 0) {
            return "0.0";
        }
        const std::uint64_t tenths = (2000 * numerator + denominator) / (2 * denominator);
        return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
    }

    bool operator==(const Percentage&) const = default;
};

} // namespace hipaa
