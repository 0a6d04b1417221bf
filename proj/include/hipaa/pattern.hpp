#pragma once

// Single-line pattern language and the multi-pattern line matcher.
//
// A pattern is literal text in which exactly two tokens are special:
//   `.*`   any run of characters (possibly empty) within the line
//   `\s*`  any run of spaces and horizontal tabs (possibly empty)
// Everything else, including `.`, `(`, `"` and `$`, is matched literally and
// case-sensitively. Matching never crosses a line break.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipaa/catalog.hpp"
#include "hipaa/simd/kernels.hpp"

namespace hipaa {

// Coordinates of a pattern inside its catalog; ordering is catalog order.
struct PatternKey {
    std::uint32_t rule = 0;
    std::uint32_t sub_rule = 0;
    std::uint32_t pattern = 0;

    auto operator<=>(const PatternKey&) const = default;
};

enum class GapKind { any_chars, any_whitespace };

// 1-based, inclusive, in code points.
struct MatchSpan {
    std::size_t start_column = 0;
    std::size_t end_column = 0;

    bool operator==(const MatchSpan&) const = default;
};

// Half-open byte range within a line.
struct ByteRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const ByteRange&) const = default;
};

class CompiledPattern {
public:
    const std::vector<std::string>& segments() const noexcept { return segments_; }
    const std::vector<GapKind>& gaps() const noexcept { return gaps_; }
    const std::string& source_text() const noexcept { return source_text_; }
    const PatternKey& key() const noexcept { return key_; }

    // Leftmost match whose start is at or after `from`; among matches with
    // that start, the one ending earliest.
    std::optional<ByteRange> find(std::string_view line, std::size_t from = 0,
                                  const simd::KernelTable& kernels = simd::active_kernels()) const;

    // Number of non-overlapping matches found left to right.
    std::size_t count_occurrences(std::string_view line,
                                  const simd::KernelTable& kernels = simd::active_kernels()) const;

    bool operator==(const CompiledPattern&) const = default;

private:
    friend CompiledPattern compile_pattern(std::string_view raw, PatternKey key);

    std::optional<std::size_t> match_tail(std::string_view line, std::size_t segment,
                                          std::size_t at, const simd::KernelTable& kernels) const;

    std::vector<std::string> segments_;
    std::vector<GapKind> gaps_;
    std::string source_text_;
    PatternKey key_;
    // True when every gap is any_chars; then only the first occurrence of
    // each segment needs to be tried.
    bool greedy_safe_ = true;
};

// Throws PatternError. Trailing whitespace is trimmed before compiling.
CompiledPattern compile_pattern(std::string_view raw, PatternKey key = {});

// Converts a byte range of `line` to 1-based code point columns.
MatchSpan to_span(std::string_view line, ByteRange range,
                  const simd::KernelTable& kernels = simd::active_kernels());

std::optional<MatchSpan> match_line(const CompiledPattern& pattern, std::string_view line);

struct LineHit {
    PatternKey key;
    // Index into MultiMatcher::patterns().
    std::size_t ordinal = 0;
    MatchSpan span;
    ByteRange bytes;
};

// All catalog patterns behind an Aho-Corasick automaton over their first
// literal segments. A line is walked once to find which first segments occur
// (and where they first occur); only those patterns are then verified.
class MultiMatcher {
public:
    explicit MultiMatcher(std::vector<CompiledPattern> patterns,
                          const simd::KernelTable& kernels = simd::active_kernels());

    const std::vector<CompiledPattern>& patterns() const noexcept { return patterns_; }
    const simd::KernelTable& kernels() const noexcept { return *kernels_; }

    // One hit per matching pattern, in catalog order.
    std::vector<LineHit> scan_line(std::string_view line) const;

private:
    struct State {
        std::int32_t next[256];
        std::int32_t fail = 0;
        // Distinct first segments ending at this state, including ones
        // reached through failure links.
        std::vector<std::uint32_t> outputs;
    };

    void build_automaton();

    std::vector<CompiledPattern> patterns_;
    const simd::KernelTable* kernels_;
    std::vector<std::string> heads_;
    // head id -> ordinals of patterns starting with it
    std::vector<std::vector<std::size_t>> head_patterns_;
    std::vector<State> states_;
};

// Compiles every pattern of `catalog` in catalog order. A compile failure is
// rethrown as PatternError naming the rule, sub-rule and pattern index.
MultiMatcher build_matcher(const Catalog& catalog,
                           const simd::KernelTable& kernels = simd::active_kernels());

} // namespace hipaa
