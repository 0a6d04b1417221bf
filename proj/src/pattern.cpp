#include "hipaa/pattern.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "hipaa/errors.hpp"

namespace hipaa {

namespace {

constexpr std::string_view kAnyChars = ".*";
constexpr std::string_view kAnyWhitespace = "\\s*";

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string_view trim_trailing_whitespace(std::string_view text) {
    while (!text.empty() && (is_blank(text.back()) || text.back() == '\r' || text.back() == '\n')) {
        text.remove_suffix(1);
    }
    return text;
}

} // namespace

CompiledPattern compile_pattern(std::string_view raw, PatternKey key) {
    const std::string_view text = trim_trailing_whitespace(raw);
    if (text.empty()) {
        throw PatternError(PatternError::Kind::empty_pattern, "pattern is empty");
    }

    CompiledPattern compiled;
    compiled.source_text_ = std::string(raw);
    compiled.key_ = key;

    std::string literal;
    bool pending_gap = false;
    GapKind gap = GapKind::any_chars;
    std::size_t i = 0;
    while (i < text.size()) {
        std::optional<GapKind> token;
        std::size_t token_length = 0;
        if (text.substr(i, kAnyChars.size()) == kAnyChars) {
            token = GapKind::any_chars;
            token_length = kAnyChars.size();
        } else if (text.substr(i, kAnyWhitespace.size()) == kAnyWhitespace) {
            token = GapKind::any_whitespace;
            token_length = kAnyWhitespace.size();
        }
        if (!token) {
            literal.push_back(text[i]);
            ++i;
            continue;
        }
        if (compiled.segments_.empty() && literal.empty()) {
            throw PatternError(PatternError::Kind::leading_or_trailing_wildcard,
                               "pattern starts with a wildcard: " + std::string(text));
        }
        if (literal.empty()) {
            throw PatternError(PatternError::Kind::adjacent_wildcards,
                               "two wildcards without literal text between them: " + std::string(text));
        }
        if (pending_gap) {
            compiled.gaps_.push_back(gap);
        }
        compiled.segments_.push_back(std::move(literal));
        literal.clear();
        pending_gap = true;
        gap = *token;
        i += token_length;
    }
    if (literal.empty()) {
        throw PatternError(PatternError::Kind::leading_or_trailing_wildcard,
                           "pattern ends with a wildcard: " + std::string(text));
    }
    if (pending_gap) {
        compiled.gaps_.push_back(gap);
    }
    compiled.segments_.push_back(std::move(literal));

    compiled.greedy_safe_ = std::all_of(compiled.gaps_.begin(), compiled.gaps_.end(),
                                        [](GapKind g) { return g == GapKind::any_chars; });
    return compiled;
}

// Match segments[segment..] with the gap before `segment` starting at byte
// `at`. Returns the end of the last segment. Segment positions are tried
// earliest first, which yields the earliest possible end.
std::optional<std::size_t> CompiledPattern::match_tail(std::string_view line, std::size_t segment,
                                                       std::size_t at,
                                                       const simd::KernelTable& kernels) const {
    if (segment == segments_.size()) {
        return at;
    }
    const std::string& literal = segments_[segment];
    if (gaps_[segment - 1] == GapKind::any_chars) {
        for (std::size_t pos = kernels.find_literal(line, literal, at); pos != simd::npos;
             pos = kernels.find_literal(line, literal, pos + 1)) {
            if (auto end = match_tail(line, segment + 1, pos + literal.size(), kernels)) {
                return end;
            }
            if (greedy_safe_) {
                break;
            }
        }
        return std::nullopt;
    }
    std::size_t run_end = at;
    while (run_end < line.size() && is_blank(line[run_end])) {
        ++run_end;
    }
    for (std::size_t pos = at; pos <= run_end; ++pos) {
        if (line.compare(pos, literal.size(), literal) == 0 && pos + literal.size() <= line.size()) {
            if (auto end = match_tail(line, segment + 1, pos + literal.size(), kernels)) {
                return end;
            }
        }
    }
    return std::nullopt;
}

std::optional<ByteRange> CompiledPattern::find(std::string_view line, std::size_t from,
                                               const simd::KernelTable& kernels) const {
    const std::string& head = segments_.front();
    for (std::size_t pos = kernels.find_literal(line, head, from); pos != simd::npos;
         pos = kernels.find_literal(line, head, pos + 1)) {
        if (auto end = match_tail(line, 1, pos + head.size(), kernels)) {
            return ByteRange{pos, *end};
        }
        if (greedy_safe_) {
            break;
        }
    }
    return std::nullopt;
}

std::size_t CompiledPattern::count_occurrences(std::string_view line,
                                               const simd::KernelTable& kernels) const {
    std::size_t count = 0;
    std::size_t from = 0;
    while (auto range = find(line, from, kernels)) {
        ++count;
        from = range->end;
    }
    return count;
}

MatchSpan to_span(std::string_view line, ByteRange range, const simd::KernelTable& kernels) {
    const std::size_t start = kernels.count_code_points(line.substr(0, range.begin)) + 1;
    const std::size_t end =
        start + kernels.count_code_points(line.substr(range.begin, range.end - range.begin)) - 1;
    return MatchSpan{start, end};
}

std::optional<MatchSpan> match_line(const CompiledPattern& pattern, std::string_view line) {
    if (auto range = pattern.find(line)) {
        return to_span(line, *range);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// MultiMatcher
// ---------------------------------------------------------------------------

MultiMatcher::MultiMatcher(std::vector<CompiledPattern> patterns, const simd::KernelTable& kernels)
    : patterns_(std::move(patterns)), kernels_(&kernels) {
    std::map<std::string, std::uint32_t> head_ids;
    for (std::size_t ordinal = 0; ordinal < patterns_.size(); ++ordinal) {
        const std::string& head = patterns_[ordinal].segments().front();
        auto [it, inserted] = head_ids.emplace(head, static_cast<std::uint32_t>(heads_.size()));
        if (inserted) {
            heads_.push_back(head);
            head_patterns_.emplace_back();
        }
        head_patterns_[it->second].push_back(ordinal);
    }
    build_automaton();
}

void MultiMatcher::build_automaton() {
    states_.clear();
    states_.emplace_back();
    std::fill(std::begin(states_[0].next), std::end(states_[0].next), -1);

    for (std::uint32_t id = 0; id < heads_.size(); ++id) {
        std::int32_t state = 0;
        for (char c : heads_[id]) {
            const auto byte = static_cast<unsigned char>(c);
            if (states_[state].next[byte] < 0) {
                states_[state].next[byte] = static_cast<std::int32_t>(states_.size());
                states_.emplace_back();
                std::fill(std::begin(states_.back().next), std::end(states_.back().next), -1);
            }
            state = states_[state].next[byte];
        }
        states_[state].outputs.push_back(id);
    }

    // Breadth-first failure links, turning the trie into a full DFA.
    std::deque<std::int32_t> queue;
    for (auto& target : states_[0].next) {
        if (target < 0) {
            target = 0;
        } else {
            states_[target].fail = 0;
            queue.push_back(target);
        }
    }
    while (!queue.empty()) {
        const std::int32_t state = queue.front();
        queue.pop_front();
        const std::int32_t fail = states_[state].fail;
        auto& outputs = states_[state].outputs;
        const auto& inherited = states_[fail].outputs;
        outputs.insert(outputs.end(), inherited.begin(), inherited.end());
        for (int byte = 0; byte < 256; ++byte) {
            std::int32_t& target = states_[state].next[byte];
            if (target < 0) {
                target = states_[fail].next[byte];
            } else {
                states_[target].fail = states_[fail].next[byte];
                queue.push_back(target);
            }
        }
    }
}

std::vector<LineHit> MultiMatcher::scan_line(std::string_view line) const {
    std::vector<LineHit> hits;
    if (heads_.empty()) {
        return hits;
    }

    // First start offset of each head in the line.
    std::vector<std::size_t> first_seen(heads_.size(), simd::npos);
    std::size_t unseen = heads_.size();
    std::int32_t state = 0;
    for (std::size_t i = 0; i < line.size() && unseen > 0; ++i) {
        state = states_[state].next[static_cast<unsigned char>(line[i])];
        for (std::uint32_t id : states_[state].outputs) {
            if (first_seen[id] == simd::npos) {
                first_seen[id] = i + 1 - heads_[id].size();
                --unseen;
            }
        }
    }

    for (std::uint32_t id = 0; id < heads_.size(); ++id) {
        if (first_seen[id] == simd::npos) {
            continue;
        }
        for (std::size_t ordinal : head_patterns_[id]) {
            const CompiledPattern& pattern = patterns_[ordinal];
            if (auto range = pattern.find(line, first_seen[id], *kernels_)) {
                hits.push_back(LineHit{pattern.key(), ordinal, to_span(line, *range, *kernels_), *range});
            }
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const LineHit& a, const LineHit& b) { return a.ordinal < b.ordinal; });
    return hits;
}

MultiMatcher build_matcher(const Catalog& catalog, const simd::KernelTable& kernels) {
    std::vector<CompiledPattern> compiled;
    const auto& rules = catalog.rules();
    for (std::uint32_t r = 0; r < rules.size(); ++r) {
        const auto& sub_rules = rules[r].sub_rules;
        for (std::uint32_t s = 0; s < sub_rules.size(); ++s) {
            const auto& patterns = sub_rules[s].patterns;
            for (std::uint32_t p = 0; p < patterns.size(); ++p) {
                try {
                    compiled.push_back(compile_pattern(patterns[p], PatternKey{r, s, p}));
                } catch (const PatternError& e) {
                    throw PatternError(e.kind(), rules[r].rule_id + " / " + sub_rules[s].id +
                                                     " / pattern " + std::to_string(p + 1) + ": " +
                                                     e.what());
                }
            }
        }
    }
    return MultiMatcher(std::move(compiled), kernels);
}

} // namespace hipaa
