#pragma once

// Naive reference matcher for the pattern language, written without any of
// the library's matching code. Quadratic-to-cubic per line; only for tests.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hipaa/catalog.hpp"
#include "hipaa/ingestion.hpp"
#include "hipaa/scanner.hpp"

namespace oracle {

struct Token {
    enum Kind { literal, any, blanks } kind;
    char ch = 0;
};

inline std::vector<Token> tokenize(std::string_view pattern) {
    while (!pattern.empty() && (pattern.back() == ' ' || pattern.back() == '\t' || pattern.back() == '\r' ||
                                pattern.back() == '\n')) {
        pattern.remove_suffix(1);
    }
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern.compare(i, 2, ".*") == 0) {
            tokens.push_back({Token::any});
            ++i;
        } else if (pattern.compare(i, 3, "\\s*") == 0) {
            tokens.push_back({Token::blanks});
            i += 2;
        } else {
            tokens.push_back({Token::literal, pattern[i]});
        }
    }
    return tokens;
}

// True when tokens[t..] matches text[i..] exactly, to the end of text.
inline bool matches_whole(const std::vector<Token>& tokens, std::size_t t, std::string_view text, std::size_t i) {
    if (t == tokens.size()) {
        return i == text.size();
    }
    const Token& token = tokens[t];
    switch (token.kind) {
    case Token::literal:
        return i < text.size() && text[i] == token.ch && matches_whole(tokens, t + 1, text, i + 1);
    case Token::any:
        for (std::size_t j = i; j <= text.size(); ++j) {
            if (matches_whole(tokens, t + 1, text, j)) {
                return true;
            }
        }
        return false;
    case Token::blanks:
        for (std::size_t j = i;; ++j) {
            if (matches_whole(tokens, t + 1, text, j)) {
                return true;
            }
            if (j == text.size() || (text[j] != ' ' && text[j] != '\t')) {
                return false;
            }
        }
    }
    return false;
}

// Leftmost start at or after `from`, then shortest end; byte offsets.
inline std::optional<std::pair<std::size_t, std::size_t>> find(std::string_view pattern, std::string_view line,
                                                               std::size_t from = 0) {
    const auto tokens = tokenize(pattern);
    for (std::size_t start = from; start <= line.size(); ++start) {
        for (std::size_t end = start; end <= line.size(); ++end) {
            if (matches_whole(tokens, 0, line.substr(start, end - start), 0)) {
                return std::pair{start, end};
            }
        }
    }
    return std::nullopt;
}

inline std::size_t count(std::string_view pattern, std::string_view line) {
    std::size_t n = 0;
    std::size_t from = 0;
    while (auto hit = find(pattern, line, from)) {
        ++n;
        from = hit->second > hit->first ? hit->second : hit->first + 1;
    }
    return n;
}

inline std::size_t code_points(std::string_view bytes) {
    std::size_t n = 0;
    for (unsigned char c : bytes) {
        n += (c & 0xC0) != 0x80 ? 1 : 0;
    }
    return n;
}

inline std::string snippet(std::string_view line, std::size_t limit = 500) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((static_cast<unsigned char>(line[i]) & 0xC0) != 0x80) {
            if (seen == limit) {
                return std::string(line.substr(0, i));
            }
            ++seen;
        }
    }
    return std::string(line);
}

// Every (file, line, pattern) hit in file / line / catalog order.
inline std::vector<hipaa::MatchRecord> scan(const hipaa::SourceTree& tree, const hipaa::Catalog& catalog) {
    std::vector<hipaa::MatchRecord> records;
    for (const auto& file : tree.files) {
        for (std::size_t l = 0; l < file.lines.size(); ++l) {
            const std::string& line = file.lines[l];
            for (std::uint32_t r = 0; r < catalog.rules().size(); ++r) {
                const auto& rule = catalog.rules()[r];
                for (std::uint32_t s = 0; s < rule.sub_rules.size(); ++s) {
                    const auto& sub = rule.sub_rules[s];
                    for (std::uint32_t p = 0; p < sub.patterns.size(); ++p) {
                        const auto hit = find(sub.patterns[p], line);
                        if (!hit) {
                            continue;
                        }
                        hipaa::MatchRecord record;
                        record.file = file.relative_path;
                        record.line_number = l + 1;
                        record.column = code_points(std::string_view(line).substr(0, hit->first)) + 1;
                        record.rule_id = rule.rule_id;
                        record.sub_rule_id = sub.id;
                        record.pattern_text = sub.patterns[p];
                        record.snippet = snippet(line);
                        record.occurrences = count(sub.patterns[p], line);
                        record.key = {r, s, p};
                        records.push_back(std::move(record));
                    }
                }
            }
        }
    }
    return records;
}

} // namespace oracle
