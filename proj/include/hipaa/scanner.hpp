#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hipaa/catalog.hpp"
#include "hipaa/ingestion.hpp"
#include "hipaa/pattern.hpp"

namespace hipaa {

inline constexpr std::size_t kMaxSnippetCodePoints = 500;

struct MatchRecord {
    std::string file;
    std::size_t line_number = 0;
    std::size_t column = 0;
    std::string rule_id;
    std::string sub_rule_id;
    std::string pattern_text;
    std::string snippet;
    std::size_t occurrences = 1;
    // Catalog coordinates of the pattern; orders records within a line.
    PatternKey key;

    bool operator==(const MatchRecord&) const = default;
};

// (file, line_number, catalog order).
bool record_order(const MatchRecord& a, const MatchRecord& b);

struct ScanResult {
    std::vector<MatchRecord> records;
    std::size_t files_scanned = 0;
    std::size_t lines_scanned = 0;
    std::vector<std::string> warnings;
    std::string catalog_checksum;

    bool operator==(const ScanResult&) const = default;
};

struct ScanOptions {
    // 0 means one worker per hardware thread.
    std::size_t workers = 0;
};

// Snippet text: the line, cut to kMaxSnippetCodePoints code points.
std::string make_snippet(std::string_view line);

std::vector<MatchRecord> scan_file(const SourceFile& file, const MultiMatcher& matcher, const Catalog& catalog);

ScanResult scan_tree(const SourceTree& tree, const Catalog& catalog, const ScanOptions& options = {});
ScanResult scan_tree(const SourceTree& tree, const Catalog& catalog, const MultiMatcher& matcher,
                     const ScanOptions& options = {});

} // namespace hipaa
