#include "hipaa/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <tuple>

namespace hipaa {

bool record_order(const MatchRecord& a, const MatchRecord& b) {
    return std::tie(a.file, a.line_number, a.key) < std::tie(b.file, b.line_number, b.key);
}

std::string make_snippet(std::string_view line) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((static_cast<unsigned char>(line[i]) & 0xC0) != 0x80) {
            if (seen == kMaxSnippetCodePoints) {
                return std::string(line.substr(0, i));
            }
            ++seen;
        }
    }
    return std::string(line);
}

std::vector<MatchRecord> scan_file(const SourceFile& file, const MultiMatcher& matcher, const Catalog& catalog) {
    std::vector<MatchRecord> records;
    const auto& rules = catalog.rules();
    for (std::size_t index = 0; index < file.lines.size(); ++index) {
        const std::string& line = file.lines[index];
        for (const LineHit& hit : matcher.scan_line(line)) {
            const CompiledPattern& pattern = matcher.patterns()[hit.ordinal];
            const SafeguardRule& rule = rules[hit.key.rule];
            MatchRecord record;
            record.file = file.relative_path;
            record.line_number = index + 1;
            record.column = hit.span.start_column;
            record.rule_id = rule.rule_id;
            record.sub_rule_id = rule.sub_rules[hit.key.sub_rule].id;
            record.pattern_text = pattern.source_text();
            record.snippet = make_snippet(line);
            record.occurrences = pattern.count_occurrences(line, matcher.kernels());
            record.key = hit.key;
            records.push_back(std::move(record));
        }
    }
    return records;
}

ScanResult scan_tree(const SourceTree& tree, const Catalog& catalog, const ScanOptions& options) {
    return scan_tree(tree, catalog, build_matcher(catalog), options);
}

ScanResult scan_tree(const SourceTree& tree, const Catalog& catalog, const MultiMatcher& matcher,
                     const ScanOptions& options) {
    ScanResult result;
    result.catalog_checksum = catalog.checksum();
    result.warnings = tree.warnings;
    result.files_scanned = tree.files.size();
    result.lines_scanned = tree.line_count();

    std::vector<std::vector<MatchRecord>> per_file(tree.files.size());
    std::size_t workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, tree.files.size()));

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < tree.files.size(); i = next.fetch_add(1)) {
            per_file[i] = scan_file(tree.files[i], matcher, catalog);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    for (auto& records : per_file) {
        std::move(records.begin(), records.end(), std::back_inserter(result.records));
    }
    std::stable_sort(result.records.begin(), result.records.end(), record_order);
    return result;
}

} // namespace hipaa
