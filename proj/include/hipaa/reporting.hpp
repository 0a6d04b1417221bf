#pragma once

// Report rendering: machine-readable JSON, a terminal summary, and a
// self-contained HTML page with each matched line shown in context.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipaa/ingestion.hpp"
#include "hipaa/scanner.hpp"
#include "hipaa/verdicts.hpp"

namespace hipaa {

inline constexpr std::string_view kDeterministicTimestamp = "1970-01-01T00:00:00Z";
inline constexpr std::size_t kContextRadius = 2;

std::string_view tool_version();

// Current UTC time as RFC 3339, second precision.
std::string current_timestamp();

struct ContextLine {
    std::size_t number = 0;
    std::string text;
};

// Lines [line - radius, line + radius] of `file`, clipped to the file, or
// nullopt when the file is not available.
using SourceAccess =
    std::function<std::optional<std::vector<ContextLine>>(std::string_view file, std::size_t line, std::size_t radius)>;

// Serves context from an in-memory tree; the tree must outlive the callback.
SourceAccess source_access_for(const SourceTree& tree);

// Serves context by reading files under `root` on demand.
SourceAccess source_access_for_directory(std::filesystem::path root);

struct ReportMetadata {
    std::string tool_version{hipaa::tool_version()};
    std::string timestamp;
    std::string scanned_root;
    bool deterministic = false;
};

struct ReportBundle {
    AppVerdict verdict;
    std::vector<MatchRecord> records;
    SourceAccess source_access;
    ReportMetadata metadata;
    std::string catalog_checksum;
    std::size_t files_scanned = 0;
    std::size_t lines_scanned = 0;
};

// Bundles a scan and its verdict. The timestamp is taken now unless
// `metadata.deterministic` is set.
ReportBundle make_bundle(const ScanResult& scan, AppVerdict verdict, ReportMetadata metadata,
                         SourceAccess source_access = {});

std::string render_json(const ReportBundle& bundle);
std::string render_html(const ReportBundle& bundle);
std::string render_text(const ReportBundle& bundle);

// Rebuilds a bundle from render_json output so it can be rendered again.
// Throws Error on malformed input.
ReportBundle parse_json_report(std::string_view json_text);

} // namespace hipaa
