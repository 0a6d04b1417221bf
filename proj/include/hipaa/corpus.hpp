#pragma once

// Batch scanning of many apps and the corpus-level prevalence metrics.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipaa/catalog.hpp"
#include "hipaa/ingestion.hpp"
#include "hipaa/percent.hpp"
#include "hipaa/scanner.hpp"
#include "hipaa/verdicts.hpp"

namespace hipaa {

enum class Category { medical, health_fitness, other };
enum class AppKind { source, apk };

std::string_view to_string(Category category);
Category parse_category(std::string_view text);

struct AppEntry {
    std::string app_id;
    Category category = Category::other;
    AppKind kind = AppKind::source;
    std::filesystem::path path;

    bool operator==(const AppEntry&) const = default;
};

// Parses `app_id,category,kind,path` CSV (double quotes allowed around
// fields). Throws ManifestError.
std::vector<AppEntry> load_manifest(std::string_view csv_text);

struct AppFailure {
    std::string app_id;
    std::string error;

    bool operator==(const AppFailure&) const = default;
};

struct BatchOptions {
    // 0 means one worker per hardware thread. Apps run concurrently; each
    // app's scan is single-threaded.
    std::size_t workers = 0;
    bool deterministic = false;
    IngestOptions ingest;
};

struct BatchResult {
    // In manifest order, failed apps omitted.
    std::vector<AppVerdict> verdicts;
    std::vector<MatchRecord> records;
    std::vector<AppFailure> failures;
};

// Ingests, scans and evaluates each app, writing
// <workdir>/<app_id>/report.json and report.html. Per-app problems become
// failures; an unusable workdir throws CorpusError, and APK entries without
// a decompiler throw std::invalid_argument.
BatchResult run_batch(const std::vector<AppEntry>& entries, const Catalog& catalog,
                      const std::filesystem::path& workdir, const std::optional<DecompilerSpec>& decompiler,
                      const BatchOptions& options = {});

struct RulePercentage {
    std::string rule_id;
    // Absent for rules that are not checkable.
    std::optional<Percentage> percentage;

    bool operator==(const RulePercentage&) const = default;
};

struct CorpusStats {
    std::vector<RulePercentage> per_rule_prevalence;
    std::vector<RulePercentage> match_share;
    // Only categories with at least one scanned app.
    std::map<Category, std::vector<RulePercentage>> per_category_prevalence;
    std::size_t app_count = 0;
    std::vector<AppFailure> failed_apps;
};

// Throws CorpusError (empty_corpus) when no app was scanned.
CorpusStats compute_stats(const std::vector<AppVerdict>& verdicts, const std::vector<MatchRecord>& records,
                          const std::vector<AppEntry>& entries, std::vector<AppFailure> failures = {});

std::string stats_to_csv(const CorpusStats& stats);

} // namespace hipaa
