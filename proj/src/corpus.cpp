#include "hipaa/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hipaa/errors.hpp"
#include "hipaa/reporting.hpp"

namespace fs = std::filesystem;

namespace hipaa {

namespace {

constexpr std::string_view kManifestHeader = "app_id,category,kind,path";

// Splits one CSV record. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        return std::nullopt;
    }
    fields.push_back(std::move(field));
    return fields;
}

bool is_safe_app_id(std::string_view id) {
    return !id.empty() && id != "." && id != ".." && id.find_first_of("/\\") == std::string_view::npos &&
           id.find('\0') == std::string_view::npos;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) {
        throw IngestionError(IngestionError::Kind::io, "cannot write " + path.string());
    }
}

struct AppOutcome {
    std::optional<AppVerdict> verdict;
    std::vector<MatchRecord> records;
    std::optional<std::string> error;
};

AppOutcome scan_app(const AppEntry& entry, const Catalog& catalog, const MultiMatcher& matcher,
                    const fs::path& workdir, const std::optional<DecompilerSpec>& decompiler,
                    const BatchOptions& options) {
    AppOutcome outcome;
    try {
        const fs::path app_dir = workdir / entry.app_id;
        fs::create_directories(app_dir);
        std::error_code ec;
        if (!fs::exists(entry.path, ec)) {
            throw IngestionError(IngestionError::Kind::io, "path does not exist: " + entry.path.string());
        }
        SourceTree tree = entry.kind == AppKind::apk
                              ? extract_apk(entry.path, app_dir / "extract", *decompiler, options.ingest)
                              : open_source_tree(entry.path, options.ingest);
        ScanResult scan = scan_tree(tree, catalog, matcher, ScanOptions{1});
        AppVerdict verdict = evaluate(scan, catalog, entry.app_id);

        ReportMetadata metadata;
        metadata.scanned_root = entry.path.string();
        metadata.deterministic = options.deterministic;
        const ReportBundle bundle = make_bundle(scan, verdict, metadata, source_access_for(tree));
        write_file(app_dir / "report.json", render_json(bundle));
        write_file(app_dir / "report.html", render_html(bundle));

        outcome.verdict = std::move(verdict);
        outcome.records = std::move(scan.records);
    } catch (const std::exception& e) {
        outcome.error = e.what();
    }
    return outcome;
}

} // namespace

std::string_view to_string(Category category) {
    switch (category) {
    case Category::medical:
        return "medical";
    case Category::health_fitness:
        return "health_fitness";
    case Category::other:
        return "other";
    }
    return "other";
}

Category parse_category(std::string_view text) {
    if (text == "medical") {
        return Category::medical;
    }
    if (text == "health_fitness") {
        return Category::health_fitness;
    }
    return Category::other;
}

std::vector<AppEntry> load_manifest(std::string_view csv_text) {
    std::vector<AppEntry> entries;
    std::set<std::string> seen;
    std::size_t row = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < csv_text.size()) {
        std::size_t end = csv_text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = csv_text.size();
        }
        std::string_view line = csv_text.substr(pos, end - pos);
        pos = end + 1;
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!header_seen) {
            if (row == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
                line.remove_prefix(3);
            }
            if (line != kManifestHeader) {
                throw ManifestError(ManifestError::Kind::bad_header, row,
                                    "expected header '" + std::string(kManifestHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_record(line);
        if (!fields || fields->size() != 4) {
            throw ManifestError(ManifestError::Kind::bad_row, row, "expected 4 fields");
        }
        AppEntry entry;
        entry.app_id = (*fields)[0];
        if (!is_safe_app_id(entry.app_id)) {
            throw ManifestError(ManifestError::Kind::bad_row, row, "app_id must be a non-empty file name");
        }
        entry.category = parse_category((*fields)[1]);
        if ((*fields)[2] == "source") {
            entry.kind = AppKind::source;
        } else if ((*fields)[2] == "apk") {
            entry.kind = AppKind::apk;
        } else {
            throw ManifestError(ManifestError::Kind::bad_row, row, "kind must be 'source' or 'apk'");
        }
        if ((*fields)[3].empty()) {
            throw ManifestError(ManifestError::Kind::bad_row, row, "path is empty");
        }
        entry.path = (*fields)[3];
        if (!seen.insert(entry.app_id).second) {
            throw ManifestError(ManifestError::Kind::duplicate_app_id, row, "duplicate app_id " + entry.app_id);
        }
        entries.push_back(std::move(entry));
    }
    if (!header_seen) {
        throw ManifestError(ManifestError::Kind::bad_header, 1, "manifest is empty");
    }
    return entries;
}

BatchResult run_batch(const std::vector<AppEntry>& entries, const Catalog& catalog, const fs::path& workdir,
                      const std::optional<DecompilerSpec>& decompiler, const BatchOptions& options) {
    const bool needs_decompiler =
        std::any_of(entries.begin(), entries.end(), [](const AppEntry& e) { return e.kind == AppKind::apk; });
    if (needs_decompiler) {
        if (!decompiler) {
            throw std::invalid_argument("manifest lists APKs but no decompiler command was given");
        }
        decompiler->validate();
    }

    std::error_code ec;
    fs::create_directories(workdir, ec);
    const fs::path probe = workdir / ".write-probe";
    {
        std::ofstream out(probe);
        if (ec || !out) {
            throw CorpusError(CorpusError::Kind::workdir_unwritable, "cannot write to " + workdir.string());
        }
    }
    fs::remove(probe, ec);

    const MultiMatcher matcher = build_matcher(catalog);
    std::vector<AppOutcome> outcomes(entries.size());
    std::size_t workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, entries.size()));
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1)) {
            outcomes[i] = scan_app(entries[i], catalog, matcher, workdir, decompiler, options);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    BatchResult result;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        AppOutcome& outcome = outcomes[i];
        if (outcome.error) {
            result.failures.push_back({entries[i].app_id, *outcome.error});
            continue;
        }
        result.verdicts.push_back(std::move(*outcome.verdict));
        std::move(outcome.records.begin(), outcome.records.end(), std::back_inserter(result.records));
    }
    return result;
}

CorpusStats compute_stats(const std::vector<AppVerdict>& verdicts, const std::vector<MatchRecord>& records,
                          const std::vector<AppEntry>& entries, std::vector<AppFailure> failures) {
    if (verdicts.empty()) {
        throw CorpusError(CorpusError::Kind::empty_corpus, "no app was scanned successfully");
    }
    CorpusStats stats;
    stats.app_count = verdicts.size();
    stats.failed_apps = std::move(failures);

    std::map<std::string, Category, std::less<>> category_of;
    for (const AppEntry& entry : entries) {
        category_of.emplace(entry.app_id, entry.category);
    }
    std::map<Category, std::vector<const AppVerdict*>> by_category;
    for (const AppVerdict& verdict : verdicts) {
        const auto it = category_of.find(verdict.app_id);
        by_category[it != category_of.end() ? it->second : Category::other].push_back(&verdict);
    }

    const auto prevalence = [](const std::vector<const AppVerdict*>& apps, std::size_t rule_index,
                               const std::string& rule_id) -> RulePercentage {
        const RuleStatus& reference = apps.front()->rules[rule_index];
        if (reference.status == Status::not_checkable) {
            return {rule_id, std::nullopt};
        }
        std::uint64_t satisfied = 0;
        for (const AppVerdict* app : apps) {
            const RuleStatus* rule = app->find_rule(rule_id);
            satisfied += rule != nullptr && rule->status == Status::satisfied ? 1 : 0;
        }
        return {rule_id, Percentage{satisfied, apps.size()}};
    };

    std::vector<const AppVerdict*> all;
    for (const AppVerdict& verdict : verdicts) {
        all.push_back(&verdict);
    }
    std::map<std::string, std::uint64_t, std::less<>> records_per_rule;
    for (const MatchRecord& record : records) {
        ++records_per_rule[record.rule_id];
    }

    const auto& rules = verdicts.front().rules;
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const std::string& rule_id = rules[r].rule_id;
        stats.per_rule_prevalence.push_back(prevalence(all, r, rule_id));
        const auto count = records_per_rule.find(rule_id);
        stats.match_share.push_back(
            {rule_id, Percentage{count != records_per_rule.end() ? count->second : 0, records.size()}});
        for (const auto& [category, apps] : by_category) {
            stats.per_category_prevalence[category].push_back(prevalence(apps, r, rule_id));
        }
    }
    return stats;
}

std::string stats_to_csv(const CorpusStats& stats) {
    const auto value = [](const RulePercentage& p) { return p.percentage ? p.percentage->to_string() : std::string(); };
    std::ostringstream out;
    out << "metric,category,rule_id,value\n";

    std::vector<std::pair<std::string_view, const std::vector<RulePercentage>*>> categories;
    for (const auto& [category, rows] : stats.per_category_prevalence) {
        categories.emplace_back(to_string(category), &rows);
    }
    std::sort(categories.begin(), categories.end());
    for (const auto& [name, rows] : categories) {
        for (const RulePercentage& row : *rows) {
            out << "category_prevalence," << name << ',' << row.rule_id << ',' << value(row) << '\n';
        }
    }
    for (const RulePercentage& row : stats.match_share) {
        out << "match_share,," << row.rule_id << ',' << value(row) << '\n';
    }
    for (const RulePercentage& row : stats.per_rule_prevalence) {
        out << "prevalence,," << row.rule_id << ',' << value(row) << '\n';
    }
    return out.str();
}

} // namespace hipaa
