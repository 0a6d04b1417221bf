#include "hipaa/reporting.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "hipaa/errors.hpp"
#include "json.hpp"

namespace hipaa {

using ordered_json = nlohmann::ordered_json;

namespace {

std::optional<std::vector<ContextLine>> window(const std::vector<std::string>& lines, std::size_t line,
                                               std::size_t radius) {
    if (line == 0 || line > lines.size()) {
        return std::nullopt;
    }
    std::vector<ContextLine> context;
    const std::size_t first = line > radius ? line - radius : 1;
    const std::size_t last = std::min(lines.size(), line + radius);
    for (std::size_t n = first; n <= last; ++n) {
        context.push_back({n, lines[n - 1]});
    }
    return context;
}

ordered_json match_json(const MatchRecord& record) {
    ordered_json match;
    match["file"] = record.file;
    match["line"] = record.line_number;
    match["column"] = record.column;
    match["pattern"] = record.pattern_text;
    match["snippet"] = record.snippet;
    match["occurrences"] = record.occurrences;
    return match;
}

MatchRecord record_from_json(const ordered_json& match, std::string rule_id, std::string sub_rule_id) {
    MatchRecord record;
    record.file = match.at("file").get<std::string>();
    record.line_number = match.at("line").get<std::size_t>();
    record.column = match.at("column").get<std::size_t>();
    record.pattern_text = match.at("pattern").get<std::string>();
    record.snippet = match.at("snippet").get<std::string>();
    record.occurrences = match.at("occurrences").get<std::size_t>();
    record.rule_id = std::move(rule_id);
    record.sub_rule_id = std::move(sub_rule_id);
    return record;
}

} // namespace

std::string_view tool_version() { return "1.0.0"; }

std::string current_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

SourceAccess source_access_for(const SourceTree& tree) {
    return [&tree](std::string_view file, std::size_t line, std::size_t radius) -> std::optional<std::vector<ContextLine>> {
        const SourceFile* source = tree.find(file);
        if (source == nullptr) {
            return std::nullopt;
        }
        return window(source->lines, line, radius);
    };
}

SourceAccess source_access_for_directory(std::filesystem::path root) {
    struct Cache {
        std::mutex mutex;
        std::map<std::string, std::optional<std::vector<std::string>>, std::less<>> files;
    };
    auto cache = std::make_shared<Cache>();
    return [root = std::move(root), cache](std::string_view file, std::size_t line,
                                           std::size_t radius) -> std::optional<std::vector<ContextLine>> {
        std::lock_guard lock(cache->mutex);
        auto it = cache->files.find(file);
        if (it == cache->files.end()) {
            std::optional<std::vector<std::string>> lines;
            const auto path = root / std::filesystem::path(std::string(file));
            if (std::ifstream in(path, std::ios::binary); in) {
                std::ostringstream buffer;
                buffer << in.rdbuf();
                bool lossy = false;
                lines = split_lines(decode_utf8_lossy(buffer.str(), lossy));
            }
            it = cache->files.emplace(std::string(file), std::move(lines)).first;
        }
        if (!it->second) {
            return std::nullopt;
        }
        return window(*it->second, line, radius);
    };
}

ReportBundle make_bundle(const ScanResult& scan, AppVerdict verdict, ReportMetadata metadata,
                         SourceAccess source_access) {
    ReportBundle bundle;
    bundle.verdict = std::move(verdict);
    bundle.records = scan.records;
    bundle.source_access = std::move(source_access);
    if (metadata.deterministic) {
        metadata.timestamp = std::string(kDeterministicTimestamp);
    } else if (metadata.timestamp.empty()) {
        metadata.timestamp = current_timestamp();
    }
    bundle.metadata = std::move(metadata);
    bundle.catalog_checksum = scan.catalog_checksum;
    bundle.files_scanned = scan.files_scanned;
    bundle.lines_scanned = scan.lines_scanned;
    return bundle;
}

std::string render_json(const ReportBundle& bundle) {
    std::map<std::pair<std::string_view, std::string_view>, std::vector<const MatchRecord*>> by_sub_rule;
    for (const MatchRecord& record : bundle.records) {
        by_sub_rule[{record.rule_id, record.sub_rule_id}].push_back(&record);
    }

    ordered_json root;
    root["tool_version"] = bundle.metadata.tool_version;
    root["catalog_checksum"] = bundle.catalog_checksum;
    root["app_id"] = bundle.verdict.app_id;
    root["scanned_root"] = bundle.metadata.scanned_root;
    root["timestamp"] =
        bundle.metadata.deterministic ? std::string(kDeterministicTimestamp) : bundle.metadata.timestamp;
    root["files_scanned"] = bundle.files_scanned;
    root["lines_scanned"] = bundle.lines_scanned;

    ordered_json rules = ordered_json::array();
    for (const RuleStatus& rule : bundle.verdict.rules) {
        ordered_json entry;
        entry["rule_id"] = rule.rule_id;
        entry["cfr_reference"] = rule.safeguard.cfr_reference;
        entry["status"] = to_string(rule.status);
        entry["recommendation"] = rule.recommendation ? ordered_json(*rule.recommendation) : ordered_json(nullptr);
        ordered_json subrules = ordered_json::array();
        for (const SubRuleStatus& sub : rule.sub_statuses) {
            ordered_json sub_entry;
            sub_entry["sub_rule_id"] = sub.sub_rule_id;
            sub_entry["status"] = to_string(sub.status);
            ordered_json matches = ordered_json::array();
            if (auto it = by_sub_rule.find({rule.rule_id, sub.sub_rule_id}); it != by_sub_rule.end()) {
                for (const MatchRecord* record : it->second) {
                    matches.push_back(match_json(*record));
                }
            }
            sub_entry["matches"] = std::move(matches);
            subrules.push_back(std::move(sub_entry));
        }
        entry["subrules"] = std::move(subrules);
        rules.push_back(std::move(entry));
    }
    root["rules"] = std::move(rules);

    ordered_json advisory = ordered_json::array();
    for (const MatchRecord& record : bundle.verdict.advisory_findings) {
        ordered_json finding;
        finding["rule_id"] = record.rule_id;
        finding["sub_rule_id"] = record.sub_rule_id;
        finding.update(match_json(record));
        advisory.push_back(std::move(finding));
    }
    root["advisory_findings"] = std::move(advisory);

    ordered_json summary;
    summary["satisfied_count"] = bundle.verdict.satisfied_count;
    summary["checkable_count"] = bundle.verdict.checkable_count;
    root["summary"] = std::move(summary);

    return root.dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n";
}

ReportBundle parse_json_report(std::string_view json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const ordered_json::exception& e) {
        throw Error(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        ReportBundle bundle;
        bundle.metadata.tool_version = root.at("tool_version").get<std::string>();
        bundle.catalog_checksum = root.at("catalog_checksum").get<std::string>();
        bundle.verdict.app_id = root.at("app_id").get<std::string>();
        bundle.metadata.scanned_root = root.at("scanned_root").get<std::string>();
        bundle.metadata.timestamp = root.at("timestamp").get<std::string>();
        bundle.metadata.deterministic = bundle.metadata.timestamp == kDeterministicTimestamp;
        bundle.files_scanned = root.at("files_scanned").get<std::size_t>();
        bundle.lines_scanned = root.at("lines_scanned").get<std::size_t>();

        for (const auto& finding : root.at("advisory_findings")) {
            bundle.verdict.advisory_findings.push_back(record_from_json(
                finding, finding.at("rule_id").get<std::string>(), finding.at("sub_rule_id").get<std::string>()));
        }
        const auto is_advisory = [&](std::string_view rule_id, std::string_view sub_rule_id) {
            return std::any_of(bundle.verdict.advisory_findings.begin(), bundle.verdict.advisory_findings.end(),
                               [&](const MatchRecord& r) { return r.rule_id == rule_id && r.sub_rule_id == sub_rule_id; });
        };

        std::uint32_t rule_index = 0;
        for (const auto& rule_json : root.at("rules")) {
            RuleStatus rule;
            rule.rule_id = rule_json.at("rule_id").get<std::string>();
            const std::string reference = rule_json.at("cfr_reference").get<std::string>();
            if (const SafeguardRef* known = find_safeguard(reference)) {
                rule.safeguard = *known;
            } else {
                rule.safeguard = SafeguardRef{reference, rule.rule_id, ""};
            }
            const auto status = parse_status(rule_json.at("status").get<std::string>());
            if (!status) {
                throw Error("unknown rule status in report for " + rule.rule_id);
            }
            rule.status = *status;
            if (!rule_json.at("recommendation").is_null()) {
                rule.recommendation = rule_json.at("recommendation").get<std::string>();
            }
            std::uint32_t sub_index = 0;
            for (const auto& sub_json : rule_json.at("subrules")) {
                SubRuleStatus sub;
                sub.sub_rule_id = sub_json.at("sub_rule_id").get<std::string>();
                const auto sub_status = parse_status(sub_json.at("status").get<std::string>());
                if (!sub_status) {
                    throw Error("unknown sub-rule status in report for " + sub.sub_rule_id);
                }
                sub.status = *sub_status;
                sub.polarity = is_advisory(rule.rule_id, sub.sub_rule_id) ? Polarity::advisory : Polarity::evidence;
                for (const auto& match : sub_json.at("matches")) {
                    MatchRecord record = record_from_json(match, rule.rule_id, sub.sub_rule_id);
                    record.key = PatternKey{rule_index, sub_index, 0};
                    bundle.records.push_back(std::move(record));
                    ++sub.match_count;
                }
                rule.sub_statuses.push_back(std::move(sub));
                ++sub_index;
            }
            if (rule.status == Status::satisfied) {
                ++bundle.verdict.satisfied_count;
            }
            if (rule.status != Status::not_checkable) {
                ++bundle.verdict.checkable_count;
            }
            bundle.verdict.rules.push_back(std::move(rule));
            ++rule_index;
        }
        const auto& summary = root.at("summary");
        if (summary.at("satisfied_count").get<std::size_t>() != bundle.verdict.satisfied_count ||
            summary.at("checkable_count").get<std::size_t>() != bundle.verdict.checkable_count) {
            throw Error("report summary disagrees with its rule statuses");
        }
        return bundle;
    } catch (const ordered_json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
}

std::string render_text(const ReportBundle& bundle) {
    std::ostringstream out;
    for (const RuleStatus& rule : bundle.verdict.rules) {
        const char* tag = rule.status == Status::satisfied     ? "[PASS]"
                          : rule.status == Status::unsatisfied ? "[FAIL]"
                                                               : "[N/A]";
        out << tag << ' ' << rule.safeguard.cfr_reference << ' ' << rule.rule_id << '\n';
    }
    out << "satisfied " << bundle.verdict.satisfied_count << '/' << bundle.verdict.checkable_count << " checkable\n";
    return out.str();
}

} // namespace hipaa
