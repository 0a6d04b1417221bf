#include "hipaa/verdicts.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "hipaa/errors.hpp"

namespace hipaa {

std::string_view to_string(Status status) {
    switch (status) {
    case Status::satisfied:
        return "satisfied";
    case Status::unsatisfied:
        return "unsatisfied";
    case Status::not_checkable:
        return "not_checkable";
    }
    return "unknown";
}

std::optional<Status> parse_status(std::string_view text) {
    for (Status status : {Status::satisfied, Status::unsatisfied, Status::not_checkable}) {
        if (to_string(status) == text) {
            return status;
        }
    }
    return std::nullopt;
}

const RuleStatus* AppVerdict::find_rule(std::string_view rule_id) const {
    for (const auto& rule : rules) {
        if (rule.rule_id == rule_id) {
            return &rule;
        }
    }
    return nullptr;
}

AppVerdict evaluate(const ScanResult& result, const Catalog& catalog, std::string app_id) {
    if (result.catalog_checksum != catalog.checksum()) {
        throw ChecksumMismatch("scan was produced with catalog " + result.catalog_checksum +
                               " but verdicts requested for catalog " + catalog.checksum());
    }

    // (rule index, sub-rule index) -> matched pattern indices and record count
    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::set<std::size_t>, std::size_t>> hits;
    std::vector<MatchRecord> advisory;
    const auto& rules = catalog.rules();
    for (const MatchRecord& record : result.records) {
        const auto rule_it = std::find_if(rules.begin(), rules.end(),
                                          [&](const SafeguardRule& r) { return r.rule_id == record.rule_id; });
        if (rule_it == rules.end()) {
            continue;
        }
        const auto& subs = rule_it->sub_rules;
        const auto sub_it =
            std::find_if(subs.begin(), subs.end(), [&](const SubRule& s) { return s.id == record.sub_rule_id; });
        if (sub_it == subs.end()) {
            continue;
        }
        const auto pattern_it = std::find(sub_it->patterns.begin(), sub_it->patterns.end(), record.pattern_text);
        const std::size_t pattern_index = pattern_it != sub_it->patterns.end()
                                              ? static_cast<std::size_t>(pattern_it - sub_it->patterns.begin())
                                              : record.key.pattern;
        auto& entry = hits[{static_cast<std::size_t>(rule_it - rules.begin()),
                            static_cast<std::size_t>(sub_it - subs.begin())}];
        entry.first.insert(pattern_index);
        ++entry.second;
        if (sub_it->polarity == Polarity::advisory) {
            advisory.push_back(record);
        }
    }

    AppVerdict verdict;
    verdict.app_id = std::move(app_id);
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const SafeguardRule& rule = rules[r];
        RuleStatus status;
        status.rule_id = rule.rule_id;
        status.safeguard = rule.safeguard;
        if (!rule.checkable()) {
            status.status = Status::not_checkable;
            verdict.rules.push_back(std::move(status));
            continue;
        }
        ++verdict.checkable_count;
        bool evidence_found = false;
        for (std::size_t s = 0; s < rule.sub_rules.size(); ++s) {
            const SubRule& sub = rule.sub_rules[s];
            SubRuleStatus sub_status;
            sub_status.sub_rule_id = sub.id;
            sub_status.polarity = sub.polarity;
            if (auto it = hits.find({r, s}); it != hits.end()) {
                sub_status.matched_patterns = it->second.first;
                sub_status.match_count = it->second.second;
            }
            const bool satisfied = sub.mode == MatchMode::any
                                       ? !sub_status.matched_patterns.empty()
                                       : sub_status.matched_patterns.size() == sub.patterns.size();
            sub_status.status = satisfied ? Status::satisfied : Status::unsatisfied;
            evidence_found = evidence_found || (satisfied && sub.polarity == Polarity::evidence);
            status.sub_statuses.push_back(std::move(sub_status));
        }
        status.status = evidence_found ? Status::satisfied : Status::unsatisfied;
        if (evidence_found) {
            ++verdict.satisfied_count;
        } else if (auto advice = catalog.recommendation(rule.rule_id)) {
            status.recommendation = std::string(*advice);
        }
        verdict.rules.push_back(std::move(status));
    }
    std::sort(advisory.begin(), advisory.end(), [](const MatchRecord& a, const MatchRecord& b) {
        return std::tie(a.file, a.line_number, a.key, a.column, a.rule_id, a.sub_rule_id, a.pattern_text, a.snippet,
                        a.occurrences) < std::tie(b.file, b.line_number, b.key, b.column, b.rule_id, b.sub_rule_id,
                                                  b.pattern_text, b.snippet, b.occurrences);
    });
    verdict.advisory_findings = std::move(advisory);
    return verdict;
}

int exit_code(const AppVerdict& verdict) { return verdict.satisfied_count == verdict.checkable_count ? 0 : 1; }

} // namespace hipaa
