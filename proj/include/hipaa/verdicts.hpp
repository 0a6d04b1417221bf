#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hipaa/catalog.hpp"
#include "hipaa/scanner.hpp"

namespace hipaa {

enum class Status { satisfied, unsatisfied, not_checkable };

std::string_view to_string(Status status);
std::optional<Status> parse_status(std::string_view text);

struct SubRuleStatus {
    std::string sub_rule_id;
    Status status = Status::unsatisfied;
    Polarity polarity = Polarity::evidence;
    std::set<std::size_t> matched_patterns;
    std::size_t match_count = 0;

    bool operator==(const SubRuleStatus&) const = default;
};

struct RuleStatus {
    std::string rule_id;
    SafeguardRef safeguard;
    Status status = Status::unsatisfied;
    std::vector<SubRuleStatus> sub_statuses;
    std::optional<std::string> recommendation;

    bool operator==(const RuleStatus&) const = default;
};

struct AppVerdict {
    std::string app_id;
    std::vector<RuleStatus> rules;
    std::size_t satisfied_count = 0;
    std::size_t checkable_count = 0;
    std::vector<MatchRecord> advisory_findings;

    const RuleStatus* find_rule(std::string_view rule_id) const;
    bool operator==(const AppVerdict&) const = default;
};

// Folds scan records into statuses. A sub-rule is satisfied when any (mode
// any) or every (mode all) pattern matched; a rule is satisfied when one of
// its evidence sub-rules is. Throws ChecksumMismatch when the scan was made
// with a different catalog.
AppVerdict evaluate(const ScanResult& result, const Catalog& catalog, std::string app_id);

// 0 when every checkable rule is satisfied, otherwise 1.
int exit_code(const AppVerdict& verdict);

} // namespace hipaa
