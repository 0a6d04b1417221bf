#include "hipaa/catalog.hpp"

#include <openssl/evp.h>

#include <regex>
#include <set>
#include <sstream>

#include "hipaa/errors.hpp"
#include "hipaa/pattern.hpp"

namespace hipaa {

namespace {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0x0F]);
    }
    return hex;
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

// Text after `prefix`, with a single leading space removed.
std::string directive_value(std::string_view line, std::string_view prefix) {
    std::string_view value = line.substr(prefix.size());
    if (!value.empty() && value.front() == ' ') {
        value.remove_prefix(1);
    }
    return std::string(value);
}

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') {
            ++i;
        }
        if (i > start) {
            words.push_back(text.substr(start, i - start));
        }
    }
    return words;
}

class RulesParser {
public:
    Catalog parse(std::string_view source) {
        std::size_t line_number = 0;
        std::size_t pos = 0;
        while (pos <= source.size()) {
            std::size_t end = source.find('\n', pos);
            if (end == std::string_view::npos) {
                end = source.size();
            }
            std::string_view line = source.substr(pos, end - pos);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            ++line_number;
            parse_line(line, line_number);
            pos = end + 1;
        }
        close_sub_rule();
        return Catalog(std::move(rules_), std::move(recommendations_));
    }

private:
    [[noreturn]] static void fail(std::size_t line, const std::string& message) {
        throw CatalogError(CatalogError::Kind::parse, line, message);
    }

    void parse_line(std::string_view line, std::size_t number) {
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            return;
        }
        if (line.starts_with("pattern:")) {
            if (!in_sub_rule_) {
                fail(number, "pattern outside of a [subrule]");
            }
            rules_.back().sub_rules.back().patterns.push_back(directive_value(line, "pattern:"));
        } else if (line.starts_with("recommend:")) {
            if (rules_.empty()) {
                fail(number, "recommend outside of a [rule]");
            }
            const std::string& rule_id = rules_.back().rule_id;
            if (!recommendations_.emplace(rule_id, directive_value(line, "recommend:")).second) {
                fail(number, "second recommend for rule " + rule_id);
            }
        } else if (stripped.starts_with("[rule]")) {
            parse_rule(stripped.substr(6), number);
        } else if (stripped.starts_with("[subrule]")) {
            parse_sub_rule(stripped.substr(9), number);
        } else {
            fail(number, "unrecognized directive: " + std::string(stripped));
        }
    }

    void parse_rule(std::string_view rest, std::size_t number) {
        close_sub_rule();
        const auto words = split_words(rest);
        if (words.empty()) {
            fail(number, "[rule] needs a rule id");
        }
        SafeguardRule rule;
        rule.rule_id = std::string(words[0]);
        std::optional<std::string> reference;
        for (std::size_t i = 1; i < words.size(); ++i) {
            if (words[i].starts_with("ref=")) {
                reference = std::string(words[i].substr(4));
            } else {
                fail(number, "unknown [rule] attribute: " + std::string(words[i]));
            }
        }
        if (!reference || reference->empty()) {
            fail(number, "[rule] " + rule.rule_id + " is missing ref=");
        }
        if (!rule_ids_.insert(rule.rule_id).second) {
            throw CatalogError(CatalogError::Kind::duplicate_id, number, "duplicate rule id " + rule.rule_id);
        }
        if (const SafeguardRef* known = find_safeguard(*reference)) {
            rule.safeguard = *known;
        } else {
            rule.safeguard = SafeguardRef{*reference, rule.rule_id, ""};
        }
        rules_.push_back(std::move(rule));
    }

    void parse_sub_rule(std::string_view rest, std::size_t number) {
        close_sub_rule();
        if (rules_.empty()) {
            fail(number, "[subrule] before any [rule]");
        }
        rest = trim(rest);
        if (rest.empty() || rest.front() != '"') {
            fail(number, "[subrule] id must be double-quoted");
        }
        const std::size_t close = rest.find('"', 1);
        if (close == std::string_view::npos) {
            fail(number, "unterminated [subrule] id");
        }
        SubRule sub;
        sub.id = std::string(rest.substr(1, close - 1));
        if (sub.id.empty()) {
            fail(number, "[subrule] id is empty");
        }
        for (std::string_view word : split_words(rest.substr(close + 1))) {
            if (word == "mode=any") {
                sub.mode = MatchMode::any;
            } else if (word == "mode=all") {
                sub.mode = MatchMode::all;
            } else if (word == "polarity=evidence") {
                sub.polarity = Polarity::evidence;
            } else if (word == "polarity=advisory") {
                sub.polarity = Polarity::advisory;
            } else {
                fail(number, "unknown [subrule] attribute: " + std::string(word));
            }
        }
        auto& siblings = rules_.back().sub_rules;
        for (const auto& existing : siblings) {
            if (existing.id == sub.id) {
                throw CatalogError(CatalogError::Kind::duplicate_id, number,
                                   "duplicate sub-rule id \"" + sub.id + "\" in rule " + rules_.back().rule_id);
            }
        }
        siblings.push_back(std::move(sub));
        in_sub_rule_ = true;
        sub_rule_line_ = number;
    }

    void close_sub_rule() {
        if (in_sub_rule_ && rules_.back().sub_rules.back().patterns.empty()) {
            throw CatalogError(CatalogError::Kind::empty_sub_rule, sub_rule_line_,
                               "sub-rule \"" + rules_.back().sub_rules.back().id + "\" has no patterns");
        }
        in_sub_rule_ = false;
    }

    std::vector<SafeguardRule> rules_;
    std::map<std::string, std::string> recommendations_;
    std::set<std::string> rule_ids_;
    bool in_sub_rule_ = false;
    std::size_t sub_rule_line_ = 0;
};

} // namespace

std::string_view to_string(MatchMode mode) { return mode == MatchMode::any ? "any" : "all"; }

std::string_view to_string(Polarity polarity) {
    return polarity == Polarity::evidence ? "evidence" : "advisory";
}

std::string_view to_string(Profile profile) { return profile == Profile::paper ? "paper" : "strict"; }

std::optional<Profile> parse_profile(std::string_view text) {
    if (text == "paper") {
        return Profile::paper;
    }
    if (text == "strict") {
        return Profile::strict;
    }
    return std::nullopt;
}

std::string_view to_string(Issue::Kind kind) {
    switch (kind) {
    case Issue::Kind::bad_reference:
        return "BadReference";
    case Issue::Kind::empty_pattern:
        return "EmptyPattern";
    case Issue::Kind::invalid_pattern:
        return "InvalidPattern";
    case Issue::Kind::duplicate_id:
        return "DuplicateId";
    case Issue::Kind::unknown_recommendation:
        return "UnknownRecommendation";
    }
    return "Unknown";
}

Catalog::Catalog(std::vector<SafeguardRule> rules, std::map<std::string, std::string> recommendations)
    : rules_(std::move(rules)), recommendations_(std::move(recommendations)) {
    checksum_ = sha256_hex(serialize_catalog(*this));
}

const SafeguardRule* Catalog::find_rule(std::string_view rule_id) const {
    for (const auto& rule : rules_) {
        if (rule.rule_id == rule_id) {
            return &rule;
        }
    }
    return nullptr;
}

std::optional<std::string_view> Catalog::recommendation(std::string_view rule_id) const {
    const auto it = recommendations_.find(std::string(rule_id));
    if (it == recommendations_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Catalog::checkable_count() const {
    std::size_t count = 0;
    for (const auto& rule : rules_) {
        count += rule.checkable() ? 1 : 0;
    }
    return count;
}

std::size_t Catalog::sub_rule_count() const {
    std::size_t count = 0;
    for (const auto& rule : rules_) {
        count += rule.sub_rules.size();
    }
    return count;
}

std::size_t Catalog::pattern_count() const {
    std::size_t count = 0;
    for (const auto& rule : rules_) {
        for (const auto& sub : rule.sub_rules) {
            count += sub.patterns.size();
        }
    }
    return count;
}

Catalog load_catalog(std::string_view source_text) { return RulesParser{}.parse(source_text); }

std::string serialize_catalog(const Catalog& catalog) {
    std::ostringstream out;
    bool first = true;
    for (const auto& rule : catalog.rules()) {
        if (!first) {
            out << '\n';
        }
        first = false;
        out << "[rule] " << rule.rule_id << " ref=" << rule.safeguard.cfr_reference << '\n';
        if (auto advice = catalog.recommendation(rule.rule_id)) {
            out << "recommend: " << *advice << '\n';
        }
        for (const auto& sub : rule.sub_rules) {
            out << "[subrule] \"" << sub.id << "\" mode=" << to_string(sub.mode)
                << " polarity=" << to_string(sub.polarity) << '\n';
            for (const auto& pattern : sub.patterns) {
                out << "pattern: " << pattern << '\n';
            }
        }
    }
    return out.str();
}

bool is_cfr_reference(std::string_view reference) {
    static const std::regex shape(R"(164\.312\([a-z]\)(\([0-9a-z]+\))*)");
    return std::regex_match(reference.begin(), reference.end(), shape);
}

std::vector<Issue> validate_catalog(const Catalog& catalog) {
    std::vector<Issue> issues;
    std::set<std::string> rule_ids;
    for (const auto& rule : catalog.rules()) {
        if (!rule_ids.insert(rule.rule_id).second) {
            issues.push_back({Issue::Kind::duplicate_id, rule.rule_id, {}, {}, "duplicate rule id"});
        }
        if (!is_cfr_reference(rule.safeguard.cfr_reference)) {
            issues.push_back({Issue::Kind::bad_reference, rule.rule_id, {}, {},
                              "not a 164.312 reference: " + rule.safeguard.cfr_reference});
        }
        std::set<std::string> sub_ids;
        for (const auto& sub : rule.sub_rules) {
            if (!sub_ids.insert(sub.id).second) {
                issues.push_back({Issue::Kind::duplicate_id, rule.rule_id, sub.id, {}, "duplicate sub-rule id"});
            }
            if (sub.patterns.empty()) {
                issues.push_back({Issue::Kind::empty_pattern, rule.rule_id, sub.id, {}, "sub-rule has no patterns"});
            }
            for (std::size_t i = 0; i < sub.patterns.size(); ++i) {
                try {
                    compile_pattern(sub.patterns[i]);
                } catch (const PatternError& e) {
                    const auto kind = e.kind() == PatternError::Kind::empty_pattern ? Issue::Kind::empty_pattern
                                                                                    : Issue::Kind::invalid_pattern;
                    issues.push_back({kind, rule.rule_id, sub.id, i, e.what()});
                }
            }
        }
    }
    for (const auto& [rule_id, text] : catalog.recommendations()) {
        if (rule_ids.count(rule_id) == 0) {
            issues.push_back({Issue::Kind::unknown_recommendation, rule_id, {}, {},
                              "recommendation for unknown rule"});
        }
    }
    return issues;
}

} // namespace hipaa
