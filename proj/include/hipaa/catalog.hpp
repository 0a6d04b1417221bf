#pragma once

// Safeguard / rule / sub-rule / pattern catalog.
//
// A catalog is an ordered list of rules, each tied to one HIPAA technical
// safeguard (45 CFR 164.312) and holding the sub-rules whose textual patterns
// evidence that safeguard in Android source. Catalogs are immutable once
// built; the checksum is a SHA-256 over the canonical rules-file form.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hipaa {

enum class MatchMode { any, all };
enum class Polarity { evidence, advisory };
enum class Profile { paper, strict };

std::string_view to_string(MatchMode mode);
std::string_view to_string(Polarity polarity);
std::string_view to_string(Profile profile);
std::optional<Profile> parse_profile(std::string_view text);

struct SafeguardRef {
    std::string cfr_reference;
    std::string safeguard_name;
    std::string description;

    bool operator==(const SafeguardRef&) const = default;
};

struct SubRule {
    std::string id;
    MatchMode mode = MatchMode::any;
    Polarity polarity = Polarity::evidence;
    std::vector<std::string> patterns;

    bool operator==(const SubRule&) const = default;
};

struct SafeguardRule {
    std::string rule_id;
    SafeguardRef safeguard;
    std::vector<SubRule> sub_rules;

    bool checkable() const noexcept { return !sub_rules.empty(); }
    bool operator==(const SafeguardRule&) const = default;
};

class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<SafeguardRule> rules, std::map<std::string, std::string> recommendations);

    const std::vector<SafeguardRule>& rules() const noexcept { return rules_; }
    const std::map<std::string, std::string>& recommendations() const noexcept {
        return recommendations_;
    }
    const std::string& checksum() const noexcept { return checksum_; }

    const SafeguardRule* find_rule(std::string_view rule_id) const;
    std::optional<std::string_view> recommendation(std::string_view rule_id) const;

    std::size_t checkable_count() const;
    std::size_t sub_rule_count() const;
    std::size_t pattern_count() const;

    bool operator==(const Catalog& other) const {
        return rules_ == other.rules_ && recommendations_ == other.recommendations_;
    }

private:
    std::vector<SafeguardRule> rules_;
    std::map<std::string, std::string> recommendations_;
    std::string checksum_;
};

// The twelve technical safeguards, in CFR order.
const std::vector<SafeguardRef>& technical_safeguards();

// Table entry for a CFR reference, if it is one of the twelve.
const SafeguardRef* find_safeguard(std::string_view cfr_reference);

// Catalog shipped with the tool. The paper profile is the verbatim pattern
// set; strict adds `import java.util.Base64` to EN-DE and downgrades the
// weak-mechanism sub-rules to advisory.
Catalog builtin_catalog(Profile profile = Profile::paper);

// Rules-file text equivalent to builtin_catalog(Profile::paper).
std::string_view builtin_rules_text();

// Applies a profile on top of any catalog. Sub-rules are matched by id, so
// user catalogs that reuse the builtin ids get the same adjustments.
Catalog apply_profile(const Catalog& catalog, Profile profile);

// Parses the line-oriented rules format. Throws CatalogError.
Catalog load_catalog(std::string_view source_text);

// Canonical rules-file text; load_catalog(serialize_catalog(c)) == c.
std::string serialize_catalog(const Catalog& catalog);

struct Issue {
    enum class Kind { bad_reference, empty_pattern, invalid_pattern, duplicate_id, unknown_recommendation };

    Kind kind;
    std::string rule_id;
    std::string sub_rule_id;
    std::optional<std::size_t> pattern_index;
    std::string message;
};

std::string_view to_string(Issue::Kind kind);

// Structural and pattern problems; an empty list means the catalog is usable
// by the scanner.
std::vector<Issue> validate_catalog(const Catalog& catalog);

// True when `reference` has the shape 164.312(<letter>) followed by optional
// parenthesized sub-indices.
bool is_cfr_reference(std::string_view reference);

} // namespace hipaa
