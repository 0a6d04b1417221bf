#include <cctype>
#include <map>
#include <sstream>

#include "hipaa/percent.hpp"
#include "hipaa/reporting.hpp"

namespace hipaa {

namespace {

constexpr std::string_view kStyle = R"css(
body { font-family: -apple-system, "Segoe UI", Helvetica, Arial, sans-serif; margin: 2rem; color: #1f2328; }
h1 { font-size: 1.5rem; }
dl.meta { display: grid; grid-template-columns: max-content auto; gap: .2rem 1rem; font-size: .9rem; }
dl.meta dt { font-weight: 600; }
table { border-collapse: collapse; margin: .5rem 0; }
th, td { border: 1px solid #d0d7de; padding: .25rem .6rem; text-align: left; vertical-align: top; }
section.rule { border-top: 2px solid #d0d7de; margin-top: 1.5rem; padding-top: .5rem; }
.glyph { display: inline-block; width: 1.4em; text-align: center; font-weight: 700; }
.satisfied .glyph, td.satisfied { color: #1a7f37; }
.unsatisfied .glyph, td.unsatisfied { color: #cf222e; }
.not_checkable .glyph, td.not_checkable { color: #6e7781; }
.recommendation { background: #fff8c5; border-left: 4px solid #d4a72c; padding: .4rem .8rem; }
.advisory { color: #9a6700; font-size: .8rem; margin-left: .4rem; }
article.match { margin: .8rem 0 .8rem 1rem; }
article.match h3 { font-size: .95rem; font-weight: 500; margin: 0 0 .2rem; }
pre.context { background: #f6f8fa; padding: .4rem; overflow-x: auto; margin: 0; }
pre.context .ln { display: inline-block; min-width: 4ch; color: #6e7781; user-select: none; }
pre.context mark.hit { background: #ffd33d; display: inline-block; width: 100%; }
.unavailable { color: #6e7781; font-style: italic; }
)css";

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        case '\'':
            out += "&#39;";
            break;
        default:
            out.push_back(c);
        }
    }
    return out;
}

std::string_view glyph(Status status) {
    switch (status) {
    case Status::satisfied:
        return "&#10004;";
    case Status::unsatisfied:
        return "&#10008;";
    case Status::not_checkable:
        return "&#8211;";
    }
    return "?";
}

std::string_view label(Status status) {
    switch (status) {
    case Status::satisfied:
        return "satisfied";
    case Status::unsatisfied:
        return "not satisfied";
    case Status::not_checkable:
        return "not checkable";
    }
    return "";
}

// Element ids may not contain spaces.
std::string anchor_id(std::string_view text) {
    std::string id;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        id.push_back(std::isalnum(u) != 0 || c == '-' || c == '_' ? c : '_');
    }
    return id;
}

void render_context(std::ostringstream& out, const ReportBundle& bundle, const MatchRecord& record) {
    std::optional<std::vector<ContextLine>> context;
    if (bundle.source_access) {
        context = bundle.source_access(record.file, record.line_number, kContextRadius);
    }
    out << "<pre class=\"context\">";
    if (!context) {
        out << "<mark class=\"hit\"><span class=\"ln\">" << record.line_number << "</span>" << escape(record.snippet)
            << "</mark></pre>\n<p class=\"unavailable\">Source context unavailable; showing the matched line only.</p>\n";
        return;
    }
    for (const ContextLine& line : *context) {
        const bool hit = line.number == record.line_number;
        if (hit) {
            out << "<mark class=\"hit\">";
        }
        out << "<span class=\"ln\">" << line.number << "</span>" << escape(line.text);
        if (hit) {
            out << "</mark>";
        }
        out << '\n';
    }
    out << "</pre>\n";
}

} // namespace

std::string render_html(const ReportBundle& bundle) {
    const AppVerdict& verdict = bundle.verdict;
    std::map<std::pair<std::string_view, std::string_view>, std::vector<const MatchRecord*>> by_sub_rule;
    for (const MatchRecord& record : bundle.records) {
        by_sub_rule[{record.rule_id, record.sub_rule_id}].push_back(&record);
    }
    const std::string timestamp =
        bundle.metadata.deterministic ? std::string(kDeterministicTimestamp) : bundle.metadata.timestamp;

    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
        << "<title>HIPAA technical safeguards report: " << escape(verdict.app_id) << "</title>\n"
        << "<style>" << kStyle << "</style>\n</head>\n<body>\n";

    out << "<header>\n<h1>HIPAA technical safeguards report</h1>\n<dl class=\"meta\">\n"
        << "<dt>App</dt><dd>" << escape(verdict.app_id) << "</dd>\n"
        << "<dt>Scanned root</dt><dd>" << escape(bundle.metadata.scanned_root) << "</dd>\n"
        << "<dt>Files scanned</dt><dd>" << bundle.files_scanned << "</dd>\n"
        << "<dt>Lines scanned</dt><dd>" << bundle.lines_scanned << "</dd>\n"
        << "<dt>Generated</dt><dd>" << escape(timestamp) << "</dd>\n"
        << "<dt>Tool version</dt><dd>" << escape(bundle.metadata.tool_version) << "</dd>\n"
        << "<dt>Catalog checksum</dt><dd><code>" << escape(bundle.catalog_checksum) << "</code></dd>\n"
        << "</dl>\n";
    const Percentage share{verdict.satisfied_count, verdict.checkable_count};
    out << "<p class=\"summary\">Satisfied " << verdict.satisfied_count << " of " << verdict.checkable_count
        << " checkable safeguards (" << share.to_string() << "%).</p>\n</header>\n";

    out << "<nav>\n<table class=\"overview\">\n<tr><th></th><th>Reference</th><th>Rule</th><th>Status</th></tr>\n";
    for (const RuleStatus& rule : verdict.rules) {
        const auto status = to_string(rule.status);
        out << "<tr class=\"" << status << "\"><td class=\"" << status << "\"><span class=\"glyph\">"
            << glyph(rule.status) << "</span></td><td>" << escape(rule.safeguard.cfr_reference)
            << "</td><td><a href=\"#rule-" << anchor_id(rule.rule_id) << "\">" << escape(rule.rule_id)
            << "</a></td><td>" << label(rule.status) << "</td></tr>\n";
    }
    out << "</table>\n</nav>\n";

    std::size_t match_index = 0;
    for (const RuleStatus& rule : verdict.rules) {
        const auto status = to_string(rule.status);
        out << "<section class=\"rule " << status << "\" id=\"rule-" << anchor_id(rule.rule_id) << "\">\n"
            << "<h2><span class=\"glyph\" title=\"" << label(rule.status) << "\">" << glyph(rule.status)
            << "</span> " << escape(rule.safeguard.cfr_reference) << " " << escape(rule.rule_id) << "</h2>\n";
        if (!rule.safeguard.safeguard_name.empty()) {
            out << "<p class=\"safeguard\"><strong>" << escape(rule.safeguard.safeguard_name) << "</strong>";
            if (!rule.safeguard.description.empty()) {
                out << ": " << escape(rule.safeguard.description);
            }
            out << "</p>\n";
        }
        if (rule.status == Status::not_checkable) {
            out << "<p class=\"unavailable\">No detection patterns exist for this safeguard.</p>\n";
        }
        if (rule.status == Status::unsatisfied && rule.recommendation) {
            out << "<p class=\"recommendation\"><strong>Recommendation:</strong> " << escape(*rule.recommendation)
                << "</p>\n";
        }
        if (!rule.sub_statuses.empty()) {
            out << "<table class=\"subrules\">\n<tr><th>Sub-rule</th><th>Status</th><th>Matched lines</th></tr>\n";
            for (const SubRuleStatus& sub : rule.sub_statuses) {
                out << "<tr><td>" << escape(sub.sub_rule_id);
                if (sub.polarity == Polarity::advisory && sub.match_count > 0) {
                    out << "<span class=\"advisory\">advisory</span>";
                }
                out << "</td><td class=\"" << to_string(sub.status) << "\">" << glyph(sub.status) << ' '
                    << label(sub.status) << "</td><td>" << sub.match_count << "</td></tr>\n";
            }
            out << "</table>\n";
        }
        for (const SubRuleStatus& sub : rule.sub_statuses) {
            const auto it = by_sub_rule.find({rule.rule_id, sub.sub_rule_id});
            if (it == by_sub_rule.end()) {
                continue;
            }
            for (const MatchRecord* record : it->second) {
                ++match_index;
                out << "<article class=\"match\" id=\"match-" << match_index << "\">\n<h3><a href=\"#match-"
                    << match_index << "\">#" << match_index << "</a> " << escape(sub.sub_rule_id) << " &middot; <code>"
                    << escape(record->file) << ':' << record->line_number << ':' << record->column
                    << "</code> &middot; pattern <code>" << escape(record->pattern_text) << "</code>";
                if (record->occurrences > 1) {
                    out << " &middot; " << record->occurrences << " occurrences on this line";
                }
                out << "</h3>\n";
                render_context(out, bundle, *record);
                out << "</article>\n";
            }
        }
        out << "</section>\n";
    }
    out << "</body>\n</html>\n";
    return out.str();
}

} // namespace hipaa
