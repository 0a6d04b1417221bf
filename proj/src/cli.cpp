#include "hipaa/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <unistd.h>
#include <vector>

#include "CLI11.hpp"
#include "hipaa/catalog.hpp"
#include "hipaa/corpus.hpp"
#include "hipaa/errors.hpp"
#include "hipaa/ingestion.hpp"
#include "hipaa/reporting.hpp"
#include "hipaa/scanner.hpp"
#include "hipaa/verdicts.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace hipaa::cli {

namespace {

// Raised for problems the user can fix by changing the invocation.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Config {
    std::string rules_file;
    std::string profile = "paper";
    std::vector<std::string> formats;
    std::string out_dir;
    std::string decompiler;
    unsigned timeout = 300;
    bool deterministic = false;
    std::size_t workers = 0;
    std::string manifest;
    std::string stats;
    std::string input;
    std::string rules_action;
    std::string json_report;
    std::string source_dir;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) {
        throw IngestionError(IngestionError::Kind::io, "cannot write " + path.string());
    }
}

Catalog load_config_catalog(const Config& config) {
    const auto profile = parse_profile(config.profile);
    if (!profile) {
        throw UsageError("unknown profile " + config.profile);
    }
    if (config.rules_file.empty()) {
        return builtin_catalog(*profile);
    }
    Catalog catalog = load_catalog(read_file(config.rules_file));
    return *profile == Profile::paper ? catalog : apply_profile(catalog, *profile);
}

std::optional<DecompilerSpec> decompiler_spec(const Config& config) {
    std::string command = config.decompiler;
    if (command.empty()) {
        if (const char* env = std::getenv("HIPAACHECKER_DECOMPILER"); env != nullptr) {
            command = env;
        }
    }
    if (command.empty()) {
        return std::nullopt;
    }
    DecompilerSpec spec{command, std::chrono::seconds(config.timeout)};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("bad --decompiler: ") + e.what());
    }
    return spec;
}

std::vector<std::string> formats_or(const Config& config, std::string_view fallback) {
    std::vector<std::string> formats = config.formats;
    if (formats.empty()) {
        formats.emplace_back(fallback);
    }
    std::vector<std::string> unique;
    for (const std::string& f : formats) {
        if (std::find(unique.begin(), unique.end(), f) == unique.end()) {
            unique.push_back(f);
        }
    }
    return unique;
}

std::string render(const ReportBundle& bundle, std::string_view format) {
    if (format == "json") {
        return render_json(bundle);
    }
    if (format == "html") {
        return render_html(bundle);
    }
    return render_text(bundle);
}

std::string_view extension(std::string_view format) {
    return format == "text" ? "txt" : format;
}

// Writes each format to <out>/report.<ext>, or to `out` when no directory
// was given.
void emit_reports(const ReportBundle& bundle, const Config& config, std::string_view fallback, std::ostream& out) {
    for (const std::string& format : formats_or(config, fallback)) {
        const std::string text = render(bundle, format);
        if (config.out_dir.empty()) {
            out << text;
        } else {
            write_file(fs::path(config.out_dir) / ("report." + std::string(extension(format))), text);
        }
    }
}

bool is_apk_path(const std::string& path) {
    if (path.size() < 4) {
        return false;
    }
    std::string suffix = path.substr(path.size() - 4);
    std::transform(suffix.begin(), suffix.end(), suffix.begin(), [](unsigned char c) { return std::tolower(c); });
    return suffix == ".apk";
}

std::string app_id_for(const fs::path& input) {
    fs::path normal = input.lexically_normal();
    if (!normal.has_filename()) {
        normal = normal.parent_path();
    }
    const std::string id = is_apk_path(normal.string()) ? normal.stem().string() : normal.filename().string();
    return id.empty() || id == "." ? std::string("app") : id;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        path_ = fs::temp_directory_path() /
                ("hipaachecker-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

int cmd_scan(const Config& config, std::ostream& out, std::ostream& err) {
    const Catalog catalog = load_config_catalog(config);
    const fs::path input(config.input);
    std::optional<TempDir> temp;
    SourceTree tree;
    if (is_apk_path(config.input)) {
        const auto spec = decompiler_spec(config);
        if (!spec) {
            throw UsageError("scanning an APK needs --decompiler or HIPAACHECKER_DECOMPILER");
        }
        fs::path workdir;
        if (config.out_dir.empty()) {
            temp.emplace();
            workdir = temp->path();
        } else {
            workdir = fs::path(config.out_dir) / "extract";
        }
        tree = extract_apk(input, workdir, *spec);
    } else {
        tree = open_source_tree(input);
    }
    for (const std::string& warning : tree.warnings) {
        err << "warning: " << warning << '\n';
    }

    const ScanResult scan = scan_tree(tree, catalog, ScanOptions{config.workers});
    AppVerdict verdict = evaluate(scan, catalog, app_id_for(input));
    const int status = exit_code(verdict);

    ReportMetadata metadata;
    metadata.scanned_root = config.input;
    metadata.deterministic = config.deterministic;
    const ReportBundle bundle = make_bundle(scan, std::move(verdict), metadata, source_access_for(tree));
    emit_reports(bundle, config, "text", out);
    return status;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(text);
    }
    std::string quoted = "\"";
    for (char c : text) {
        quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return quoted + '"';
}

int cmd_batch(const Config& config, std::ostream& out, std::ostream& err) {
    if (config.manifest.empty() || config.out_dir.empty()) {
        throw UsageError("batch needs --manifest and --out");
    }
    const Catalog catalog = load_config_catalog(config);
    std::vector<AppEntry> entries = load_manifest(read_file(config.manifest));
    const fs::path base = fs::path(config.manifest).parent_path();
    for (AppEntry& entry : entries) {
        if (entry.path.is_relative()) {
            entry.path = base / entry.path;
        }
    }
    const auto spec = decompiler_spec(config);
    const bool has_apk =
        std::any_of(entries.begin(), entries.end(), [](const AppEntry& e) { return e.kind == AppKind::apk; });
    if (has_apk && !spec) {
        throw UsageError("the manifest lists APKs; pass --decompiler or set HIPAACHECKER_DECOMPILER");
    }

    BatchOptions options;
    options.workers = config.workers;
    options.deterministic = config.deterministic;
    const fs::path out_dir(config.out_dir);
    BatchResult result = run_batch(entries, catalog, out_dir, spec, options);

    std::string failures = "app_id,error\n";
    for (const AppFailure& failure : result.failures) {
        err << "error: " << failure.app_id << ": " << failure.error << '\n';
        failures += csv_field(failure.app_id) + ',' + csv_field(failure.error) + '\n';
    }
    write_file(out_dir / "failures.csv", failures);

    const CorpusStats stats = compute_stats(result.verdicts, result.records, entries, result.failures);
    const fs::path stats_path = config.stats.empty() ? out_dir / "stats.csv" : fs::path(config.stats);
    write_file(stats_path, stats_to_csv(stats));
    out << "scanned " << stats.app_count << " of " << entries.size() << " apps, " << result.failures.size()
        << " failed; statistics in " << stats_path.string() << '\n';
    return kExitCompliant;
}

nlohmann::ordered_json catalog_json(const Catalog& catalog, std::string_view profile) {
    nlohmann::ordered_json root;
    root["profile"] = profile;
    root["safeguards"] = catalog.rules().size();
    root["checkable_rules"] = catalog.checkable_count();
    root["sub_rules"] = catalog.sub_rule_count();
    root["patterns"] = catalog.pattern_count();
    root["checksum"] = catalog.checksum();
    nlohmann::ordered_json rules = nlohmann::ordered_json::array();
    for (const SafeguardRule& rule : catalog.rules()) {
        nlohmann::ordered_json entry;
        entry["rule_id"] = rule.rule_id;
        entry["cfr_reference"] = rule.safeguard.cfr_reference;
        entry["safeguard"] = rule.safeguard.safeguard_name;
        entry["checkable"] = rule.checkable();
        const auto recommendation = catalog.recommendation(rule.rule_id);
        entry["recommendation"] =
            recommendation ? nlohmann::ordered_json(std::string(*recommendation)) : nlohmann::ordered_json(nullptr);
        nlohmann::ordered_json subs = nlohmann::ordered_json::array();
        for (const SubRule& sub : rule.sub_rules) {
            nlohmann::ordered_json s;
            s["sub_rule_id"] = sub.id;
            s["mode"] = to_string(sub.mode);
            s["polarity"] = to_string(sub.polarity);
            s["patterns"] = sub.patterns;
            subs.push_back(std::move(s));
        }
        entry["subrules"] = std::move(subs);
        rules.push_back(std::move(entry));
    }
    root["rules"] = std::move(rules);
    return root;
}

std::string catalog_table(const Catalog& catalog) {
    std::ostringstream out;
    std::size_t width = 0;
    for (const SafeguardRule& rule : catalog.rules()) {
        width = std::max(width, rule.rule_id.size());
    }
    for (const SafeguardRule& rule : catalog.rules()) {
        std::size_t patterns = 0;
        for (const SubRule& sub : rule.sub_rules) {
            patterns += sub.patterns.size();
        }
        std::string ref = rule.safeguard.cfr_reference;
        ref.resize(std::max<std::size_t>(ref.size(), 24), ' ');
        std::string id = rule.rule_id;
        id.resize(width, ' ');
        out << ref << "  " << id << "  ";
        if (rule.checkable()) {
            out << rule.sub_rules.size() << " sub-rules, " << patterns << " patterns\n";
        } else {
            out << "not checkable\n";
        }
    }
    out << catalog.rules().size() << " safeguards, " << catalog.checkable_count() << " checkable rules, "
        << catalog.sub_rule_count() << " sub-rules, " << catalog.pattern_count() << " patterns\n"
        << "checksum " << catalog.checksum() << '\n';
    return out.str();
}

int cmd_rules(const Config& config, std::ostream& out) {
    const Catalog catalog = load_config_catalog(config);
    std::string text;
    int status = kExitCompliant;
    const auto formats = formats_or(config, "text");
    if (formats.size() != 1 || formats.front() == "html") {
        throw UsageError("rules takes one --format, text or json");
    }
    const bool json = formats.front() == "json";
    if (config.rules_action == "list") {
        text = json ? catalog_json(catalog, config.profile).dump(2) + "\n" : catalog_table(catalog);
    } else if (config.rules_action == "validate") {
        const auto issues = validate_catalog(catalog);
        status = issues.empty() ? kExitCompliant : kExitNonCompliant;
        if (json) {
            nlohmann::ordered_json list = nlohmann::ordered_json::array();
            for (const Issue& issue : issues) {
                nlohmann::ordered_json entry;
                entry["kind"] = to_string(issue.kind);
                entry["rule_id"] = issue.rule_id;
                entry["sub_rule_id"] = issue.sub_rule_id;
                entry["pattern_index"] =
                    issue.pattern_index ? nlohmann::ordered_json(*issue.pattern_index) : nlohmann::ordered_json(nullptr);
                entry["message"] = issue.message;
                list.push_back(std::move(entry));
            }
            text = list.dump(2) + "\n";
        } else {
            std::ostringstream lines;
            for (const Issue& issue : issues) {
                lines << to_string(issue.kind) << ' ' << issue.rule_id;
                if (!issue.sub_rule_id.empty()) {
                    lines << " / " << issue.sub_rule_id;
                }
                if (issue.pattern_index) {
                    lines << " #" << *issue.pattern_index;
                }
                lines << ": " << issue.message << '\n';
            }
            lines << (issues.empty() ? "catalog is valid\n" : std::to_string(issues.size()) + " issue(s)\n");
            text = lines.str();
        }
    } else {
        text = json ? catalog_json(catalog, config.profile).dump(2) + "\n" : serialize_catalog(catalog);
    }
    if (config.out_dir.empty()) {
        out << text;
    } else {
        write_file(fs::path(config.out_dir) / ("rules." + std::string(json ? "json" : "txt")), text);
    }
    return status;
}

int cmd_render(const Config& config, std::ostream& out) {
    ReportBundle bundle;
    try {
        bundle = parse_json_report(read_file(config.json_report));
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    bundle.metadata.deterministic = config.deterministic || bundle.metadata.deterministic;
    if (!config.source_dir.empty()) {
        bundle.source_access = source_access_for_directory(config.source_dir);
    }
    emit_reports(bundle, config, "html", out);
    return kExitCompliant;
}

void add_common(CLI::App& app, Config& config) {
    app.add_option("--rules", config.rules_file, "Rules file replacing the builtin catalog")->check(CLI::ExistingFile);
    app.add_option("--profile", config.profile, "Catalog profile")
        ->check(CLI::IsMember({"paper", "strict"}))
        ->capture_default_str();
    app.add_option("--format", config.formats, "Output format; repeatable")
        ->check(CLI::IsMember({"json", "html", "text"}))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--out", config.out_dir, "Output directory");
}

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    Config config;
    CLI::App app{"Checks Android app sources against the HIPAA technical safeguards (45 CFR 164.312)",
                 "hipaachecker"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    CLI::App* scan = app.add_subcommand("scan", "Scan a source directory or an APK");
    scan->add_option("path", config.input, "Source directory or .apk file")->required();
    add_common(*scan, config);
    scan->add_option("--decompiler", config.decompiler, "Decompiler command containing {apk} and {out}");
    scan->add_option("--timeout", config.timeout, "Decompiler timeout in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    scan->add_flag("--deterministic", config.deterministic, "Fixed timestamp for reproducible reports");
    scan->add_option("--workers", config.workers, "Scanner threads")->check(CLI::PositiveNumber);

    CLI::App* batch = app.add_subcommand("batch", "Scan every app listed in a manifest");
    add_common(*batch, config);
    batch->add_option("--manifest", config.manifest, "CSV with app_id,category,kind,path")
        ->required()
        ->check(CLI::ExistingFile);
    batch->add_option("--stats", config.stats, "Statistics CSV (default <out>/stats.csv)");
    batch->add_option("--decompiler", config.decompiler, "Decompiler command containing {apk} and {out}");
    batch->add_option("--timeout", config.timeout, "Decompiler timeout in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    batch->add_flag("--deterministic", config.deterministic, "Fixed timestamp for reproducible reports");
    batch->add_option("--workers", config.workers, "Apps scanned concurrently")->check(CLI::PositiveNumber);

    CLI::App* rules = app.add_subcommand("rules", "List, validate or export the catalog");
    rules->add_option("action", config.rules_action, "list, validate or export")
        ->required()
        ->check(CLI::IsMember({"list", "validate", "export"}));
    add_common(*rules, config);

    CLI::App* render_cmd = app.add_subcommand("render", "Re-render a JSON report");
    render_cmd->add_option("--json", config.json_report, "Report produced by scan --format json")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(*render_cmd, config);
    render_cmd->add_option("--source", config.source_dir, "Source root for context lines")
        ->check(CLI::ExistingDirectory);
    render_cmd->add_flag("--deterministic", config.deterministic, "Fixed timestamp for reproducible reports");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failed = &app;
        for (const CLI::App* sub : app.get_subcommands()) {
            failed = sub;
        }
        err << failed->help();
        return kExitUsage;
    }

    try {
        if (scan->parsed()) {
            return cmd_scan(config, out, err);
        }
        if (batch->parsed()) {
            return cmd_batch(config, out, err);
        }
        if (rules->parsed()) {
            return cmd_rules(config, out);
        }
        return cmd_render(config, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CatalogError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PatternError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ManifestError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IngestionError& e) {
        err << "error: " << e.what() << '\n';
        if (!e.detail().empty()) {
            err << e.detail();
            if (e.detail().back() != '\n') {
                err << '\n';
            }
        }
        return kExitIngestion;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIngestion;
    }
}

} // namespace hipaa::cli
