#include <gtest/gtest.h>

#include <cstdlib>

#include "hipaa/catalog.hpp"
#include "hipaa/reporting.hpp"
#include "json.hpp"
#include "test_util.hpp"

using testutil::count_substr;
using testutil::run_cli;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

std::string all_rules() { return (testutil::fixtures_dir() / "app_all_rules").string(); }
std::string partial() { return (testutil::fixtures_dir() / "app_partial").string(); }

class EnvVar {
public:
    EnvVar(const char* name, const std::string& value) : name_(name) { ::setenv(name, value.c_str(), 1); }
    ~EnvVar() { ::unsetenv(name_); }

private:
    const char* name_;
};

std::size_t json_match_count(const std::string& report) {
    std::size_t n = 0;
    const auto doc = nlohmann::json::parse(report);
    for (const auto& rule : doc["rules"]) {
        for (const auto& sub : rule["subrules"]) {
            n += sub["matches"].size();
        }
    }
    return n;
}

} // namespace

TEST(Cli, ScanCompliantText) {
    const auto r = run_cli({"scan", all_rules(), "--format", "text"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(count_substr(r.out, "[PASS]"), 11u);
    EXPECT_EQ(count_substr(r.out, "[N/A]"), 1u);
    EXPECT_NE(r.out.find("satisfied 11/11 checkable"), std::string::npos);
}

TEST(Cli, DefaultFormatIsText) {
    EXPECT_EQ(run_cli({"scan", all_rules()}).out, run_cli({"scan", all_rules(), "--format", "text"}).out);
}

TEST(Cli, ScanEmptyDirIsNonCompliant) {
    TempDir dir;
    const auto r = run_cli({"scan", dir.path().string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(count_substr(r.out, "[FAIL]"), 11u);
}

TEST(Cli, ScanPartial) {
    const auto r = run_cli({"scan", partial(), "--format", "json", "--deterministic"});
    EXPECT_EQ(r.status, 1);
    const auto report = nlohmann::json::parse(r.out);
    EXPECT_EQ(report["app_id"], "app_partial");
    EXPECT_EQ(report["timestamp"], "1970-01-01T00:00:00Z");
    for (const auto& rule : report["rules"]) {
        const bool firebase = rule["rule_id"] == "EPHI_authentication" || rule["rule_id"] == "EPHI_data_integrity";
        EXPECT_EQ(rule["status"] == "satisfied", firebase) << rule["rule_id"];
    }
}

TEST(Cli, ScanMissingPathIsIngestionError) {
    const auto r = run_cli({"scan", "/nonexistent/hipaa/tree"});
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, OutWritesEveryFormat) {
    TempDir dir;
    const auto r = run_cli({"scan", all_rules(), "--format", "json", "--format", "html", "--format", "text", "--out",
                            dir.path().string(), "--deterministic"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const std::string json = testutil::read_file(dir / "report.json");
    const std::string html = testutil::read_file(dir / "report.html");
    EXPECT_EQ(json_match_count(json), count_substr(html, "<article class=\"match\""));
    EXPECT_NE(testutil::read_file(dir / "report.txt").find("[PASS]"), std::string::npos);
}

TEST(Cli, MultipleFormatsToStdout) {
    const auto r = run_cli({"scan", partial(), "--format", "text", "--format", "json", "--deterministic"});
    EXPECT_EQ(r.out.find("[FAIL]"), 0u);
    EXPECT_NE(r.out.find("\"tool_version\""), std::string::npos);
}

TEST(Cli, DeterministicAcrossWorkers) {
    std::string first_json, first_html;
    for (const char* workers : {"1", "4"}) {
        TempDir dir;
        const auto r = run_cli({"scan", all_rules(), "--format", "json", "--format", "html", "--out",
                                dir.path().string(), "--deterministic", "--workers", workers});
        ASSERT_EQ(r.status, 0) << r.err;
        const std::string json = testutil::read_file(dir / "report.json");
        const std::string html = testutil::read_file(dir / "report.html");
        if (first_json.empty()) {
            first_json = json;
            first_html = html;
        } else {
            EXPECT_EQ(json, first_json);
            EXPECT_EQ(html, first_html);
        }
    }
}

TEST(Cli, StrictProfileFlagsWeakCrypto) {
    TempDir dir;
    testutil::write_file(dir / "A.java", "Cipher c = Cipher.getInstance(\"DES/CBC/PKCS5Padding\");\n");
    const auto paper = nlohmann::json::parse(run_cli({"scan", dir.path().string(), "--format", "json"}).out);
    const auto strict = nlohmann::json::parse(
        run_cli({"scan", dir.path().string(), "--format", "json", "--profile", "strict"}).out);
    EXPECT_EQ(paper["rules"][4]["status"], "satisfied");
    EXPECT_EQ(strict["rules"][4]["status"], "unsatisfied");
    EXPECT_TRUE(paper["advisory_findings"].empty());
    EXPECT_FALSE(strict["advisory_findings"].empty());
    EXPECT_NE(paper["catalog_checksum"], strict["catalog_checksum"]);
}

TEST(Cli, CustomRulesFile) {
    TempDir dir;
    testutil::write_file(dir / "rules.txt", "[rule] Unique_Id ref=164.312(a)(2)(i)\n"
                                            "[subrule] \"PK\"\n"
                                            "pattern: PRIMARY KEY\n");
    testutil::write_file(dir / "src" / "A.java", "String s = \"PRIMARY KEY\";\n");
    const auto r = run_cli({"scan", (dir / "src").string(), "--rules", (dir / "rules.txt").string()});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "[PASS] 164.312(a)(2)(i) Unique_Id\nsatisfied 1/1 checkable\n");
}

TEST(Cli, RulesListText) {
    const auto r = run_cli({"rules", "list"});
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("12 safeguards, 11 checkable rules, 31 sub-rules, 70 patterns\n"), std::string::npos);
    EXPECT_NE(r.out.find("checksum " + hipaa::builtin_catalog().checksum()), std::string::npos);
}

TEST(Cli, RulesListJson) {
    const auto r = run_cli({"rules", "list", "--format", "json"});
    ASSERT_EQ(r.status, 0);
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["safeguards"], 12);
    EXPECT_EQ(doc["checkable_rules"], 11);
    EXPECT_EQ(doc["sub_rules"], 31);
    EXPECT_EQ(doc["patterns"], 70);
    EXPECT_EQ(doc["rules"].size(), 12u);
    EXPECT_EQ(doc["rules"][2]["checkable"], false);

    const auto strict = nlohmann::json::parse(run_cli({"rules", "list", "--format", "json", "--profile", "strict"}).out);
    EXPECT_EQ(strict["profile"], "strict");
    EXPECT_EQ(strict["patterns"], 71);
}

TEST(Cli, RulesExportRoundTrips) {
    TempDir dir;
    const auto r = run_cli({"rules", "export", "--out", dir.path().string()});
    ASSERT_EQ(r.status, 0) << r.err;
    const std::string exported = testutil::read_file(dir / "rules.txt");
    EXPECT_EQ(hipaa::load_catalog(exported).checksum(), hipaa::builtin_catalog().checksum());
    const auto again = run_cli({"rules", "list", "--rules", (dir / "rules.txt").string()});
    EXPECT_NE(again.out.find("70 patterns"), std::string::npos);
}

TEST(Cli, RulesValidate) {
    EXPECT_EQ(run_cli({"rules", "validate"}).status, 0);
    TempDir dir;
    testutil::write_file(dir / "bad.txt", "[rule] X ref=999\n"
                                          "[subrule] \"S\"\n"
                                          "pattern: .*foo\n");
    const auto r = run_cli({"rules", "validate", "--rules", (dir / "bad.txt").string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("BadReference X"), std::string::npos);
    EXPECT_NE(r.out.find("InvalidPattern X / S #0"), std::string::npos);
    const auto json = run_cli({"rules", "validate", "--rules", (dir / "bad.txt").string(), "--format", "json"});
    EXPECT_EQ(nlohmann::json::parse(json.out).size(), 2u);

    // The same catalog cannot drive a scan.
    EXPECT_EQ(run_cli({"scan", all_rules(), "--rules", (dir / "bad.txt").string()}).status, 2);
}

TEST(Cli, MalformedRulesFileIsUsageError) {
    TempDir dir;
    testutil::write_file(dir / "bad.txt", "nonsense\n");
    const auto r = run_cli({"rules", "list", "--rules", (dir / "bad.txt").string()});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    const std::vector<std::vector<std::string>> cases = {
        {},
        {"frobnicate"},
        {"scan"},
        {"scan", all_rules(), "--format", "pdf"},
        {"scan", all_rules(), "--profile", "lenient"},
        {"scan", all_rules(), "--workers", "0"},
        {"scan", all_rules(), "--timeout", "-1"},
        {"scan", all_rules(), "--bogus"},
        {"rules", "delete"},
        {"rules", "list", "--format", "html"},
        {"batch"},
        {"render"},
        {"render", "--json", "/nonexistent.json"},
    };
    for (const auto& args : cases) {
        const auto r = run_cli(args);
        EXPECT_EQ(r.status, 2) << testing::PrintToString(args);
        EXPECT_FALSE(r.err.empty()) << testing::PrintToString(args);
    }
}

TEST(Cli, HelpAndVersion) {
    const auto help = run_cli({"--help"});
    EXPECT_EQ(help.status, 0);
    EXPECT_NE(help.out.find("scan"), std::string::npos);
    const auto version = run_cli({"--version"});
    EXPECT_EQ(version.status, 0);
    EXPECT_NE(version.out.find(std::string(hipaa::tool_version())), std::string::npos);
}

TEST(Cli, ApkWithoutDecompilerIsUsageError) {
    TempDir dir;
    testutil::make_sample_apk(dir / "app.apk");
    ::unsetenv("HIPAACHECKER_DECOMPILER");
    const auto r = run_cli({"scan", (dir / "app.apk").string()});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("decompiler"), std::string::npos);
}

TEST(Cli, BadDecompilerTemplateIsUsageError) {
    TempDir dir;
    testutil::make_sample_apk(dir / "app.apk");
    EXPECT_EQ(run_cli({"scan", (dir / "app.apk").string(), "--decompiler", "jadx {apk}"}).status, 2);
}

TEST(Cli, ApkViaStubMatchesDirectScan) {
    TempDir dir;
    testutil::make_sample_apk(dir / "App.APK");
    const auto apk = run_cli({"scan", (dir / "App.APK").string(), "--decompiler",
                              testutil::decompiler_command("stub_decompiler.sh"), "--out", (dir / "out").string(),
                              "--format", "json", "--deterministic"});
    ASSERT_EQ(apk.status, 0) << apk.err;
    const auto report = nlohmann::json::parse(testutil::read_file(dir / "out" / "report.json"));
    EXPECT_EQ(report["app_id"], "App");
    const auto direct = nlohmann::json::parse(run_cli({"scan", all_rules(), "--format", "json"}).out);
    ASSERT_EQ(report["rules"].size(), direct["rules"].size());
    for (std::size_t i = 0; i < direct["rules"].size(); ++i) {
        EXPECT_EQ(report["rules"][i]["status"], direct["rules"][i]["status"]);
    }
    EXPECT_TRUE(fs::is_directory(dir / "out" / "extract"));
}

TEST(Cli, DecompilerFromEnvironment) {
    TempDir dir;
    testutil::make_sample_apk(dir / "app.apk");
    EnvVar env("HIPAACHECKER_DECOMPILER", testutil::decompiler_command("stub_decompiler.sh"));
    EXPECT_EQ(run_cli({"scan", (dir / "app.apk").string()}).status, 0);
}

TEST(Cli, DecompilerFailureIsIngestionError) {
    TempDir dir;
    testutil::make_sample_apk(dir / "app.apk");
    const auto r =
        run_cli({"scan", (dir / "app.apk").string(), "--decompiler", testutil::decompiler_command("failing_decompiler.sh")});
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.err.find("dex parse error"), std::string::npos);
}

TEST(Cli, DecompilerTimeout) {
    TempDir dir;
    testutil::make_sample_apk(dir / "app.apk");
    const auto r = run_cli({"scan", (dir / "app.apk").string(), "--decompiler",
                            testutil::decompiler_command("slow_decompiler.sh"), "--timeout", "1"});
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.err.find("timed out"), std::string::npos) << r.err;
}

TEST(Cli, UnreadableApkIsIngestionError) {
    TempDir dir;
    testutil::write_file(dir / "junk.apk", "this is not a zip archive");
    const auto r = run_cli({"scan", (dir / "junk.apk").string(), "--decompiler",
                            testutil::decompiler_command("stub_decompiler.sh")});
    EXPECT_EQ(r.status, 3);
}

TEST(Cli, Batch) {
    TempDir dir;
    const fs::path corpus = testutil::fixtures_dir() / "corpus10";
    const auto r = run_cli({"batch", "--manifest", (corpus / "manifest.csv").string(), "--out",
                            dir.path().string(), "--workers", "2", "--deterministic"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("scanned 10 of 10 apps, 0 failed"), std::string::npos);
    EXPECT_EQ(testutil::read_file(dir / "stats.csv"), testutil::read_file(corpus / "expected_stats.csv"));
    EXPECT_EQ(testutil::read_file(dir / "failures.csv"), "app_id,error\n");
    EXPECT_TRUE(fs::is_regular_file(dir / "m1" / "report.json"));
    EXPECT_EQ(nlohmann::json::parse(testutil::read_file(dir / "m1" / "report.json"))["timestamp"],
              "1970-01-01T00:00:00Z");
}

TEST(Cli, BatchStatsPathFailuresAndApks) {
    TempDir dir;
    testutil::make_sample_apk(dir / "in" / "a.apk");
    testutil::write_file(dir / "in" / "b" / "B.java", "String s = \"PRIMARY KEY\";\n");
    testutil::write_file(dir / "in" / "manifest.csv", "app_id,category,kind,path\n"
                                                      "a,medical,apk,a.apk\n"
                                                      "b,health_fitness,source,b\n"
                                                      "c,other,source,missing\n");
    const std::string manifest = (dir / "in" / "manifest.csv").string();

    const auto no_decompiler = run_cli({"batch", "--manifest", manifest, "--out", (dir / "x").string()});
    EXPECT_EQ(no_decompiler.status, 2);

    const auto r = run_cli({"batch", "--manifest", manifest, "--out", (dir / "out").string(), "--stats",
                            (dir / "s.csv").string(), "--decompiler", testutil::decompiler_command("stub_decompiler.sh"),
                            "--timeout", "30"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("scanned 2 of 3 apps, 1 failed"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "out" / "stats.csv"));
    const std::string stats = testutil::read_file(dir / "s.csv");
    EXPECT_NE(stats.find("prevalence,,Unique_Id,100.0\n"), std::string::npos);
    EXPECT_NE(stats.find("prevalence,,EPHI_Audit_Control,50.0\n"), std::string::npos);
    const std::string failures = testutil::read_file(dir / "out" / "failures.csv");
    EXPECT_EQ(failures.rfind("app_id,error\nc,", 0), 0u);
    EXPECT_NE(r.err.find("error: c:"), std::string::npos);
}

TEST(Cli, BatchBadManifest) {
    TempDir dir;
    testutil::write_file(dir / "m.csv", "id,path\n");
    EXPECT_EQ(run_cli({"batch", "--manifest", (dir / "m.csv").string(), "--out", (dir / "o").string()}).status, 2);
}

TEST(Cli, RenderFromJson) {
    TempDir dir;
    ASSERT_EQ(run_cli({"scan", all_rules(), "--format", "json", "--out", dir.path().string(), "--deterministic"}).status,
              0);
    const std::string json = (dir / "report.json").string();

    const auto html = run_cli({"render", "--json", json});
    EXPECT_EQ(html.status, 0) << html.err;
    EXPECT_NE(html.out.find("Source context unavailable"), std::string::npos);

    const auto with_source = run_cli({"render", "--json", json, "--source", all_rules(), "--deterministic"});
    EXPECT_EQ(with_source.out.find("Source context unavailable"), std::string::npos);
    EXPECT_EQ(count_substr(with_source.out, "<article class=\"match\""), json_match_count(testutil::read_file(json)));

    const auto text = run_cli({"render", "--json", json, "--format", "text"});
    EXPECT_EQ(text.out, run_cli({"scan", all_rules()}).out);

    const auto again = run_cli({"render", "--json", json, "--format", "json", "--out", (dir / "r").string()});
    EXPECT_EQ(again.status, 0);
    EXPECT_EQ(testutil::read_file(dir / "r" / "report.json"), testutil::read_file(json));
}

TEST(Cli, RenderMatchesScanHtml) {
    TempDir dir;
    ASSERT_EQ(run_cli({"scan", all_rules(), "--format", "json", "--format", "html", "--out", dir.path().string(),
                       "--deterministic"})
                  .status,
              0);
    const auto rendered = run_cli({"render", "--json", (dir / "report.json").string(), "--source", all_rules()});
    EXPECT_EQ(rendered.out, testutil::read_file(dir / "report.html"));
}

TEST(Cli, RenderMalformedJson) {
    TempDir dir;
    testutil::write_file(dir / "r.json", "{\"not\": \"a report\"}");
    EXPECT_EQ(run_cli({"render", "--json", (dir / "r.json").string()}).status, 2);
}

TEST(Cli, BatchWithNoScannedApp) {
    TempDir dir;
    testutil::write_file(dir / "m.csv", "app_id,category,kind,path\na,medical,source,nope\n");
    const auto r = run_cli({"batch", "--manifest", (dir / "m.csv").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.err.find("no app was scanned"), std::string::npos);
}
