#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "hipaa/corpus.hpp"
#include "hipaa/errors.hpp"
#include "test_util.hpp"

using namespace hipaa;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

const Catalog& paper() {
    static const Catalog catalog = builtin_catalog();
    return catalog;
}

std::vector<AppEntry> corpus10_entries() {
    const fs::path root = testutil::fixtures_dir() / "corpus10";
    auto entries = load_manifest(testutil::read_file(root / "manifest.csv"));
    for (auto& entry : entries) {
        entry.path = root / entry.path;
    }
    return entries;
}

ManifestError::Kind manifest_error_kind(std::string_view csv, std::size_t& row) {
    try {
        load_manifest(csv);
    } catch (const ManifestError& e) {
        row = e.row();
        return e.kind();
    }
    ADD_FAILURE() << "no ManifestError for:\n" << csv;
    return ManifestError::Kind::bad_header;
}

const RulePercentage& find(const std::vector<RulePercentage>& rows, std::string_view rule_id) {
    for (const auto& row : rows) {
        if (row.rule_id == rule_id) {
            return row;
        }
    }
    throw std::out_of_range(std::string(rule_id));
}

// One line per rule; each hits exactly one pattern.
const std::vector<std::pair<std::string, std::string>>& planted_lines() {
    static const std::vector<std::pair<std::string, std::string>> lines = {
        {"EPHI_Audit_Control", "AppOpsManager.OnOpNotedCallback cb = null;"},
        {"Unique_Id", "String s = \"id INTEGER PRIMARY KEY\";"},
        {"EPHI_Transmission_Security", "PKIXRevocationChecker checker = null;"},
        {"EPHI_Transmission_integrity", "javax.net.ssl.TrustManager tm = null;"},
        {"EPHI_encryption_decryption", "Cipher c = Cipher.getInstance(\"RSA/None/OAEPPadding\");"},
    };
    return lines;
}

struct RandomCorpus {
    std::vector<AppEntry> entries;
    // Planted line counts per app, indexed like planted_lines().
    std::vector<std::vector<int>> counts;
};

RandomCorpus make_random_corpus(const fs::path& root, std::mt19937& rng, std::size_t apps) {
    RandomCorpus corpus;
    std::uniform_int_distribution<int> count(0, 3);
    std::uniform_int_distribution<int> category(0, 2);
    for (std::size_t a = 0; a < apps; ++a) {
        const std::string id = "app" + std::to_string(a);
        std::string body = "class Main {\n";
        std::vector<int> per_line;
        for (const auto& [rule, line] : planted_lines()) {
            const int n = count(rng);
            per_line.push_back(n);
            for (int i = 0; i < n; ++i) {
                body += "    " + line + "\n";
            }
        }
        body += "}\n";
        testutil::write_file(root / id / "Main.java", body);
        corpus.entries.push_back({id, static_cast<Category>(category(rng)), AppKind::source, root / id});
        corpus.counts.push_back(std::move(per_line));
    }
    return corpus;
}

} // namespace

TEST(Manifest, HeaderOnlyIsEmpty) {
    EXPECT_TRUE(load_manifest("app_id,category,kind,path\n").empty());
    EXPECT_TRUE(load_manifest("app_id,category,kind,path").empty());
}

TEST(Manifest, RowsInOrder) {
    const auto entries = load_manifest("app_id,category,kind,path\n"
                                       "b,medical,source,/x/b\n"
                                       "a,health_fitness,apk,/x/a.apk\n");
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[0], (AppEntry{"b", Category::medical, AppKind::source, "/x/b"}));
    EXPECT_EQ(entries[1], (AppEntry{"a", Category::health_fitness, AppKind::apk, "/x/a.apk"}));
}

TEST(Manifest, UnknownCategoryIsOther) {
    const auto entries = load_manifest("app_id,category,kind,path\nz,games,source,p\n");
    EXPECT_EQ(entries.at(0).category, Category::other);
}

TEST(Manifest, BomCrlfQuotesAndBlankLines) {
    const auto entries = load_manifest("\xEF\xBB\xBF"
                                       "app_id,category,kind,path\r\n"
                                       "\r\n"
                                       "q,other,source,\"dir, with \"\"comma\"\"\"\r\n");
    ASSERT_EQ(entries.size(), 1u);
    EXPECT_EQ(entries[0].path, "dir, with \"comma\"");
}

TEST(Manifest, Errors) {
    struct Case {
        std::string csv;
        ManifestError::Kind kind;
        std::size_t row;
    };
    const std::string h = "app_id,category,kind,path\n";
    const std::vector<Case> cases = {
        {"", ManifestError::Kind::bad_header, 1},
        {"id,category,kind,path\n", ManifestError::Kind::bad_header, 1},
        {h + "a,medical,source\n", ManifestError::Kind::bad_row, 2},
        {h + "a,medical,source,p,extra\n", ManifestError::Kind::bad_row, 2},
        {h + "a,medical,binary,p\n", ManifestError::Kind::bad_row, 2},
        {h + "a,medical,source,\n", ManifestError::Kind::bad_row, 2},
        {h + ",medical,source,p\n", ManifestError::Kind::bad_row, 2},
        {h + "../up,medical,source,p\n", ManifestError::Kind::bad_row, 2},
        {h + "..,medical,source,p\n", ManifestError::Kind::bad_row, 2},
        {h + "a,medical,source,\"open\n", ManifestError::Kind::bad_row, 2},
        {h + "a,medical,source,p\nb,other,source,q\na,other,source,r\n", ManifestError::Kind::duplicate_app_id, 4},
    };
    for (const auto& c : cases) {
        std::size_t row = 0;
        EXPECT_EQ(manifest_error_kind(c.csv, row), c.kind) << c.csv;
        EXPECT_EQ(row, c.row) << c.csv;
    }
}

TEST(Batch, NoEntries) {
    TempDir dir;
    const auto result = run_batch({}, paper(), dir.path(), std::nullopt);
    EXPECT_TRUE(result.verdicts.empty());
    EXPECT_TRUE(result.records.empty());
    EXPECT_TRUE(result.failures.empty());
}

TEST(Batch, MissingPathBecomesFailure) {
    TempDir dir;
    auto entries = corpus10_entries();
    entries.resize(3);
    entries[1].path = dir / "nowhere";
    const auto result = run_batch(entries, paper(), dir / "work", std::nullopt);
    ASSERT_EQ(result.verdicts.size(), 2u);
    EXPECT_EQ(result.verdicts[0].app_id, "m1");
    EXPECT_EQ(result.verdicts[1].app_id, "m3");
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_EQ(result.failures[0].app_id, "m2");
    EXPECT_NE(result.failures[0].error.find("nowhere"), std::string::npos);
}

TEST(Batch, WritesPerAppReports) {
    TempDir dir;
    auto entries = corpus10_entries();
    entries.resize(2);
    run_batch(entries, paper(), dir.path(), std::nullopt, {.deterministic = true});
    for (const auto& entry : entries) {
        EXPECT_TRUE(fs::is_regular_file(dir / entry.app_id / "report.json"));
        EXPECT_TRUE(fs::is_regular_file(dir / entry.app_id / "report.html"));
    }
}

TEST(Batch, EqualsSingleAppScans) {
    TempDir dir;
    const auto entries = corpus10_entries();
    for (std::size_t workers : {1u, 3u}) {
        const auto result = run_batch(entries, paper(), dir / std::to_string(workers), std::nullopt,
                                      {.workers = workers});
        ASSERT_EQ(result.verdicts.size(), entries.size());
        std::vector<MatchRecord> all;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const ScanResult scan = scan_tree(open_source_tree(entries[i].path), paper());
            EXPECT_EQ(result.verdicts[i], evaluate(scan, paper(), entries[i].app_id));
            all.insert(all.end(), scan.records.begin(), scan.records.end());
        }
        EXPECT_EQ(result.records, all);
    }
}

TEST(Batch, UnwritableWorkdir) {
    TempDir dir;
    testutil::write_file(dir / "file", "x");
    try {
        run_batch(corpus10_entries(), paper(), dir / "file" / "sub", std::nullopt);
        FAIL();
    } catch (const CorpusError& e) {
        EXPECT_EQ(e.kind(), CorpusError::Kind::workdir_unwritable);
    }
}

TEST(Batch, ApkWithoutDecompiler) {
    TempDir dir;
    const std::vector<AppEntry> entries = {{"a", Category::medical, AppKind::apk, dir / "a.apk"}};
    EXPECT_THROW(run_batch(entries, paper(), dir.path(), std::nullopt), std::invalid_argument);
}

TEST(Stats, SyntheticCorpusMatchesHandComputation) {
    TempDir dir;
    const auto entries = corpus10_entries();
    const auto batch = run_batch(entries, paper(), dir.path(), std::nullopt);
    ASSERT_TRUE(batch.failures.empty());
    EXPECT_EQ(batch.records.size(), 17u);
    const auto stats = compute_stats(batch.verdicts, batch.records, entries);
    EXPECT_EQ(stats.app_count, 10u);
    EXPECT_EQ(find(stats.per_rule_prevalence, "EPHI_Audit_Control").percentage->to_string(), "40.0");
    EXPECT_EQ(find(stats.match_share, "Unique_Id").percentage, (Percentage{5, 17}));
    EXPECT_EQ(find(stats.per_category_prevalence.at(Category::health_fitness), "EPHI_Transmission_integrity")
                  .percentage,
              (Percentage{2, 4}));
    EXPECT_EQ(stats_to_csv(stats),
              testutil::read_file(testutil::fixtures_dir() / "corpus10" / "expected_stats.csv"));
}

TEST(Stats, EmergencyIsNull) {
    TempDir dir;
    const auto entries = corpus10_entries();
    const auto batch = run_batch(entries, paper(), dir.path(), std::nullopt);
    const auto stats = compute_stats(batch.verdicts, batch.records, entries);
    EXPECT_FALSE(find(stats.per_rule_prevalence, "Emergency_EPHI_Access").percentage.has_value());
    for (const auto& [category, rows] : stats.per_category_prevalence) {
        EXPECT_FALSE(find(rows, "Emergency_EPHI_Access").percentage.has_value());
    }
    EXPECT_NE(stats_to_csv(stats).find("\nprevalence,,EPHI_Audit_Control,40.0\n"), std::string::npos);
}

TEST(Stats, AllRecordsInOneRule) {
    TempDir dir;
    const std::vector<AppEntry> entries = {corpus10_entries()[2]};  // m3
    const auto batch = run_batch(entries, paper(), dir.path(), std::nullopt);
    const auto stats = compute_stats(batch.verdicts, batch.records, entries);
    for (const auto& row : stats.match_share) {
        EXPECT_EQ(row.percentage->to_string(), row.rule_id == "Unique_Id" ? "100.0" : "0.0") << row.rule_id;
    }
}

TEST(Stats, CategoryPrevalenceExact) {
    TempDir dir;
    testutil::write_file(dir / "a" / "A.java", "String s = \"PRIMARY KEY\";\n");
    testutil::write_file(dir / "b" / "B.java", "class B {}\n");
    const std::vector<AppEntry> entries = {{"a", Category::medical, AppKind::source, dir / "a"},
                                           {"b", Category::health_fitness, AppKind::source, dir / "b"}};
    const auto batch = run_batch(entries, paper(), dir / "work", std::nullopt);
    const auto stats = compute_stats(batch.verdicts, batch.records, entries);
    EXPECT_EQ(find(stats.per_category_prevalence.at(Category::medical), "Unique_Id").percentage->to_string(),
              "100.0");
    EXPECT_EQ(find(stats.per_category_prevalence.at(Category::health_fitness), "Unique_Id")
                  .percentage->to_string(),
              "0.0");
    EXPECT_EQ(stats.per_category_prevalence.count(Category::other), 0u);
    EXPECT_EQ(find(stats.per_rule_prevalence, "Unique_Id").percentage->to_string(), "50.0");
}

TEST(Stats, NoMatchesGivesZeroShares) {
    TempDir dir;
    testutil::write_file(dir / "a" / "A.java", "class A {}\n");
    const std::vector<AppEntry> entries = {{"a", Category::other, AppKind::source, dir / "a"}};
    const auto batch = run_batch(entries, paper(), dir / "work", std::nullopt);
    const auto stats = compute_stats(batch.verdicts, batch.records, entries);
    const std::string csv = stats_to_csv(stats);
    EXPECT_EQ(testutil::count_substr(csv, "match_share,,"), 12u);
    for (const auto& row : stats.match_share) {
        EXPECT_EQ(row.percentage->to_string(), "0.0");
    }
    EXPECT_EQ(csv, stats_to_csv(stats));
}

TEST(Stats, FailuresCarriedThrough) {
    TempDir dir;
    const auto entries = corpus10_entries();
    const auto batch = run_batch(entries, paper(), dir.path(), std::nullopt);
    const std::vector<AppFailure> failures = {{"gone", "path does not exist"}};
    const auto stats = compute_stats(batch.verdicts, batch.records, entries, failures);
    EXPECT_EQ(stats.failed_apps, failures);
    EXPECT_EQ(stats.app_count, 10u);
}

TEST(Stats, EmptyCorpus) {
    try {
        compute_stats({}, {}, {});
        FAIL();
    } catch (const CorpusError& e) {
        EXPECT_EQ(e.kind(), CorpusError::Kind::empty_corpus);
    }
}

TEST(StatsProperty, BoundsAndShareSum) {
    std::mt19937 rng(20240611);
    for (int round = 0; round < 8; ++round) {
        TempDir dir;
        const auto corpus = make_random_corpus(dir / "src", rng, 3 + round);
        const auto batch = run_batch(corpus.entries, paper(), dir / "work", std::nullopt, {.workers = 2});
        ASSERT_TRUE(batch.failures.empty());
        const auto stats = compute_stats(batch.verdicts, batch.records, corpus.entries);

        std::size_t planted = 0;
        for (const auto& app : corpus.counts) {
            planted += std::accumulate(app.begin(), app.end(), 0u);
        }
        ASSERT_EQ(batch.records.size(), planted);

        const auto in_bounds = [](const RulePercentage& row) {
            return !row.percentage || (row.percentage->value() >= 0.0 && row.percentage->value() <= 100.0);
        };
        for (const auto& row : stats.per_rule_prevalence) {
            EXPECT_TRUE(in_bounds(row));
        }
        for (const auto& [category, rows] : stats.per_category_prevalence) {
            for (const auto& row : rows) {
                EXPECT_TRUE(in_bounds(row));
            }
        }
        double sum = 0.0;
        for (const auto& row : stats.match_share) {
            sum += std::stod(row.percentage->to_string());
        }
        if (planted > 0) {
            EXPECT_NEAR(sum, 100.0, 0.1 + 1e-9);
        } else {
            EXPECT_EQ(sum, 0.0);
        }

        // Prevalence against the planted counts.
        for (std::size_t k = 0; k < planted_lines().size(); ++k) {
            std::uint64_t apps_with = 0;
            for (const auto& app : corpus.counts) {
                apps_with += app[k] > 0 ? 1 : 0;
            }
            EXPECT_EQ(find(stats.per_rule_prevalence, planted_lines()[k].first).percentage,
                      (Percentage{apps_with, corpus.entries.size()}));
        }
    }
}

TEST(StatsProperty, RemovingAnAppOnlyChangesDenominators) {
    std::mt19937 rng(7);
    for (int round = 0; round < 5; ++round) {
        TempDir dir;
        const auto corpus = make_random_corpus(dir / "src", rng, 6);
        const auto full = run_batch(corpus.entries, paper(), dir / "full", std::nullopt);
        const auto full_stats = compute_stats(full.verdicts, full.records, corpus.entries);

        const std::size_t drop = std::uniform_int_distribution<std::size_t>(0, corpus.entries.size() - 1)(rng);
        auto fewer = corpus.entries;
        fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
        const auto part = run_batch(fewer, paper(), dir / "part", std::nullopt);
        const auto part_stats = compute_stats(part.verdicts, part.records, fewer);

        for (std::size_t i = 0, j = 0; i < full.verdicts.size(); ++i) {
            if (i == drop) {
                continue;
            }
            EXPECT_EQ(part.verdicts[j++], full.verdicts[i]);
        }
        const AppVerdict& dropped = full.verdicts[drop];
        for (std::size_t r = 0; r < full_stats.per_rule_prevalence.size(); ++r) {
            const auto& before = full_stats.per_rule_prevalence[r].percentage;
            const auto& after = part_stats.per_rule_prevalence[r].percentage;
            ASSERT_EQ(before.has_value(), after.has_value());
            if (!before) {
                continue;
            }
            const std::uint64_t removed = dropped.rules[r].status == Status::satisfied ? 1 : 0;
            EXPECT_EQ(after->numerator, before->numerator - removed);
            EXPECT_EQ(after->denominator, before->denominator - 1);
        }
    }
}
