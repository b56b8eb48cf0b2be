#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "arascan/fixtures/corpus.hpp"
#include "arascan/fixtures/zip_writer.hpp"
#include "support/test_util.hpp"

#ifndef ARASCAN_CLI_PATH
#error "ARASCAN_CLI_PATH must point at the built binary"
#endif

using namespace arascan;
namespace fs = std::filesystem;

namespace {

std::string cli()
{
    return std::string(ARASCAN_CLI_PATH);
}

std::string rules_arg()
{
    return std::string(" --rules ") + ARASCAN_RULES_PATH;
}

nlohmann::json parse_file(const fs::path& p)
{
    auto bytes = testutil::read_file(p);
    return nlohmann::json::parse(bytes.begin(), bytes.end());
}

}  // namespace

TEST_CASE("scan exits 0 and reports the planted technique", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_scan");
    auto fixture =
        fixtures::gen_fixture(fixtures::FixtureSpec{Technique::UTP,
                                                    fixtures::Variant::POSITIVE});
    testutil::write_file(tmp / "utp.apk", fixture.apk);
    auto r = testutil::run_command(cli() + " scan " + (tmp / "utp.apk").string() +
                                   rules_arg() + " --detail --out " +
                                   (tmp / "out.json").string());
    CHECK(r.exit_code == 0);
    auto doc = parse_file(tmp / "out.json");
    CHECK(doc["simple"]["categories"]["AD"] == true);
    bool utp = false;
    for (const auto& t : doc["detail"]["techniques"]) {
        if (t["id"] == "UTP") {
            utp = t["detected"];
        }
    }
    CHECK(utp);
}

TEST_CASE("scanning a non-archive exits 2", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_bad");
    testutil::write_file(tmp / "junk.apk", std::string("this is not a zip archive"));
    auto r = testutil::run_command(cli() + " scan " + (tmp / "junk.apk").string() +
                                   rules_arg() + " 2>/dev/null");
    CHECK(r.exit_code == 2);
}

TEST_CASE("a corrupt second dex degrades to exit 1 with the first dex scanned", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_corrupt");
    auto fixture =
        fixtures::gen_fixture(fixtures::FixtureSpec{Technique::UTP,
                                                    fixtures::Variant::POSITIVE});
    // rebuild the archive with a second, undecodable dex entry
    ApkArchive parsed = open_apk(fixture.apk, "utp.apk");
    fixtures::ZipWriter zw;
    for (const auto& e : parsed.entries) {
        zw.add(e.path, e.data);
    }
    zw.add_corrupt_deflate("classes2.dex", Bytes{0x00, 0x11, 0x22, 0x33});
    testutil::write_file(tmp / "utp2.apk", zw.finish());

    auto r = testutil::run_command(cli() + " scan " + (tmp / "utp2.apk").string() +
                                   rules_arg() + " --detail --out " +
                                   (tmp / "out.json").string() + " 2>/dev/null");
    CHECK(r.exit_code == 1);
    auto doc = parse_file(tmp / "out.json");
    bool utp = false;
    for (const auto& t : doc["detail"]["techniques"]) {
        if (t["id"] == "UTP") {
            utp = t["detected"];
        }
    }
    CHECK(utp);
    CHECK_FALSE(doc["detail"]["warnings"].empty());
}

TEST_CASE("batch over the corpus writes per-APK reports and corpus stats", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_batch");
    fixtures::gen_corpus(tmp / "corpus");
    auto out = tmp / "out";
    auto r = testutil::run_command(cli() + " batch " + (tmp / "corpus").string() +
                                   rules_arg() + " --jobs 4 --out " + out.string());
    CHECK(r.exit_code == 0);

    size_t reports = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        if (e.path().string().ends_with(".report.json")) {
            ++reports;
        }
    }
    CHECK(reports == 64);
    auto stats = parse_file(out / "corpus_stats.json");
    CHECK(stats["total_apks"] == 64);
    CHECK(stats["category_count_histogram"]["0"] == 32);
    CHECK(stats["category_count_histogram"]["1"] == 32);
    CHECK(stats["failed"].empty());

    SECTION("aggregate recomputes the same stats from the report files")
    {
        auto agg = testutil::run_command(cli() + " report aggregate " + out.string() +
                                         " --out " + (tmp / "agg.json").string());
        CHECK(agg.exit_code == 0);
        auto recomputed = parse_file(tmp / "agg.json");
        auto original = parse_file(out / "corpus_stats.json");
        original.erase("failed");
        CHECK(recomputed == original);
    }
}

TEST_CASE("batch isolates per-APK failures and exits 1", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_batch_fail");
    fs::create_directories(tmp / "corpus");
    auto fixture =
        fixtures::gen_fixture(fixtures::FixtureSpec{Technique::ERS,
                                                    fixtures::Variant::POSITIVE});
    testutil::write_file(tmp / "corpus" / "good.apk", fixture.apk);
    testutil::write_file(tmp / "corpus" / "bad.apk", std::string("not an archive"));
    auto r = testutil::run_command(cli() + " batch " + (tmp / "corpus").string() +
                                   rules_arg() + " --out " + (tmp / "out").string() +
                                   " 2>/dev/null");
    CHECK(r.exit_code == 1);
    auto stats = parse_file(tmp / "out" / "corpus_stats.json");
    CHECK(stats["total_apks"] == 1);
    REQUIRE(stats["failed"].size() == 1);
    CHECK(stats["failed"][0]["file"] == "bad.apk");
}

TEST_CASE("batch on an empty directory exits 2", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_batch_empty");
    fs::create_directories(tmp / "corpus");
    auto r = testutil::run_command(cli() + " batch " + (tmp / "corpus").string() +
                                   rules_arg() + " --out " + (tmp / "out").string() +
                                   " 2>/dev/null");
    CHECK(r.exit_code == 2);
}

TEST_CASE("rules check validates packs", "[cli]")
{
    SECTION("the seed pack passes")
    {
        auto r = testutil::run_command(cli() + " rules check " + ARASCAN_RULES_PATH);
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("32/32 techniques covered") != std::string::npos);
    }

    SECTION("a dangling reference exits 2")
    {
        auto tmp = testutil::fresh_temp_dir("cli_rules");
        testutil::write_file(tmp / "bad.json", std::string(R"({
          "version": "1",
          "atoms": [],
          "fingerprints": [{"id": "f", "technique": "UTP", "expr": "nope",
                            "scope": "GLOBAL", "confidence": "HIGH"}]
        })"));
        auto r = testutil::run_command(cli() + " rules check " +
                                       (tmp / "bad.json").string());
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("nope") != std::string::npos);
    }

    SECTION("an empty pack warns but exits 0")
    {
        auto tmp = testutil::fresh_temp_dir("cli_rules_empty");
        testutil::write_file(tmp / "empty.json",
                             std::string(R"({"version":"1","atoms":[],"fingerprints":[]})"));
        auto r = testutil::run_command(cli() + " rules check " +
                                       (tmp / "empty.json").string());
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("no fingerprints") != std::string::npos);
    }
}

TEST_CASE("fixtures gen writes the corpus and re-runs identically", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_fixtures");
    auto r1 = testutil::run_command(cli() + " fixtures gen --out " +
                                    (tmp / "a").string());
    CHECK(r1.exit_code == 0);
    auto r2 = testutil::run_command(cli() + " fixtures gen --out " +
                                    (tmp / "b").string());
    CHECK(r2.exit_code == 0);
    for (const auto& e : fs::directory_iterator(tmp / "a")) {
        auto name = e.path().filename().string();
        CHECK(testutil::read_file(e.path()) == testutil::read_file(tmp / "b" / name));
    }
}

TEST_CASE("scattered negatives flip under the global scope override", "[cli]")
{
    auto tmp = testutil::fresh_temp_dir("cli_scope");
    auto fixture = fixtures::gen_fixture(
        fixtures::FixtureSpec{Technique::CSCE, fixtures::Variant::SCATTERED_NEGATIVE});
    testutil::write_file(tmp / "s.apk", fixture.apk);

    auto normal = testutil::run_command(cli() + " scan " + (tmp / "s.apk").string() +
                                        rules_arg() + " --detail --out " +
                                        (tmp / "n.json").string());
    CHECK(normal.exit_code == 0);
    auto forced = testutil::run_command(cli() + " scan " + (tmp / "s.apk").string() +
                                        rules_arg() + " --force-scope GLOBAL --detail" +
                                        " --out " + (tmp / "g.json").string());
    CHECK(forced.exit_code == 0);

    auto detected = [](const nlohmann::json& doc, const std::string& id) {
        for (const auto& t : doc["detail"]["techniques"]) {
            if (t["id"] == id) {
                return t["detected"].get<bool>();
            }
        }
        return false;
    };
    CHECK_FALSE(detected(parse_file(tmp / "n.json"), "CSCE"));
    CHECK(detected(parse_file(tmp / "g.json"), "CSCE"));
}
