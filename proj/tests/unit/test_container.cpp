#include <catch_amalgamated.hpp>

#include "arascan/apk.hpp"
#include "arascan/fixtures/zip_writer.hpp"
#include "support/test_util.hpp"

using namespace arascan;
using fixtures::ZipWriter;

namespace {

Bytes two_dex_apk()
{
    ZipWriter zw;
    zw.add("AndroidManifest.xml", std::string("<manifest package=\"com.x\"/>"));
    zw.add("classes.dex", Bytes{1, 2, 3});
    zw.add("classes2.dex", Bytes{4, 5});
    return zw.finish();
}

}  // namespace

TEST_CASE("open_apk enumerates entries and matches the reference zip listing", "[container]")
{
    Bytes apk = two_dex_apk();
    ApkArchive archive = open_apk(apk, "two_dex.apk");
    REQUIRE(archive.entries.size() == 3);
    REQUIRE(list_dex(archive).size() == 2);

    auto tmp = testutil::fresh_temp_dir("container_zipls");
    testutil::write_file(tmp / "two_dex.apk", apk);
    auto oracle = testutil::run_command(testutil::oracle_script("zipls.py") + " " +
                                        (tmp / "two_dex.apk").string());
    REQUIRE(oracle.exit_code == 0);
    CHECK(testutil::zip_dump(archive) == oracle.output);
}

TEST_CASE("empty zip opens with zero entries and a missing-manifest warning", "[container]")
{
    ZipWriter zw;
    Bytes apk = zw.finish();
    ApkArchive archive = open_apk(apk, "empty.apk");
    CHECK(archive.entries.empty());
    REQUIRE(archive.warnings.size() == 1);
    CHECK(archive.warnings[0].code == "apk.no_manifest");
}

TEST_CASE("random bytes without an EOCD are rejected", "[container]")
{
    Bytes junk(100);
    for (size_t i = 0; i < junk.size(); ++i) {
        junk[i] = static_cast<uint8_t>(i * 37 + 11);
    }
    CHECK_THROWS_AS(open_apk(junk, "junk"), MalformedArchive);
    CHECK_THROWS_AS(open_apk(Bytes{}, "empty"), MalformedArchive);
}

TEST_CASE("list_dex sorts classesN.dex numerically", "[container]")
{
    ZipWriter zw;
    zw.add("AndroidManifest.xml", std::string("x"));
    zw.add("classes3.dex", Bytes{3});
    zw.add("classes.dex", Bytes{1});
    zw.add("classes2.dex", Bytes{2});
    zw.add("classes10.dex", Bytes{10});
    ApkArchive archive = open_apk(zw.finish(), "t");
    auto dex = list_dex(archive);
    REQUIRE(dex.size() == 4);
    CHECK(dex[0].path == "classes.dex");
    CHECK(dex[1].path == "classes2.dex");
    CHECK(dex[2].path == "classes3.dex");
    CHECK(dex[3].path == "classes10.dex");

    ZipWriter none;
    none.add("AndroidManifest.xml", std::string("x"));
    CHECK(list_dex(open_apk(none.finish(), "t")).empty());
}

TEST_CASE("signing detection agrees with the reference signing check", "[container]")
{
    auto tmp = testutil::fresh_temp_dir("container_signing");
    auto reference_schemes = [&](const Bytes& apk, const std::string& name) {
        testutil::write_file(tmp / name, apk);
        auto r = testutil::run_command(testutil::oracle_script("sigcheck.py") + " " +
                                       (tmp / name).string());
        REQUIRE(r.exit_code == 0);
        return r.output;
    };

    SECTION("signing block stub yields V2PLUS")
    {
        ZipWriter zw;
        zw.add("AndroidManifest.xml", std::string("x"));
        zw.add_signing_block_stub();
        Bytes apk = zw.finish();
        SigningFacts facts = detect_signing(apk);
        CHECK(facts.schemes == std::set<SigningScheme>{SigningScheme::V2PLUS});
        CHECK(reference_schemes(apk, "v2.apk") == "V2PLUS\n");
    }

    SECTION("META-INF certificate yields V1")
    {
        ZipWriter zw;
        zw.add("AndroidManifest.xml", std::string("x"));
        zw.add("META-INF/CERT.RSA", Bytes{0x30, 0x82});
        Bytes apk = zw.finish();
        SigningFacts facts = detect_signing(apk);
        CHECK(facts.schemes == std::set<SigningScheme>{SigningScheme::V1});
        CHECK(facts.cert_entries == std::vector<std::string>{"META-INF/CERT.RSA"});
        CHECK(reference_schemes(apk, "v1.apk") == "V1\n");
    }

    SECTION("unsigned archive yields nothing")
    {
        ZipWriter zw;
        zw.add("AndroidManifest.xml", std::string("x"));
        Bytes apk = zw.finish();
        CHECK(detect_signing(apk).schemes.empty());
        CHECK(reference_schemes(apk, "none.apk").empty());
    }
}

TEST_CASE("V2PLUS requires the magic immediately before the central directory", "[container]")
{
    // magic planted as ordinary entry data must not count
    ZipWriter zw;
    zw.add("AndroidManifest.xml", std::string("x"));
    zw.add("assets/decoy", std::string("APK Sig Block 42"));
    Bytes apk = zw.finish();
    CHECK(detect_signing(apk).schemes.empty());
}

TEST_CASE("native library listing covers lib/ and ELF-magic entries", "[container]")
{
    ZipWriter zw;
    zw.add("AndroidManifest.xml", std::string("x"));
    zw.add("lib/arm64-v8a/libfix.so", Bytes{1, 2, 3});
    zw.add("assets/blob.so", Bytes{0x7f, 'E', 'L', 'F', 9, 9});
    zw.add("assets/data.bin", Bytes{9, 9, 9, 9});
    ApkArchive archive = open_apk(zw.finish(), "t");
    auto libs = list_native_libs(archive);
    REQUIRE(libs.size() == 2);
    CHECK(libs[0].path == "lib/arm64-v8a/libfix.so");
    CHECK(libs[1].path == "assets/blob.so");

    ZipWriter none;
    none.add("AndroidManifest.xml", std::string("x"));
    CHECK(list_native_libs(open_apk(none.finish(), "t")).empty());
}

TEST_CASE("per-entry decode failures warn and keep the rest of the archive", "[container]")
{
    ZipWriter zw;
    zw.add("AndroidManifest.xml", std::string("x"));
    zw.add_corrupt_deflate("classes2.dex", Bytes{0xde, 0xad, 0xbe, 0xef});
    zw.add("classes.dex", Bytes{1, 2, 3});
    ApkArchive archive = open_apk(zw.finish(), "t");
    REQUIRE(archive.entries.size() == 3);
    bool warned = false;
    for (const auto& w : archive.warnings) {
        warned = warned || w.code == "zip.entry_decode";
    }
    CHECK(warned);
    const ArchiveEntry* good = archive.find("classes.dex");
    REQUIRE(good != nullptr);
    CHECK_FALSE(good->decode_failed);
    CHECK(good->data == Bytes{1, 2, 3});
    const ArchiveEntry* bad = archive.find("classes2.dex");
    REQUIRE(bad != nullptr);
    CHECK(bad->decode_failed);
}

TEST_CASE("V2PLUS is never reported without the signing-block magic", "[container]")
{
    static const std::string magic = "APK Sig Block 42";
    for (const auto& e : arascan::fixtures::build_corpus()) {
        bool has_magic =
            std::search(e.fixture.apk.begin(), e.fixture.apk.end(), magic.begin(),
                        magic.end()) != e.fixture.apk.end();
        SigningFacts facts = detect_signing(e.fixture.apk);
        INFO(e.file);
        if (facts.schemes.count(SigningScheme::V2PLUS)) {
            CHECK(has_magic);
        }
        if (!has_magic) {
            CHECK(facts.schemes.count(SigningScheme::V2PLUS) == 0);
        }
    }
}

TEST_CASE("re-opening the same bytes is deterministic", "[container]")
{
    Bytes apk = two_dex_apk();
    ApkArchive a = open_apk(apk, "t");
    ApkArchive b = open_apk(apk, "t");
    CHECK(a.entries == b.entries);
    CHECK(a.signing == b.signing);
    CHECK(a.warnings == b.warnings);
}
