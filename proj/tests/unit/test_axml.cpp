#include <catch_amalgamated.hpp>

#include "arascan/axml.hpp"
#include "arascan/fixtures/axml_writer.hpp"
#include "support/test_util.hpp"

using namespace arascan;

namespace {

fixtures::ManifestSpec base_spec()
{
    fixtures::ManifestSpec spec;
    spec.package = "com.fix.utp";
    spec.components = {{"activity", "com.fix.utp.Main"}};
    return spec;
}

std::string oracle_dump(const Bytes& bytes, const std::string& tag)
{
    auto tmp = testutil::fresh_temp_dir("axml_" + tag);
    testutil::write_file(tmp / "AndroidManifest.xml", bytes);
    auto r = testutil::run_command(testutil::oracle_script("axmldump.py") + " " +
                                   (tmp / "AndroidManifest.xml").string());
    REQUIRE(r.exit_code == 0);
    return r.output;
}

}  // namespace

TEST_CASE("debuggable attribute decodes and matches the reference dumper", "[axml]")
{
    auto spec = base_spec();
    spec.debuggable = Tri::True;
    Bytes bytes = fixtures::build_manifest(spec);
    ManifestFacts facts = decode_manifest(bytes);
    CHECK(facts.debuggable == Tri::True);
    CHECK(facts.package_name == "com.fix.utp");
    CHECK(testutil::axml_dump(facts) == oracle_dump(bytes, "dbg"));
}

TEST_CASE("absent debuggable attribute stays unset", "[axml]")
{
    Bytes bytes = fixtures::build_manifest(base_spec());
    ManifestFacts facts = decode_manifest(bytes);
    CHECK(facts.debuggable == Tri::Unset);
}

TEST_CASE("verification attribute lands on manifest/application", "[axml]")
{
    auto spec = base_spec();
    spec.application_attrs = {{"verification", "true"}};
    ManifestFacts facts = decode_manifest(fixtures::build_manifest(spec));
    bool found = false;
    for (const auto& a : facts.attributes) {
        if (a.element_path == "manifest/application" && a.attr_name == "verification" &&
            a.value == "true") {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("query_attr returns the first match in document order", "[axml]")
{
    auto spec = base_spec();
    spec.debuggable = Tri::True;
    ManifestFacts facts = decode_manifest(fixtures::build_manifest(spec));
    CHECK(query_attr(facts, "manifest", "package") ==
          std::optional<std::string>("com.fix.utp"));
    CHECK(query_attr(facts, "manifest/application", "debuggable") ==
          std::optional<std::string>("true"));
    CHECK_FALSE(query_attr(facts, "manifest", "nope").has_value());
}

TEST_CASE("round-trip through both string pool encodings", "[axml]")
{
    for (bool utf8 : {false, true}) {
        auto spec = base_spec();
        spec.utf8_pool = utf8;
        spec.debuggable = Tri::False;
        spec.application_attrs = {{"verification", "true"}};
        spec.components.push_back({"service", "com.fix.utp.Svc"});
        ManifestFacts facts = decode_manifest(fixtures::build_manifest(spec));
        CHECK(facts.package_name == spec.package);
        CHECK(facts.debuggable == Tri::False);
        REQUIRE(facts.components.size() == 2);
        CHECK(facts.components[1].kind == "service");
        CHECK(facts.components[1].name == "com.fix.utp.Svc");
    }
}

TEST_CASE("plain-text manifests are accepted as a fallback", "[axml]")
{
    std::string text =
        "<?xml version=\"1.0\"?>\n"
        "<!-- hand-written -->\n"
        "<manifest package=\"com.x\">\n"
        "  <application android:debuggable=\"true\">\n"
        "    <activity android:name=\"com.x.A\"/>\n"
        "  </application>\n"
        "</manifest>\n";
    ManifestFacts facts =
        decode_manifest(ByteView(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
    CHECK(facts.package_name == "com.x");
    CHECK(facts.debuggable == Tri::True);
    REQUIRE(facts.components.size() == 1);
    CHECK(facts.components[0].name == "com.x.A");
}

TEST_CASE("malformed binary manifests carry a byte offset", "[axml]")
{
    auto spec = base_spec();
    Bytes bytes = fixtures::build_manifest(spec);
    Bytes truncated(bytes.begin(), bytes.begin() + 16);
    // keep the document header size but drop the body
    CHECK_THROWS_AS(decode_manifest(truncated), MalformedManifest);

    Bytes bad_chunk = bytes;
    bad_chunk[8 + 4] = 0x01;  // corrupt the string pool chunk size
    bad_chunk[8 + 5] = 0x00;
    bad_chunk[8 + 6] = 0x00;
    bad_chunk[8 + 7] = 0x00;
    CHECK_THROWS_AS(decode_manifest(bad_chunk), MalformedManifest);
}

TEST_CASE("unknown chunk types are skipped by declared size", "[axml]")
{
    auto spec = base_spec();
    Bytes bytes = fixtures::build_manifest(spec);
    // splice an unknown chunk right after the string pool
    ByteReader r(bytes, 0);
    r.skip(2 + 2 + 4);
    size_t pool_start = r.pos();
    ByteReader pool_hdr(bytes, pool_start + 4);
    uint32_t pool_size = pool_hdr.u32();
    size_t insert_at = pool_start + pool_size;

    ByteWriter chunk;
    chunk.u16(0x7777);
    chunk.u16(8);
    chunk.u32(12);
    chunk.u32(0xdeadbeef);
    Bytes spliced;
    spliced.insert(spliced.end(), bytes.begin(), bytes.begin() + insert_at);
    spliced.insert(spliced.end(), chunk.data().begin(), chunk.data().end());
    spliced.insert(spliced.end(), bytes.begin() + insert_at, bytes.end());
    // fix the document total size
    uint32_t total = static_cast<uint32_t>(spliced.size());
    spliced[4] = static_cast<uint8_t>(total);
    spliced[5] = static_cast<uint8_t>(total >> 8);
    spliced[6] = static_cast<uint8_t>(total >> 16);
    spliced[7] = static_cast<uint8_t>(total >> 24);

    ManifestFacts facts = decode_manifest(spliced);
    CHECK(facts.package_name == "com.fix.utp");
    REQUIRE(facts.warnings.size() == 1);
    CHECK(facts.warnings[0].code == "axml.unknown_chunk");
}
