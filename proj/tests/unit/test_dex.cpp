#include <catch_amalgamated.hpp>

#include "arascan/dex.hpp"
#include "arascan/fixtures/dex_writer.hpp"
#include "support/test_util.hpp"

using namespace arascan;
using namespace arascan::fixtures;

namespace {

std::string oracle_dump(const Bytes& dex, const std::string& tag)
{
    auto tmp = testutil::fresh_temp_dir("dex_" + tag);
    testutil::write_file(tmp / "classes.dex", dex);
    auto r = testutil::run_command(testutil::oracle_script("dexdump.py") + " " +
                                   (tmp / "classes.dex").string());
    REQUIRE(r.exit_code == 0);
    return r.output;
}

DexSpec fig1_spec()
{
    DexSpec spec;
    ClassSpec cls;
    cls.descriptor = "Lcom/fix/virtualcheck/PathCheck;";
    MethodSpec m;
    m.name = "checkByPrivateFilePath";
    m.return_desc = "Z";
    m.param_descs = {"Landroid/content/Context;"};
    m.body = {
        ins::Invoke{ins::InvokeKind::Virtual,
                    MethodRef{"Landroid/content/Context;", "getFilesDir",
                              "()Ljava/io/File;"}},
        ins::Invoke{ins::InvokeKind::Virtual,
                    MethodRef{"Ljava/io/File;", "getPath", "()Ljava/lang/String;"}},
        ins::ConstString{"com.bly.dkplat"},
        ins::Invoke{ins::InvokeKind::Virtual,
                    MethodRef{"Ljava/lang/String;", "contains",
                              "(Ljava/lang/CharSequence;)Z"}},
    };
    cls.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(cls));
    return spec;
}

}  // namespace

TEST_CASE("string pool count is exact and oracle-equal", "[dex]")
{
    // pool: LA;  Ljava/lang/Object;  V  a  one  three  two  -> 7 strings
    DexSpec spec;
    ClassSpec cls;
    cls.descriptor = "LA;";
    MethodSpec m;
    m.name = "a";
    m.body = {ins::ConstString{"one"}, ins::ConstString{"two"}, ins::ConstString{"three"}};
    cls.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(cls));
    Bytes bytes = build_dex(spec);
    DexFile dx = parse_dex(bytes);
    CHECK(dx.strings.size() == 7);
    CHECK(dx.warnings.empty());
    CHECK(testutil::dex_dump(dx) == oracle_dump(bytes, "seven"));
}

TEST_CASE("wrong magic is rejected", "[dex]")
{
    Bytes bad = {'n', 'o', 't', 'd', 'e', 'x', 0, 0};
    CHECK_THROWS_AS(parse_dex(bad), MalformedDex);
}

TEST_CASE("declared method ids are visible as MethodRefs", "[dex]")
{
    DexSpec spec;
    ClassSpec cls;
    cls.descriptor = "Lcom/fix/ddf/DebuggerCheck;";
    MethodSpec m;
    m.name = "check";
    m.body = {ins::Invoke{ins::InvokeKind::Static,
                          MethodRef{"Landroid/os/Debug;", "isDebuggerConnected", "()Z"}}};
    cls.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(cls));
    DexFile dx = parse_dex(build_dex(spec));
    bool found = false;
    for (const auto& mr : dx.methods) {
        if (mr.canonical() == "Landroid/os/Debug;->isDebuggerConnected()Z") {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("decode_bodies records const-strings and invokes with increasing offsets", "[dex]")
{
    DexSpec spec;
    ClassSpec cls;
    cls.descriptor = "Lcom/fix/ers/EmulatorCheck;";
    MethodSpec m;
    m.name = "check";
    m.body = {ins::ConstString{"ro.kernel.qemu"},
              ins::Invoke{ins::InvokeKind::Virtual,
                          MethodRef{"Ljava/lang/String;", "contains",
                                    "(Ljava/lang/CharSequence;)Z"}}};
    cls.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(cls));
    DexFile dx = parse_dex(build_dex(spec));
    auto bodies = decode_bodies(dx);
    REQUIRE(bodies.size() == 1);
    REQUIRE(bodies[0].const_strings.size() == 1);
    REQUIRE(bodies[0].invokes.size() == 1);
    CHECK(bodies[0].const_strings[0].first == "ro.kernel.qemu");
    CHECK(bodies[0].invokes[0].first.name == "contains");
    CHECK(bodies[0].const_strings[0].second < bodies[0].invokes[0].second);
}

TEST_CASE("a bare return-void body has no recorded facts", "[dex]")
{
    DexSpec spec;
    ClassSpec cls;
    cls.descriptor = "LEmpty;";
    MethodSpec m;
    m.name = "run";
    cls.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(cls));
    auto bodies = decode_bodies(parse_dex(build_dex(spec)));
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0].invokes.empty());
    CHECK(bodies[0].const_strings.empty());
    CHECK(bodies[0].field_refs.empty());
}

TEST_CASE("the private-file-path pattern keeps all three invokes in one body", "[dex]")
{
    Bytes bytes = build_dex(fig1_spec());
    DexFile dx = parse_dex(bytes);
    auto bodies = decode_bodies(dx);
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0].owner.name == "checkByPrivateFilePath");
    REQUIRE(bodies[0].invokes.size() == 3);
    CHECK(bodies[0].invokes[0].first.name == "getFilesDir");
    CHECK(bodies[0].invokes[1].first.name == "getPath");
    CHECK(bodies[0].invokes[2].first.name == "contains");
    CHECK(testutil::dex_dump(dx) == oracle_dump(bytes, "fig1"));
}

TEST_CASE("multidex merge unions pools and keeps bodies from later dex files", "[dex]")
{
    DexSpec a;
    {
        ClassSpec cls;
        cls.descriptor = "LA;";
        MethodSpec m;
        m.name = "a";
        m.body = {ins::ConstString{"alpha"}};
        cls.methods.push_back(std::move(m));
        a.classes.push_back(std::move(cls));
    }
    DexFile first = parse_dex(build_dex(a), "classes.dex");
    DexFile second = parse_dex(build_dex(fig1_spec()), "classes2.dex");

    SECTION("disjoint pools union to the sum")
    {
        size_t s1 = first.strings.size();
        size_t s2 = second.strings.size();
        std::set<std::string> overlap;
        for (const auto& s : first.strings) {
            for (const auto& t : second.strings) {
                if (s == t) {
                    overlap.insert(s);
                }
            }
        }
        ProgramFacts facts = merge_multidex({first, second});
        CHECK(facts.global_strings.size() == s1 + s2 - overlap.size());
    }

    SECTION("single dex merge is identity")
    {
        ProgramFacts facts = merge_multidex({first});
        CHECK(facts.global_strings ==
              std::set<std::string>(first.strings.begin(), first.strings.end()));
        REQUIRE(facts.bodies.size() == 1);
        CHECK(facts.bodies[0].owner.canonical() == "LA;->a()V");
    }

    SECTION("body defined in the second dex survives the merge")
    {
        ProgramFacts facts = merge_multidex({first, second});
        bool found = false;
        for (const auto& body : facts.bodies) {
            if (body.owner.name == "checkByPrivateFilePath") {
                found = true;
            }
        }
        CHECK(found);
        CHECK(facts.defined_methods.size() == 2);
    }
}

TEST_CASE("checksum mismatch warns instead of failing", "[dex]")
{
    Bytes bytes = build_dex(fig1_spec());
    bytes[8] ^= 0xff;
    DexFile dx = parse_dex(bytes);
    REQUIRE_FALSE(dx.warnings.empty());
    CHECK(dx.warnings[0].code == "dex.checksum");
}

TEST_CASE("truncated dex raises MalformedDex with an offset", "[dex]")
{
    Bytes bytes = build_dex(fig1_spec());
    Bytes truncated(bytes.begin(), bytes.begin() + 0x50);
    CHECK_THROWS_AS(parse_dex(truncated), MalformedDex);
}

TEST_CASE("index closure and offset monotonicity hold over generated dex files", "[dex]")
{
    DexSpec spec = fig1_spec();
    ClassSpec extra;
    extra.descriptor = "LB;";
    MethodSpec m;
    m.name = "b";
    m.body = {ins::SGetObject{FieldRef{"Landroid/os/Build;", "TAGS", "Ljava/lang/String;"}},
              ins::ConstString{"test-keys"}};
    extra.methods.push_back(std::move(m));
    spec.classes.push_back(std::move(extra));

    DexFile dx = parse_dex(build_dex(spec));
    std::set<std::string> known_methods;
    for (const auto& mr : dx.methods) {
        known_methods.insert(mr.canonical());
    }
    std::set<std::string> known_fields;
    for (const auto& fr : dx.fields) {
        known_fields.insert(fr.canonical());
    }
    for (const auto& body : decode_bodies(dx)) {
        uint32_t last = 0;
        bool first = true;
        for (const auto& [callee, off] : body.invokes) {
            CHECK(known_methods.count(callee.canonical()) == 1);
            if (!first) {
                CHECK(off > last);
            }
            last = off;
            first = false;
        }
        for (const auto& [field, off] : body.field_refs) {
            CHECK(known_fields.count(field.canonical()) == 1);
        }
    }
}
