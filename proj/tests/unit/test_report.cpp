#include <catch_amalgamated.hpp>

#include <random>

#include "arascan/report.hpp"
#include "support/test_util.hpp"

using namespace arascan;

namespace {

DetectionSet detections_of(std::initializer_list<Technique> techniques)
{
    DetectionSet ds;
    for (Technique t : all_techniques) {
        ds.by_technique[t];
    }
    for (Technique t : techniques) {
        Detection d;
        d.fingerprint_id = "fp_" + to_lower(to_string(t));
        d.confidence = Confidence::HIGH;
        d.witness = ScopeWitness{Scope::global(), {}};
        ds.by_technique[t].push_back(std::move(d));
    }
    return ds;
}

DetailReport detail_of(std::initializer_list<Technique> techniques)
{
    auto [simple, detail] = summarize(detections_of(techniques), "x.apk", "00");
    return detail;
}

}  // namespace

TEST_CASE("summarize maps techniques onto their categories", "[report]")
{
    SECTION("UTP alone flags AD only")
    {
        auto [simple, detail] = summarize(detections_of({Technique::UTP}), "a.apk", "00");
        CHECK(simple.categories.at(Category::AD));
        CHECK_FALSE(simple.categories.at(Category::VED));
        CHECK_FALSE(simple.categories.at(Category::AT));
        CHECK_FALSE(simple.categories.at(Category::AH));
        CHECK_FALSE(simple.categories.at(Category::RD));
        bool utp_detected = false;
        for (const auto& e : detail.techniques) {
            if (e.id == Technique::UTP) {
                utp_detected = e.detected;
            }
        }
        CHECK(utp_detected);
    }

    SECTION("an empty detection set flags nothing")
    {
        auto [simple, detail] = summarize(detections_of({}), "a.apk", "00");
        for (Category c : all_categories) {
            CHECK_FALSE(simple.categories.at(c));
        }
        for (const auto& e : detail.techniques) {
            CHECK_FALSE(e.detected);
            CHECK(e.evidence.empty());
        }
    }

    SECTION("FP and XPOSED flag VED and AH")
    {
        auto [simple, detail] =
            summarize(detections_of({Technique::FP, Technique::XPOSED}), "a.apk", "00");
        CHECK(simple.categories.at(Category::VED));
        CHECK(simple.categories.at(Category::AH));
        CHECK_FALSE(simple.categories.at(Category::AD));
        CHECK_FALSE(simple.categories.at(Category::AT));
        CHECK_FALSE(simple.categories.at(Category::RD));
    }
}

TEST_CASE("every detail report carries exactly 32 technique entries", "[report]")
{
    for (auto techs : {std::initializer_list<Technique>{},
                       {Technique::UTC},
                       {Technique::DP, Technique::FRIDA, Technique::SC}}) {
        DetailReport detail = detail_of(techs);
        CHECK(detail.techniques.size() == 32);
        auto json = report_json::detail_to_json(detail);
        CHECK(json["techniques"].size() == 32);
    }
}

TEST_CASE("category booleans equal the disjunction of their techniques", "[report]")
{
    std::mt19937 rng(555);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<Technique> techs;
        for (Technique t : all_techniques) {
            if (rng() % 3 == 0) {
                techs.push_back(t);
            }
        }
        DetectionSet ds;
        for (Technique t : techs) {
            Detection d;
            d.fingerprint_id = "x";
            ds.by_technique[t].push_back(d);
        }
        auto [simple, detail] = summarize(ds, "a.apk", "00");
        for (Category c : all_categories) {
            bool expected = false;
            for (const auto& e : detail.techniques) {
                if (category_of(e.id) == c && e.detected) {
                    expected = true;
                }
            }
            CHECK(simple.categories.at(c) == expected);
        }
    }
}

TEST_CASE("max_confidence is the strongest across matching fingerprints", "[report]")
{
    DetectionSet ds;
    Detection low;
    low.fingerprint_id = "a";
    low.confidence = Confidence::LOW;
    Detection medium;
    medium.fingerprint_id = "b";
    medium.confidence = Confidence::MEDIUM;
    ds.by_technique[Technique::ERS] = {low, medium};
    auto [simple, detail] = summarize(ds, "a.apk", "00");
    for (const auto& e : detail.techniques) {
        if (e.id == Technique::ERS) {
            REQUIRE(e.max_confidence.has_value());
            CHECK(*e.max_confidence == Confidence::MEDIUM);
        }
    }
}

TEST_CASE("aggregate tallies counts, percentages and the histogram", "[report]")
{
    SECTION("single all-false report")
    {
        CorpusStats stats = aggregate({detail_of({})});
        CHECK(stats.total_apks == 1);
        for (Technique t : all_techniques) {
            CHECK(stats.technique_counts.at(t) == 0);
        }
        CHECK(stats.category_histogram.at(0) == 1);
        auto json = report_json::stats_to_json(stats);
        CHECK(json["techniques"][0]["percent"] == "0.0000");
    }

    SECTION("two identical single-technique reports hit 100 percent")
    {
        CorpusStats stats = aggregate({detail_of({Technique::ERS}), detail_of({Technique::ERS})});
        CHECK(stats.technique_counts.at(Technique::ERS) == 2);
        auto json = report_json::stats_to_json(stats);
        for (const auto& tj : json["techniques"]) {
            if (tj["id"] == "ERS") {
                CHECK(tj["percent"] == "100.0000");
            }
        }
        CHECK(stats.category_histogram.at(1) == 2);
    }

    SECTION("empty input is an error")
    {
        CHECK_THROWS_AS(aggregate({}), EmptyCorpus);
    }
}

TEST_CASE("aggregate is permutation invariant", "[report]")
{
    std::vector<DetailReport> reports = {
        detail_of({Technique::UTP}),
        detail_of({Technique::FP, Technique::XPOSED}),
        detail_of({}),
        detail_of({Technique::SC, Technique::CIP, Technique::ERS}),
    };
    CorpusStats a = aggregate(reports);
    std::reverse(reports.begin(), reports.end());
    CorpusStats b = aggregate(reports);
    CHECK(a.technique_counts == b.technique_counts);
    CHECK(a.category_counts == b.category_counts);
    CHECK(a.category_histogram == b.category_histogram);
}

TEST_CASE("histogram sums to the corpus size", "[report]")
{
    std::mt19937 rng(777);
    std::vector<DetailReport> reports;
    for (int i = 0; i < 40; ++i) {
        std::vector<Technique> techs;
        for (Technique t : all_techniques) {
            if (rng() % 4 == 0) {
                techs.push_back(t);
            }
        }
        DetectionSet ds;
        for (Technique t : techs) {
            Detection d;
            d.fingerprint_id = "x";
            ds.by_technique[t].push_back(d);
        }
        reports.push_back(summarize(ds, "r", "00").second);
    }
    CorpusStats stats = aggregate(reports);
    size_t total = 0;
    for (const auto& [k, v] : stats.category_histogram) {
        total += v;
    }
    CHECK(total == stats.total_apks);
}

TEST_CASE("detail reports round-trip through JSON for aggregation", "[report]")
{
    DetailReport detail = detail_of({Technique::CBTSP, Technique::HC});
    auto json = report_json::detail_to_json(detail);
    DetailReport back = detail_from_json(json);
    REQUIRE(back.techniques.size() == 32);
    for (size_t i = 0; i < 32; ++i) {
        CHECK(back.techniques[i].id == detail.techniques[i].id);
        CHECK(back.techniques[i].detected == detail.techniques[i].detected);
    }
}
