#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arascan/matcher.hpp"
#include "arascan/techniques.hpp"

namespace arascan {

struct SimpleReport {
    std::string apk_id;
    std::string sha256;
    std::map<Category, bool> categories;  // all five, always present
};

struct TechniqueEntry {
    Technique id = Technique::UTC;
    bool detected = false;
    std::optional<Confidence> max_confidence;
    std::vector<Detection> evidence;
};

struct DetailReport {
    std::string apk_id;
    std::string sha256;
    std::vector<TechniqueEntry> techniques;  // exactly 32, fixed order
    std::vector<std::string> warnings;
};

struct CorpusStats {
    size_t total_apks = 0;
    std::map<Technique, size_t> technique_counts;
    std::map<Category, size_t> category_counts;
    std::map<int, size_t> category_histogram;  // 0..5 categories per APK
};

/// Both report flavors from one detection set. Category booleans are the
/// disjunction of their techniques.
inline std::pair<SimpleReport, DetailReport> summarize(const DetectionSet& ds,
                                                       const std::string& apk_id,
                                                       const std::string& sha256,
                                                       std::vector<std::string> warnings = {})
{
    DetailReport detail;
    detail.apk_id = apk_id;
    detail.sha256 = sha256;
    detail.warnings = std::move(warnings);
    for (Technique t : all_techniques) {
        TechniqueEntry entry;
        entry.id = t;
        auto it = ds.by_technique.find(t);
        if (it != ds.by_technique.end() && !it->second.empty()) {
            entry.detected = true;
            entry.evidence = it->second;
            Confidence best = Confidence::LOW;
            for (const auto& d : it->second) {
                if (static_cast<int>(d.confidence) < static_cast<int>(best)) {
                    best = d.confidence;
                }
            }
            entry.max_confidence = best;
        }
        detail.techniques.push_back(std::move(entry));
    }

    SimpleReport simple;
    simple.apk_id = apk_id;
    simple.sha256 = sha256;
    for (Category c : all_categories) {
        simple.categories[c] = false;
    }
    for (const auto& entry : detail.techniques) {
        if (entry.detected) {
            simple.categories[category_of(entry.id)] = true;
        }
    }
    return {std::move(simple), std::move(detail)};
}

/// Corpus-level aggregation: per-technique and per-category quantities plus
/// the 0..5 category-count histogram.
inline CorpusStats aggregate(const std::vector<DetailReport>& reports)
{
    if (reports.empty()) {
        throw EmptyCorpus("no reports to aggregate");
    }
    CorpusStats stats;
    stats.total_apks = reports.size();
    for (Technique t : all_techniques) {
        stats.technique_counts[t] = 0;
    }
    for (Category c : all_categories) {
        stats.category_counts[c] = 0;
    }
    for (int i = 0; i <= kCategoryCount; ++i) {
        stats.category_histogram[i] = 0;
    }
    for (const auto& r : reports) {
        std::set<Category> cats;
        for (const auto& entry : r.techniques) {
            if (entry.detected) {
                stats.technique_counts[entry.id] += 1;
                cats.insert(category_of(entry.id));
            }
        }
        for (Category c : cats) {
            stats.category_counts[c] += 1;
        }
        stats.category_histogram[static_cast<int>(cats.size())] += 1;
    }
    return stats;
}

namespace report_json {

using nlohmann::ordered_json;

inline std::string percent_text(size_t count, size_t total)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f",
                  total == 0 ? 0.0 : 100.0 * static_cast<double>(count) /
                                         static_cast<double>(total));
    return buf;
}

inline ordered_json site_to_json(const Site& s)
{
    ordered_json j;
    switch (s.kind) {
    case Site::Kind::Code:
        j["type"] = "code";
        j["method"] = s.method.canonical();
        j["offset"] = s.offset;
        break;
    case Site::Kind::Manifest:
        j["type"] = "manifest";
        j["path"] = s.element_path;
        break;
    case Site::Kind::Native:
        j["type"] = "native";
        j["lib"] = s.lib_path;
        j["offset"] = s.file_offset;
        j["note"] = s.note;
        break;
    case Site::Kind::Signing:
        j["type"] = "signing";
        break;
    case Site::Kind::Trace:
        j["type"] = "trace";
        j["seq"] = s.seq;
        break;
    case Site::Kind::Pool:
        j["type"] = "pool";
        j["value"] = s.pool_value;
        break;
    }
    return j;
}

inline ordered_json witness_to_json(const ScopeWitness& w)
{
    ordered_json j;
    j["scope"] = to_string(w.scope);
    if (w.scope.kind == Scope::Kind::Method && !w.sites.empty()) {
        j["method"] = w.sites.front().second.owner.canonical();
    }
    if (w.scope.kind == Scope::Kind::Class && !w.sites.empty()) {
        j["class"] = w.sites.front().second.owner.class_desc;
    }
    ordered_json sites = ordered_json::array();
    for (const auto& [atom_id, site] : w.sites) {
        sites.push_back({{"atom", atom_id},
                         {"method", site.owner.canonical()},
                         {"offset", site.offset}});
    }
    j["sites"] = std::move(sites);
    return j;
}

inline ordered_json detection_to_json(const Detection& d)
{
    ordered_json j;
    j["fingerprint"] = d.fingerprint_id;
    j["confidence"] = to_string(d.confidence);
    j["witness"] = witness_to_json(d.witness);
    ordered_json atoms = ordered_json::array();
    for (const auto& am : d.evidence) {
        ordered_json sites = ordered_json::array();
        for (const auto& s : am.sites) {
            sites.push_back(site_to_json(s));
        }
        atoms.push_back({{"atom", am.atom_id}, {"sites", std::move(sites)}});
    }
    j["atoms"] = std::move(atoms);
    return j;
}

inline ordered_json simple_to_json(const SimpleReport& r)
{
    ordered_json j;
    j["apk_id"] = r.apk_id;
    j["sha256"] = r.sha256;
    ordered_json cats;
    for (Category c : all_categories) {
        cats[to_string(c)] = r.categories.at(c);
    }
    j["categories"] = std::move(cats);
    return j;
}

inline ordered_json detail_to_json(const DetailReport& r)
{
    ordered_json j;
    j["apk_id"] = r.apk_id;
    j["sha256"] = r.sha256;
    ordered_json techniques = ordered_json::array();
    for (const auto& entry : r.techniques) {
        ordered_json t;
        t["id"] = to_string(entry.id);
        t["category"] = to_string(category_of(entry.id));
        std::string sub = to_string(subfamily_of(entry.id));
        t["subfamily"] = sub.empty() ? ordered_json(nullptr) : ordered_json(sub);
        t["detected"] = entry.detected;
        t["max_confidence"] = entry.max_confidence
                                  ? ordered_json(to_string(*entry.max_confidence))
                                  : ordered_json(nullptr);
        ordered_json evidence = ordered_json::array();
        for (const auto& d : entry.evidence) {
            evidence.push_back(detection_to_json(d));
        }
        t["evidence"] = std::move(evidence);
        techniques.push_back(std::move(t));
    }
    j["techniques"] = std::move(techniques);
    j["warnings"] = r.warnings;
    return j;
}

inline ordered_json stats_to_json(const CorpusStats& s)
{
    ordered_json j;
    j["total_apks"] = s.total_apks;
    ordered_json techniques = ordered_json::array();
    for (Technique t : all_techniques) {
        size_t count = s.technique_counts.at(t);
        techniques.push_back({{"id", to_string(t)},
                              {"count", count},
                              {"percent", percent_text(count, s.total_apks)}});
    }
    j["techniques"] = std::move(techniques);
    ordered_json categories = ordered_json::array();
    for (Category c : all_categories) {
        size_t count = s.category_counts.at(c);
        categories.push_back({{"id", to_string(c)},
                              {"count", count},
                              {"percent", percent_text(count, s.total_apks)}});
    }
    j["categories"] = std::move(categories);
    ordered_json hist;
    for (int i = 0; i <= kCategoryCount; ++i) {
        hist[std::to_string(i)] = s.category_histogram.at(i);
    }
    j["category_count_histogram"] = std::move(hist);
    return j;
}

}  // namespace report_json

inline std::string to_json_text(const SimpleReport& r)
{
    return report_json::simple_to_json(r).dump(2) + "\n";
}

inline std::string to_json_text(const DetailReport& r)
{
    return report_json::detail_to_json(r).dump(2) + "\n";
}

inline std::string to_json_text(const CorpusStats& s)
{
    return report_json::stats_to_json(s).dump(2) + "\n";
}

/// Parses the "detail" object of a per-APK report document back into the
/// fields aggregation needs (id, technique detected flags).
inline DetailReport detail_from_json(const nlohmann::json& j)
{
    DetailReport r;
    r.apk_id = j.at("apk_id").get<std::string>();
    r.sha256 = j.at("sha256").get<std::string>();
    for (const auto& tj : j.at("techniques")) {
        TechniqueEntry entry;
        auto t = parse_technique(tj.at("id").get<std::string>());
        if (!t) {
            throw std::runtime_error("unknown technique id in report: " +
                                     tj.at("id").get<std::string>());
        }
        entry.id = *t;
        entry.detected = tj.at("detected").get<bool>();
        r.techniques.push_back(std::move(entry));
    }
    if (r.techniques.size() != static_cast<size_t>(kTechniqueCount)) {
        throw std::runtime_error("report does not carry exactly 32 technique entries");
    }
    return r;
}

}  // namespace arascan
