#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arascan/apk.hpp"
#include "arascan/hash.hpp"
#include "arascan/matcher.hpp"
#include "arascan/report.hpp"

namespace arascan {

struct ScanResult {
    SimpleReport simple;
    DetailReport detail;
    bool had_warnings = false;
};

/// Full pipeline for one APK: open, extract facts, evaluate the pack,
/// summarize. The sha256 of the input bytes is the stable APK identifier.
inline ScanResult scan_apk(ByteView apk_bytes, const std::string& apk_id,
                           const RulePack& pack, const ScanOptions& opts = {},
                           std::vector<TraceEvent> trace = {})
{
    ApkArchive archive = open_apk(apk_bytes, apk_id);
    FactBase fb = extract_facts(archive, std::move(trace));
    DetectionSet ds = scan(fb, pack, opts);

    std::vector<std::string> warning_texts;
    for (const auto& w : fb.warnings) {
        warning_texts.push_back(w.code + ": " + w.message);
    }
    auto [simple, detail] =
        summarize(ds, apk_id, sha256_hex(apk_bytes), std::move(warning_texts));

    ScanResult result;
    result.had_warnings = !fb.warnings.empty();
    result.simple = std::move(simple);
    result.detail = std::move(detail);
    return result;
}

/// The per-APK report document: the simple report, plus the detail report
/// when requested.
inline std::string report_document(const ScanResult& r, bool detail)
{
    nlohmann::ordered_json doc;
    doc["simple"] = report_json::simple_to_json(r.simple);
    if (detail) {
        doc["detail"] = report_json::detail_to_json(r.detail);
    }
    return doc.dump(2) + "\n";
}

}  // namespace arascan
