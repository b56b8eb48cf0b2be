#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/diag.hpp"
#include "arascan/zip.hpp"

namespace arascan {

enum class SigningScheme { V1, V2PLUS };

inline std::string to_string(SigningScheme s)
{
    return s == SigningScheme::V1 ? "V1" : "V2PLUS";
}

struct SigningFacts {
    std::set<SigningScheme> schemes;
    std::vector<std::string> cert_entries;

    bool operator==(const SigningFacts&) const = default;
};

struct ArchiveEntry {
    std::string path;
    size_t size_bytes = 0;
    Bytes data;
    bool decode_failed = false;

    bool operator==(const ArchiveEntry&) const = default;
};

struct ApkArchive {
    std::string source_id;
    std::vector<ArchiveEntry> entries;
    SigningFacts signing;
    Warnings warnings;

    const ArchiveEntry* find(const std::string& path) const
    {
        for (const auto& e : entries) {
            if (e.path == path) {
                return &e;
            }
        }
        return nullptr;
    }
};

namespace detail {

/// classes.dex -> 1, classesN.dex -> N, anything else -> nullopt.
inline std::optional<int> dex_sequence(const std::string& path)
{
    if (path == "classes.dex") {
        return 1;
    }
    const std::string prefix = "classes";
    const std::string suffix = ".dex";
    if (path.size() <= prefix.size() + suffix.size() ||
        path.compare(0, prefix.size(), prefix) != 0 ||
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) {
        return std::nullopt;
    }
    int n = 0;
    for (size_t i = prefix.size(); i < path.size() - suffix.size(); ++i) {
        if (path[i] < '0' || path[i] > '9') {
            return std::nullopt;
        }
        n = n * 10 + (path[i] - '0');
    }
    return n >= 2 ? std::optional<int>(n) : std::nullopt;
}

inline bool has_elf_magic(const Bytes& data)
{
    return data.size() >= 4 && data[0] == 0x7f && data[1] == 'E' && data[2] == 'L' &&
           data[3] == 'F';
}

}  // namespace detail

/// Locates the signing-block magic directly before the central directory and
/// checks the block's two size fields agree; scheme presence only, no
/// cryptographic verification.
inline SigningFacts detect_signing(ByteView bytes)
{
    SigningFacts facts;
    auto eocd = zip::find_eocd(bytes);
    if (!eocd) {
        return facts;
    }

    // V1: any certificate entry under META-INF/.
    try {
        for (const auto& e : zip::read_central_directory(bytes, *eocd)) {
            if (e.path.rfind("META-INF/", 0) != 0) {
                continue;
            }
            auto dot = e.path.rfind('.');
            if (dot == std::string::npos) {
                continue;
            }
            std::string ext = to_lower(e.path.substr(dot + 1));
            if (ext == "rsa" || ext == "dsa" || ext == "ec") {
                facts.cert_entries.push_back(e.path);
            }
        }
    } catch (const MalformedArchive&) {
        // Ignore: signing detection never fails on its own.
    }
    if (!facts.cert_entries.empty()) {
        facts.schemes.insert(SigningScheme::V1);
    }

    // V2+: "APK Sig Block 42" must sit immediately before the central
    // directory, with matching size fields bracketing the block.
    static const std::string magic = "APK Sig Block 42";
    size_t cd = eocd->cd_offset;
    if (cd >= magic.size() + 24 && cd <= bytes.size()) {
        size_t magic_off = cd - magic.size();
        if (std::equal(magic.begin(), magic.end(), bytes.begin() + magic_off)) {
            ByteReader tail(bytes, cd - 24);
            uint64_t size_in_footer = tail.u64();
            // size excludes the leading size field itself
            if (size_in_footer >= 24 && size_in_footer <= cd &&
                cd >= size_in_footer + 8) {
                size_t block_start = cd - size_in_footer - 8;
                ByteReader head(bytes, block_start);
                if (head.u64() == size_in_footer) {
                    facts.schemes.insert(SigningScheme::V2PLUS);
                }
            }
        }
    }
    return facts;
}

/// Enumerates the archive through the central directory and loads every
/// entry. Per-entry decode failures become warnings; the rest of the archive
/// stays usable.
inline ApkArchive open_apk(ByteView bytes, std::string source_id = "")
{
    if (bytes.empty()) {
        throw MalformedArchive("empty input");
    }
    auto eocd = zip::find_eocd(bytes);
    if (!eocd) {
        throw MalformedArchive("no end-of-central-directory record");
    }

    ApkArchive archive;
    archive.source_id = std::move(source_id);

    std::set<std::string> seen;
    for (const auto& ce : zip::read_central_directory(bytes, *eocd)) {
        if (!seen.insert(ce.path).second) {
            warn(archive.warnings, "zip.duplicate_path",
                 "duplicate entry path ignored: " + ce.path);
            continue;
        }
        ArchiveEntry entry;
        entry.path = ce.path;
        entry.size_bytes = ce.uncompressed_size;
        try {
            entry.data = zip::read_entry_data(bytes, ce);
            if (entry.data.size() != entry.size_bytes) {
                warn(archive.warnings, "zip.size_mismatch",
                     "entry size disagrees with central directory: " + ce.path);
                entry.size_bytes = entry.data.size();
            }
        } catch (const EntryDecodeError& err) {
            warn(archive.warnings, "zip.entry_decode", err.what());
            entry.decode_failed = true;
        }
        archive.entries.push_back(std::move(entry));
    }

    if (archive.find("AndroidManifest.xml") == nullptr) {
        warn(archive.warnings, "apk.no_manifest", "archive has no AndroidManifest.xml");
    }
    archive.signing = detect_signing(bytes);
    return archive;
}

/// Dex entries in canonical order: classes.dex, classes2.dex, ... classesN.dex.
inline std::vector<ArchiveEntry> list_dex(const ApkArchive& archive)
{
    std::vector<std::pair<int, ArchiveEntry>> found;
    for (const auto& e : archive.entries) {
        if (auto n = detail::dex_sequence(e.path)) {
            found.emplace_back(*n, e);
        }
    }
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ArchiveEntry> out;
    out.reserve(found.size());
    for (auto& [n, e] : found) {
        out.push_back(std::move(e));
    }
    return out;
}

/// Everything under lib/ with an .so suffix, plus any entry that is ELF by
/// magic regardless of its path (packers hide native code in assets).
inline std::vector<ArchiveEntry> list_native_libs(const ApkArchive& archive)
{
    std::vector<ArchiveEntry> out;
    for (const auto& e : archive.entries) {
        bool lib_so = e.path.rfind("lib/", 0) == 0 && e.path.size() > 3 &&
                      e.path.compare(e.path.size() - 3, 3, ".so") == 0;
        if (lib_so || detail::has_elf_magic(e.data)) {
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace arascan
