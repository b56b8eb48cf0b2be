#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/diag.hpp"

namespace arascan::zip {

inline constexpr uint32_t kEocdSig = 0x06054b50;
inline constexpr uint32_t kCentralSig = 0x02014b50;
inline constexpr uint32_t kLocalSig = 0x04034b50;

struct CentralEntry {
    std::string path;
    uint16_t method = 0;
    uint32_t crc32 = 0;
    uint32_t compressed_size = 0;
    uint32_t uncompressed_size = 0;
    uint32_t local_offset = 0;
};

struct Eocd {
    uint16_t entry_count = 0;
    uint32_t cd_size = 0;
    uint32_t cd_offset = 0;
    size_t eocd_offset = 0;
};

/// Scans backwards for the end-of-central-directory record. The comment field
/// makes the record position variable, so every candidate signature in the
/// trailing 64 KiB window is checked for self-consistency.
inline std::optional<Eocd> find_eocd(ByteView data)
{
    if (data.size() < 22) {
        return std::nullopt;
    }
    size_t lowest = data.size() >= 22 + 0xffff ? data.size() - 22 - 0xffff : 0;
    for (size_t i = data.size() - 22 + 1; i-- > lowest;) {
        if (data[i] != 0x50 || data[i + 1] != 0x4b || data[i + 2] != 0x05 ||
            data[i + 3] != 0x06) {
            continue;
        }
        ByteReader r(data, i + 4);
        try {
            uint16_t disk = r.u16();
            uint16_t cd_disk = r.u16();
            uint16_t entries_disk = r.u16();
            uint16_t entries_total = r.u16();
            uint32_t cd_size = r.u32();
            uint32_t cd_offset = r.u32();
            uint16_t comment_len = r.u16();
            if (disk != 0 || cd_disk != 0 || entries_disk != entries_total) {
                continue;
            }
            if (i + 22 + comment_len > data.size()) {
                continue;
            }
            return Eocd{entries_total, cd_size, cd_offset, i};
        } catch (const TruncatedInput&) {
            continue;
        }
    }
    return std::nullopt;
}

/// Walks the central directory. Metadata comes from here, never from local
/// headers (standard anti-evasion posture for APK tooling).
inline std::vector<CentralEntry> read_central_directory(ByteView data, const Eocd& eocd)
{
    if (eocd.cd_offset == 0xffffffffu) {
        throw MalformedArchive("zip64 central directory offsets are not supported");
    }
    if (eocd.cd_offset > data.size() ||
        static_cast<size_t>(eocd.cd_offset) + eocd.cd_size > data.size()) {
        throw MalformedArchive("central directory out of bounds");
    }
    std::vector<CentralEntry> entries;
    ByteReader r(data, eocd.cd_offset);
    for (uint16_t i = 0; i < eocd.entry_count; ++i) {
        uint32_t sig;
        try {
            sig = r.u32();
        } catch (const TruncatedInput&) {
            throw MalformedArchive("truncated central directory");
        }
        if (sig != kCentralSig) {
            throw MalformedArchive("bad central directory signature for entry " +
                                   std::to_string(i));
        }
        try {
            r.skip(2 + 2 + 2);  // version made by / needed / flags
            CentralEntry e;
            e.method = r.u16();
            r.skip(2 + 2);  // mtime, mdate
            e.crc32 = r.u32();
            e.compressed_size = r.u32();
            e.uncompressed_size = r.u32();
            uint16_t name_len = r.u16();
            uint16_t extra_len = r.u16();
            uint16_t comment_len = r.u16();
            r.skip(2 + 2 + 4);  // disk start, internal attrs, external attrs
            e.local_offset = r.u32();
            e.path = r.ascii(name_len);
            r.skip(extra_len);
            r.skip(comment_len);
            entries.push_back(std::move(e));
        } catch (const TruncatedInput&) {
            throw MalformedArchive("truncated central directory");
        }
    }
    return entries;
}

inline Bytes inflate_raw(ByteView compressed, size_t expected_size)
{
    Bytes out(expected_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
        throw EntryDecodeError("inflate init failed");
    }
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected_size) {
        throw EntryDecodeError("deflate stream is corrupt");
    }
    return out;
}

/// Extracts one entry's bytes. The data position is resolved through the
/// entry's own local header lengths; sizes and method come from the central
/// directory record.
inline Bytes read_entry_data(ByteView data, const CentralEntry& e)
{
    ByteReader r(data, e.local_offset);
    uint32_t sig;
    try {
        sig = r.u32();
    } catch (const TruncatedInput&) {
        throw EntryDecodeError("local header out of bounds: " + e.path);
    }
    if (sig != kLocalSig) {
        throw EntryDecodeError("bad local header signature: " + e.path);
    }
    try {
        r.skip(2 + 2 + 2 + 2 + 2 + 4 + 4 + 4);  // up to name_len
        uint16_t name_len = r.u16();
        uint16_t extra_len = r.u16();
        r.skip(name_len);
        r.skip(extra_len);
        ByteView payload = r.view(e.compressed_size);
        if (e.method == 0) {
            if (e.compressed_size != e.uncompressed_size) {
                throw EntryDecodeError("stored entry size mismatch: " + e.path);
            }
            return Bytes(payload.begin(), payload.end());
        }
        if (e.method == 8) {
            return inflate_raw(payload, e.uncompressed_size);
        }
        throw EntryDecodeError("unsupported compression method " +
                               std::to_string(e.method) + ": " + e.path);
    } catch (const TruncatedInput&) {
        throw EntryDecodeError("entry data out of bounds: " + e.path);
    }
}

}  // namespace arascan::zip
