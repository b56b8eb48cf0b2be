#pragma once

#include <zlib.h>

#include <string>
#include <vector>

#include "arascan/bytes.hpp"

namespace arascan::fixtures {

/// Deterministic ZIP emitter for synthetic APKs. Entries are stored
/// uncompressed with a fixed DOS timestamp; an APK signing block can be
/// spliced between the entry data and the central directory.
class ZipWriter {
public:
    struct Entry {
        std::string path;
        Bytes data;
        // When set, the entry claims deflate but carries these raw bytes;
        // used to craft deliberately undecodable entries.
        bool corrupt_deflate = false;
    };

    void add(std::string path, Bytes data)
    {
        entries_.push_back(Entry{std::move(path), std::move(data), false});
    }

    void add(std::string path, const std::string& text)
    {
        entries_.push_back(
            Entry{std::move(path), Bytes(text.begin(), text.end()), false});
    }

    void add_corrupt_deflate(std::string path, Bytes garbage)
    {
        entries_.push_back(Entry{std::move(path), std::move(garbage), true});
    }

    /// Emits a structurally plausible v2+ signing block before the central
    /// directory. Pair ID 0x7109871a marks the scheme-v2 slot; the payload is
    /// an opaque stub since only presence is detected.
    void add_signing_block_stub() { signing_block_ = true; }

    Bytes finish() const
    {
        ByteWriter out;
        struct Located {
            const Entry* e;
            uint32_t offset;
            uint32_t crc;
            uint32_t csize;
            uint32_t usize;
            uint16_t method;
        };
        std::vector<Located> located;

        for (const auto& e : entries_) {
            Located loc;
            loc.e = &e;
            loc.offset = static_cast<uint32_t>(out.size());
            loc.method = e.corrupt_deflate ? 8 : 0;
            loc.crc = static_cast<uint32_t>(
                ::crc32(0, e.data.data(), static_cast<uInt>(e.data.size())));
            loc.csize = static_cast<uint32_t>(e.data.size());
            // Claim a larger plaintext than the garbage can inflate to.
            loc.usize = e.corrupt_deflate ? loc.csize + 64
                                          : static_cast<uint32_t>(e.data.size());

            out.u32(0x04034b50);
            out.u16(20);            // version needed
            out.u16(0);             // flags
            out.u16(loc.method);
            out.u16(kDosTime);
            out.u16(kDosDate);
            out.u32(loc.crc);
            out.u32(loc.csize);
            out.u32(loc.usize);
            out.u16(static_cast<uint16_t>(e.path.size()));
            out.u16(0);             // extra len
            out.ascii(e.path);
            out.raw(e.data);
            located.push_back(loc);
        }

        if (signing_block_) {
            static const std::string magic = "APK Sig Block 42";
            Bytes payload = {'s', 't', 'u', 'b', 0, 0, 0, 0};
            // pair: u64 length + u32 id + payload
            uint64_t pair_len = 4 + payload.size();
            uint64_t block_size = 8 + pair_len + 8 + magic.size();
            out.u64(block_size);
            out.u64(pair_len);
            out.u32(0x7109871a);
            out.raw(payload);
            out.u64(block_size);
            out.ascii(magic);
        }

        uint32_t cd_offset = static_cast<uint32_t>(out.size());
        for (const auto& loc : located) {
            out.u32(0x02014b50);
            out.u16(20);            // version made by
            out.u16(20);            // version needed
            out.u16(0);             // flags
            out.u16(loc.method);
            out.u16(kDosTime);
            out.u16(kDosDate);
            out.u32(loc.crc);
            out.u32(loc.csize);
            out.u32(loc.usize);
            out.u16(static_cast<uint16_t>(loc.e->path.size()));
            out.u16(0);             // extra
            out.u16(0);             // comment
            out.u16(0);             // disk start
            out.u16(0);             // internal attrs
            out.u32(0);             // external attrs
            out.u32(loc.offset);
            out.ascii(loc.e->path);
        }
        uint32_t cd_size = static_cast<uint32_t>(out.size()) - cd_offset;

        out.u32(0x06054b50);
        out.u16(0);  // disk
        out.u16(0);  // cd disk
        out.u16(static_cast<uint16_t>(located.size()));
        out.u16(static_cast<uint16_t>(located.size()));
        out.u32(cd_size);
        out.u32(cd_offset);
        out.u16(0);  // comment len
        return out.data();
    }

private:
    static constexpr uint16_t kDosTime = 0x0000;
    static constexpr uint16_t kDosDate = 0x2921;  // 2000-09-01, fixed

    std::vector<Entry> entries_;
    bool signing_block_ = false;
};

}  // namespace arascan::fixtures
