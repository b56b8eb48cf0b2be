#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"

namespace arascan {

/// Hex byte sequence with "??" wildcards, e.g. "AA ?? CC".
struct BytePattern {
    std::vector<std::optional<uint8_t>> bytes;
    std::string text;  // original form, kept for serialization

    static BytePattern parse(const std::string& text)
    {
        BytePattern p;
        p.text = text;
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) {
            if (tok == "??") {
                p.bytes.push_back(std::nullopt);
                continue;
            }
            if (tok.size() != 2 || !isxdigit(static_cast<unsigned char>(tok[0])) ||
                !isxdigit(static_cast<unsigned char>(tok[1]))) {
                throw std::invalid_argument("bad byte pattern token: " + tok);
            }
            p.bytes.push_back(static_cast<uint8_t>(std::stoul(tok, nullptr, 16)));
        }
        if (p.bytes.size() < 2) {
            throw std::invalid_argument("byte pattern must be at least 2 bytes");
        }
        bool anchored = false;
        for (const auto& b : p.bytes) {
            if (b) {
                anchored = true;
            }
        }
        if (!anchored) {
            throw std::invalid_argument("byte pattern must contain a non-wildcard byte");
        }
        return p;
    }
};

/// All offsets where every non-wildcard byte matches; overlapping matches
/// included. The scan anchors on the first fixed byte to skip fast.
inline std::vector<size_t> scan_bytes(ByteView data, const BytePattern& pattern)
{
    std::vector<size_t> hits;
    size_t m = pattern.bytes.size();
    if (m == 0 || data.size() < m) {
        return hits;
    }
    size_t anchor = 0;
    while (anchor < m && !pattern.bytes[anchor]) {
        ++anchor;
    }
    uint8_t anchor_byte = *pattern.bytes[anchor];

    for (size_t base = 0; base + m <= data.size();) {
        const void* found = memchr(data.data() + base + anchor, anchor_byte,
                                   data.size() - m + 1 - base);
        if (found == nullptr) {
            break;
        }
        size_t pos = static_cast<const uint8_t*>(found) - data.data();
        size_t start = pos - anchor;
        if (start + m > data.size()) {
            break;
        }
        bool ok = true;
        for (size_t i = 0; i < m; ++i) {
            if (pattern.bytes[i] && data[start + i] != *pattern.bytes[i]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            hits.push_back(start);
        }
        base = start + 1;
    }
    return hits;
}

}  // namespace arascan
