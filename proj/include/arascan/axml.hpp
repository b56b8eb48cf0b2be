#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/diag.hpp"

namespace arascan {

enum class Tri { True, False, Unset };

inline std::string to_string(Tri t)
{
    switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    default: return "unset";
    }
}

struct ManifestAttr {
    std::string element_path;  // slash-joined element names rooted at "manifest"
    std::string attr_name;     // namespace prefix normalized away
    std::string value;

    bool operator==(const ManifestAttr&) const = default;
};

struct ManifestComponent {
    std::string kind;  // activity | service | receiver | provider
    std::string name;

    bool operator==(const ManifestComponent&) const = default;
};

struct ManifestFacts {
    std::string package_name;
    Tri debuggable = Tri::Unset;
    std::vector<ManifestAttr> attributes;
    std::vector<ManifestComponent> components;
    Warnings warnings;
};

/// First matching attribute value in document order.
inline std::optional<std::string> query_attr(const ManifestFacts& facts,
                                             const std::string& element_path,
                                             const std::string& attr_name)
{
    for (const auto& a : facts.attributes) {
        if (a.element_path == element_path && a.attr_name == attr_name) {
            return a.value;
        }
    }
    return std::nullopt;
}

namespace axml {

inline constexpr uint16_t kResXml = 0x0003;
inline constexpr uint16_t kResStringPool = 0x0001;
inline constexpr uint16_t kResXmlResourceMap = 0x0180;
inline constexpr uint16_t kResXmlStartNamespace = 0x0100;
inline constexpr uint16_t kResXmlEndNamespace = 0x0101;
inline constexpr uint16_t kResXmlStartElement = 0x0102;
inline constexpr uint16_t kResXmlEndElement = 0x0103;
inline constexpr uint16_t kResXmlCdata = 0x0104;

inline constexpr uint8_t kTypeReference = 0x01;
inline constexpr uint8_t kTypeString = 0x03;
inline constexpr uint8_t kTypeIntDec = 0x10;
inline constexpr uint8_t kTypeIntHex = 0x11;
inline constexpr uint8_t kTypeIntBool = 0x12;

inline std::string utf16le_to_utf8(ByteView units16)
{
    std::string out;
    size_t n = units16.size() / 2;
    for (size_t i = 0; i < n; ++i) {
        uint32_t cp = static_cast<uint32_t>(units16[2 * i]) |
                      static_cast<uint32_t>(units16[2 * i + 1]) << 8;
        if (cp >= 0xd800 && cp <= 0xdbff && i + 1 < n) {
            uint32_t lo = static_cast<uint32_t>(units16[2 * i + 2]) |
                          static_cast<uint32_t>(units16[2 * i + 3]) << 8;
            if (lo >= 0xdc00 && lo <= 0xdfff) {
                cp = 0x10000 + ((cp - 0xd800) << 10) + (lo - 0xdc00);
                ++i;
            }
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
    return out;
}

/// Both string pool encodings: UTF-16LE and the UTF-8 variant flagged by bit 8.
inline std::vector<std::string> read_string_pool(ByteView data, size_t chunk_off,
                                                 uint32_t chunk_size)
{
    ByteReader r(data, chunk_off + 8);
    uint32_t string_count = r.u32();
    r.u32();  // style_count
    uint32_t flags = r.u32();
    bool utf8 = (flags & 0x100) != 0;
    uint32_t strings_start = r.u32();
    r.u32();  // styles_start

    std::vector<uint32_t> offsets(string_count);
    for (auto& off : offsets) {
        off = r.u32();
    }

    std::vector<std::string> pool;
    pool.reserve(string_count);
    for (uint32_t off : offsets) {
        size_t pos = chunk_off + strings_start + off;
        if (pos >= chunk_off + chunk_size || pos >= data.size()) {
            throw MalformedManifest("string data offset out of range", pos);
        }
        ByteReader sr(data, pos);
        if (utf8) {
            uint32_t u16len = sr.u8();
            if (u16len & 0x80) {
                u16len = ((u16len & 0x7f) << 8) | sr.u8();
            }
            uint32_t bytelen = sr.u8();
            if (bytelen & 0x80) {
                bytelen = ((bytelen & 0x7f) << 8) | sr.u8();
            }
            pool.push_back(sr.ascii(bytelen));
        } else {
            uint32_t len = sr.u16();
            if (len & 0x8000) {
                len = ((len & 0x7fff) << 16) | sr.u16();
            }
            pool.push_back(utf16le_to_utf8(sr.view(len * 2)));
        }
    }
    return pool;
}

}  // namespace axml

namespace detail {

inline const std::string& pool_at(const std::vector<std::string>& pool, uint32_t idx,
                                  size_t where)
{
    if (idx >= pool.size()) {
        throw MalformedManifest("string index out of range", where);
    }
    return pool[idx];
}

inline std::string strip_prefix(const std::string& name)
{
    auto colon = name.rfind(':');
    return colon == std::string::npos ? name : name.substr(colon + 1);
}

inline void finalize_facts(ManifestFacts& facts)
{
    for (const auto& a : facts.attributes) {
        if (a.element_path == "manifest" && a.attr_name == "package") {
            facts.package_name = a.value;
            break;
        }
    }
    if (auto v = query_attr(facts, "manifest/application", "debuggable")) {
        facts.debuggable = *v == "true" ? Tri::True : Tri::False;
    }
    for (const auto& a : facts.attributes) {
        for (const char* kind : {"activity", "service", "receiver", "provider"}) {
            if (a.element_path == std::string("manifest/application/") + kind &&
                a.attr_name == "name") {
                facts.components.push_back(ManifestComponent{kind, a.value});
            }
        }
    }
}

inline ManifestFacts decode_binary_manifest(ByteView bytes)
{
    ManifestFacts facts;
    ByteReader r(bytes, 0);
    r.u16();  // RES_XML_TYPE, checked by caller
    uint16_t header_size = r.u16();
    uint32_t total_size = r.u32();
    if (total_size > bytes.size() || header_size < 8) {
        throw MalformedManifest("bad document chunk size", 0);
    }

    std::vector<std::string> pool;
    std::vector<std::string> path;

    size_t pos = header_size;
    while (pos + 8 <= total_size) {
        ByteReader cr(bytes, pos);
        uint16_t type = cr.u16();
        uint16_t chdr = cr.u16();
        uint32_t csize = cr.u32();
        if (csize < 8 || pos + csize > total_size || chdr > csize) {
            throw MalformedManifest("bad chunk size", pos);
        }
        switch (type) {
        case axml::kResStringPool:
            pool = axml::read_string_pool(bytes, pos, csize);
            break;
        case axml::kResXmlStartElement: {
            cr.skip(4 + 4);  // line, comment
            cr.u32();        // element namespace
            uint32_t name_idx = cr.u32();
            size_t ext_start = pos + chdr;
            ByteReader er(bytes, ext_start + 8);
            uint16_t attr_start = er.u16();
            uint16_t attr_size = er.u16();
            uint16_t attr_count = er.u16();
            std::string name = pool_at(pool, name_idx, pos);
            path.push_back(name);
            std::string joined;
            for (size_t i = 0; i < path.size(); ++i) {
                joined += (i ? "/" : "") + path[i];
            }
            if (attr_size < 20) {
                throw MalformedManifest("attribute record too small", pos);
            }
            for (uint16_t i = 0; i < attr_count; ++i) {
                ByteReader ar(bytes, ext_start + attr_start + i * attr_size);
                ar.u32();  // attr namespace
                uint32_t aname = ar.u32();
                uint32_t raw_value = ar.u32();
                ar.u16();  // typed value size
                ar.u8();   // res0
                uint8_t data_type = ar.u8();
                uint32_t data = ar.u32();

                std::string value;
                if (raw_value != 0xffffffff) {
                    value = pool_at(pool, raw_value, pos);
                } else {
                    switch (data_type) {
                    case axml::kTypeString:
                        value = pool_at(pool, data, pos);
                        break;
                    case axml::kTypeIntBool:
                        value = data != 0 ? "true" : "false";
                        break;
                    case axml::kTypeIntHex: {
                        char buf[16];
                        std::snprintf(buf, sizeof buf, "0x%x", data);
                        value = buf;
                        break;
                    }
                    case axml::kTypeReference: {
                        // resource references are kept as raw reference text
                        char buf[16];
                        std::snprintf(buf, sizeof buf, "@0x%08x", data);
                        value = buf;
                        break;
                    }
                    case axml::kTypeIntDec:
                    default:
                        value = std::to_string(data);
                        break;
                    }
                }
                facts.attributes.push_back(ManifestAttr{
                    joined, strip_prefix(pool_at(pool, aname, pos)), value});
            }
            break;
        }
        case axml::kResXmlEndElement:
            if (!path.empty()) {
                path.pop_back();
            }
            break;
        case axml::kResXmlStartNamespace:
        case axml::kResXmlEndNamespace:
        case axml::kResXmlCdata:
        case axml::kResXmlResourceMap:
            break;
        default:
            // unknown chunk types are skipped by their declared size
            warn(facts.warnings, "axml.unknown_chunk",
                 "skipped chunk type 0x" + std::to_string(type));
            break;
        }
        pos += csize;
    }
    finalize_facts(facts);
    return facts;
}

/// Minimal plain-text XML fallback so rule authors can test with hand-written
/// manifests. Elements, attributes, comments, and the five standard entities.
inline ManifestFacts decode_text_manifest(const std::string& text)
{
    ManifestFacts facts;
    std::vector<std::string> path;

    auto decode_entities = [](const std::string& s) {
        std::string out;
        for (size_t i = 0; i < s.size();) {
            if (s[i] != '&') {
                out += s[i++];
                continue;
            }
            auto semi = s.find(';', i);
            std::string ent = semi == std::string::npos ? "" : s.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else { out += s[i++]; continue; }
            i = semi + 1;
        }
        return out;
    };

    size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            auto end = text.find("-->", i);
            if (end == std::string::npos) {
                throw MalformedManifest("unterminated comment", i);
            }
            i = end + 3;
            continue;
        }
        if (text.compare(i, 2, "<?") == 0) {
            auto end = text.find("?>", i);
            if (end == std::string::npos) {
                throw MalformedManifest("unterminated processing instruction", i);
            }
            i = end + 2;
            continue;
        }
        auto close = text.find('>', i);
        if (close == std::string::npos) {
            throw MalformedManifest("unterminated tag", i);
        }
        std::string tag = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) {
            continue;
        }
        if (tag[0] == '/') {
            if (!path.empty()) {
                path.pop_back();
            }
            continue;
        }
        bool self_closing = tag.back() == '/';
        if (self_closing) {
            tag.pop_back();
        }
        size_t p = 0;
        while (p < tag.size() && !isspace(static_cast<unsigned char>(tag[p]))) {
            ++p;
        }
        std::string name = strip_prefix(tag.substr(0, p));
        path.push_back(name);
        std::string joined;
        for (size_t k = 0; k < path.size(); ++k) {
            joined += (k ? "/" : "") + path[k];
        }

        while (p < tag.size()) {
            while (p < tag.size() && isspace(static_cast<unsigned char>(tag[p]))) {
                ++p;
            }
            size_t eq = tag.find('=', p);
            if (eq == std::string::npos) {
                break;
            }
            std::string aname = strip_prefix(tag.substr(p, eq - p));
            size_t q1 = tag.find_first_of("\"'", eq);
            if (q1 == std::string::npos) {
                throw MalformedManifest("attribute value not quoted", i);
            }
            size_t q2 = tag.find(tag[q1], q1 + 1);
            if (q2 == std::string::npos) {
                throw MalformedManifest("unterminated attribute value", i);
            }
            facts.attributes.push_back(ManifestAttr{
                joined, aname, decode_entities(tag.substr(q1 + 1, q2 - q1 - 1))});
            p = q2 + 1;
        }
        if (self_closing) {
            path.pop_back();
        }
    }
    finalize_facts(facts);
    return facts;
}

}  // namespace detail

/// Decodes AndroidManifest.xml bytes, binary or plain text.
inline ManifestFacts decode_manifest(ByteView bytes)
{
    try {
        if (bytes.size() >= 4) {
            uint16_t type = static_cast<uint16_t>(bytes[0]) |
                            static_cast<uint16_t>(bytes[1]) << 8;
            if (type == axml::kResXml) {
                return detail::decode_binary_manifest(bytes);
            }
        }
        return detail::decode_text_manifest(std::string(bytes.begin(), bytes.end()));
    } catch (const TruncatedInput& t) {
        throw MalformedManifest("truncated manifest", t.offset);
    }
}

}  // namespace arascan
