#pragma once

#include <zlib.h>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/dex_opcodes.hpp"
#include "arascan/diag.hpp"

namespace arascan {

struct MethodRef {
    std::string class_desc;
    std::string name;
    std::string proto;  // shorthand descriptor text, e.g. "(Ljava/lang/String;)Z"

    std::string canonical() const { return class_desc + "->" + name + proto; }

    auto operator<=>(const MethodRef&) const = default;
};

struct FieldRef {
    std::string class_desc;
    std::string name;
    std::string type_desc;

    std::string canonical() const { return class_desc + "->" + name + ":" + type_desc; }

    auto operator<=>(const FieldRef&) const = default;
};

struct MethodBody {
    MethodRef owner;
    // offsets are 16-bit code-unit positions within the owning code item
    std::vector<std::pair<MethodRef, uint32_t>> invokes;
    std::vector<std::pair<std::string, uint32_t>> const_strings;
    std::vector<std::pair<FieldRef, uint32_t>> field_refs;
};

namespace dex {

struct EncodedMethod {
    uint32_t method_idx = 0;
    uint32_t access_flags = 0;
    uint32_t code_off = 0;
};

struct ClassDef {
    std::string descriptor;
    uint32_t access_flags = 0;
    std::vector<EncodedMethod> direct_methods;
    std::vector<EncodedMethod> virtual_methods;
};

}  // namespace dex

struct DexFile {
    std::string source;  // archive entry path, diagnostics only
    std::vector<std::string> strings;
    std::vector<std::string> types;
    std::vector<std::string> protos;  // rendered shorthand per proto_id
    std::vector<FieldRef> fields;
    std::vector<MethodRef> methods;
    std::vector<dex::ClassDef> classes;
    Bytes raw;
    Warnings warnings;
};

struct ProgramFacts {
    std::vector<MethodBody> bodies;
    std::set<std::string> global_strings;
    std::set<MethodRef> defined_methods;
    Warnings warnings;
};

namespace dex {

inline constexpr uint32_t kEndianConstant = 0x12345678;
inline constexpr uint32_t kNoIndex = 0xffffffff;

inline bool check_magic(ByteView bytes)
{
    if (bytes.size() < 8) {
        return false;
    }
    if (bytes[0] != 'd' || bytes[1] != 'e' || bytes[2] != 'x' || bytes[3] != '\n' ||
        bytes[7] != 0) {
        return false;
    }
    // versions 035 through 041
    std::string ver(bytes.begin() + 4, bytes.begin() + 7);
    return ver >= "035" && ver <= "041" && ver[0] == '0';
}

inline std::string read_string_data(ByteView bytes, uint32_t off)
{
    ByteReader r(bytes, off);
    r.uleb128();  // utf16 length, not needed for verbatim extraction
    return r.c_str();
}

}  // namespace dex

/// Decodes the id tables of one dex file. The adler checksum is advisory:
/// hostile files corrupt it on purpose, so a mismatch only warns.
inline DexFile parse_dex(ByteView bytes, std::string source = "classes.dex")
{
    if (!dex::check_magic(bytes)) {
        throw MalformedDex("bad dex magic", 0);
    }
    DexFile dx;
    dx.source = std::move(source);
    dx.raw.assign(bytes.begin(), bytes.end());

    try {
        ByteReader hdr(bytes, 8);
        uint32_t checksum = hdr.u32();
        hdr.skip(20);  // signature
        uint32_t file_size = hdr.u32();
        uint32_t header_size = hdr.u32();
        uint32_t endian_tag = hdr.u32();
        if (endian_tag != dex::kEndianConstant) {
            throw MalformedDex("unsupported endianness", 0x28);
        }
        if (header_size < 0x70) {
            throw MalformedDex("header too small", 0x24);
        }
        if (file_size != bytes.size()) {
            warn(dx.warnings, "dex.file_size",
                 dx.source + ": header file_size disagrees with input length");
        }
        uLong adler = adler32(1, bytes.data() + 12, static_cast<uInt>(bytes.size() - 12));
        if (static_cast<uint32_t>(adler) != checksum) {
            warn(dx.warnings, "dex.checksum", dx.source + ": adler32 checksum mismatch");
        }

        hdr.skip(4 + 4);  // link_size, link_off
        hdr.u32();        // map_off
        uint32_t string_ids_size = hdr.u32();
        uint32_t string_ids_off = hdr.u32();
        uint32_t type_ids_size = hdr.u32();
        uint32_t type_ids_off = hdr.u32();
        uint32_t proto_ids_size = hdr.u32();
        uint32_t proto_ids_off = hdr.u32();
        uint32_t field_ids_size = hdr.u32();
        uint32_t field_ids_off = hdr.u32();
        uint32_t method_ids_size = hdr.u32();
        uint32_t method_ids_off = hdr.u32();
        uint32_t class_defs_size = hdr.u32();
        uint32_t class_defs_off = hdr.u32();

        // strings
        dx.strings.reserve(string_ids_size);
        {
            ByteReader ids(bytes, string_ids_off);
            for (uint32_t i = 0; i < string_ids_size; ++i) {
                uint32_t off = ids.u32();
                dx.strings.push_back(dex::read_string_data(bytes, off));
            }
        }
        for (size_t i = 1; i < dx.strings.size(); ++i) {
            if (dx.strings[i - 1] >= dx.strings[i]) {
                warn(dx.warnings, "dex.string_order",
                     dx.source + ": string pool not sorted at index " + std::to_string(i));
                break;
            }
        }

        auto string_at = [&](uint32_t idx, size_t where) -> const std::string& {
            if (idx >= dx.strings.size()) {
                throw MalformedDex("string index out of range", where);
            }
            return dx.strings[idx];
        };

        // types
        {
            ByteReader ids(bytes, type_ids_off);
            for (uint32_t i = 0; i < type_ids_size; ++i) {
                size_t where = ids.pos();
                dx.types.push_back(string_at(ids.u32(), where));
            }
        }
        auto type_at = [&](uint32_t idx, size_t where) -> const std::string& {
            if (idx >= dx.types.size()) {
                throw MalformedDex("type index out of range", where);
            }
            return dx.types[idx];
        };

        // protos, rendered to "(params)ret"
        {
            ByteReader ids(bytes, proto_ids_off);
            for (uint32_t i = 0; i < proto_ids_size; ++i) {
                size_t where = ids.pos();
                ids.u32();  // shorty
                uint32_t return_idx = ids.u32();
                uint32_t params_off = ids.u32();
                std::string text = "(";
                if (params_off != 0) {
                    ByteReader tl(bytes, params_off);
                    uint32_t n = tl.u32();
                    for (uint32_t p = 0; p < n; ++p) {
                        text += type_at(tl.u16(), where);
                    }
                }
                text += ")";
                text += type_at(return_idx, where);
                dx.protos.push_back(std::move(text));
            }
        }

        // fields
        {
            ByteReader ids(bytes, field_ids_off);
            for (uint32_t i = 0; i < field_ids_size; ++i) {
                size_t where = ids.pos();
                uint16_t class_idx = ids.u16();
                uint16_t type_idx = ids.u16();
                uint32_t name_idx = ids.u32();
                dx.fields.push_back(FieldRef{type_at(class_idx, where),
                                             string_at(name_idx, where),
                                             type_at(type_idx, where)});
            }
        }

        // methods
        {
            ByteReader ids(bytes, method_ids_off);
            for (uint32_t i = 0; i < method_ids_size; ++i) {
                size_t where = ids.pos();
                uint16_t class_idx = ids.u16();
                uint16_t proto_idx = ids.u16();
                uint32_t name_idx = ids.u32();
                if (proto_idx >= dx.protos.size()) {
                    throw MalformedDex("proto index out of range", where);
                }
                dx.methods.push_back(MethodRef{type_at(class_idx, where),
                                               string_at(name_idx, where),
                                               dx.protos[proto_idx]});
            }
        }

        // class defs and their encoded method lists
        {
            ByteReader defs(bytes, class_defs_off);
            for (uint32_t i = 0; i < class_defs_size; ++i) {
                size_t where = defs.pos();
                dex::ClassDef cd;
                cd.descriptor = type_at(defs.u32(), where);
                cd.access_flags = defs.u32();
                defs.skip(4 + 4 + 4 + 4);  // superclass, interfaces, source, annotations
                uint32_t class_data_off = defs.u32();
                defs.skip(4);  // static values
                if (class_data_off != 0) {
                    ByteReader cdata(bytes, class_data_off);
                    uint32_t static_fields = cdata.uleb128();
                    uint32_t instance_fields = cdata.uleb128();
                    uint32_t direct_methods = cdata.uleb128();
                    uint32_t virtual_methods = cdata.uleb128();
                    for (uint32_t f = 0; f < static_fields + instance_fields; ++f) {
                        cdata.uleb128();  // field_idx_diff
                        cdata.uleb128();  // access_flags
                    }
                    auto read_methods = [&](uint32_t count,
                                            std::vector<dex::EncodedMethod>& out) {
                        uint32_t idx = 0;
                        for (uint32_t m = 0; m < count; ++m) {
                            idx += cdata.uleb128();
                            dex::EncodedMethod em;
                            em.method_idx = idx;
                            em.access_flags = cdata.uleb128();
                            em.code_off = cdata.uleb128();
                            if (em.method_idx >= dx.methods.size()) {
                                throw MalformedDex("encoded method index out of range",
                                                   cdata.pos());
                            }
                            out.push_back(em);
                        }
                    };
                    read_methods(direct_methods, cd.direct_methods);
                    read_methods(virtual_methods, cd.virtual_methods);
                }
                dx.classes.push_back(std::move(cd));
            }
        }
    } catch (const TruncatedInput& t) {
        throw MalformedDex("truncated dex structure", t.offset);
    }
    return dx;
}

namespace dex {

/// Width of a nop-channel payload pseudo-instruction, in code units.
inline std::optional<uint32_t> payload_units(const uint16_t* units, uint32_t remaining)
{
    switch (units[0]) {
    case 0x0100:  // packed-switch-payload
        if (remaining < 2) return std::nullopt;
        return static_cast<uint32_t>(units[1]) * 2 + 4;
    case 0x0200:  // sparse-switch-payload
        if (remaining < 2) return std::nullopt;
        return static_cast<uint32_t>(units[1]) * 4 + 2;
    case 0x0300: {  // fill-array-data-payload
        if (remaining < 4) return std::nullopt;
        uint32_t width = units[1];
        uint32_t size = static_cast<uint32_t>(units[2]) |
                        static_cast<uint32_t>(units[3]) << 16;
        uint64_t data_units = (static_cast<uint64_t>(size) * width + 1) / 2;
        return static_cast<uint32_t>(data_units + 4);
    }
    default:
        return std::nullopt;
    }
}

inline MethodBody decode_one_body(const DexFile& dx, const MethodRef& owner,
                                  uint32_t code_off, Warnings& warnings)
{
    ByteReader hdr(dx.raw, code_off);
    hdr.skip(2 + 2 + 2 + 2 + 4);  // registers, ins, outs, tries, debug_info
    uint32_t insns_size = hdr.u32();
    if (hdr.pos() + static_cast<size_t>(insns_size) * 2 > dx.raw.size()) {
        throw MalformedBody(owner.canonical() + ": instruction stream overruns file");
    }
    std::vector<uint16_t> units(insns_size);
    for (uint32_t i = 0; i < insns_size; ++i) {
        units[i] = static_cast<uint16_t>(dx.raw[hdr.pos() + 2 * i]) |
                   static_cast<uint16_t>(dx.raw[hdr.pos() + 2 * i + 1]) << 8;
    }

    MethodBody body;
    body.owner = owner;
    bool warned_unknown = false;
    uint32_t pc = 0;
    while (pc < insns_size) {
        uint16_t unit = units[pc];
        uint8_t op = static_cast<uint8_t>(unit & 0xff);
        uint32_t width;
        OpKind kind = op_table()[op].kind;

        if (op == 0x00 && (unit >> 8) != 0) {
            auto w = payload_units(units.data() + pc, insns_size - pc);
            if (!w) {
                throw MalformedBody(owner.canonical() + ": truncated switch payload");
            }
            width = *w;
            kind = OpKind::None;
        } else {
            width = op_table()[op].units;
        }
        if (pc + width > insns_size) {
            throw MalformedBody(owner.canonical() + ": instruction overruns code item");
        }

        switch (kind) {
        case OpKind::String: {
            uint32_t idx = units[pc + 1];
            if (idx >= dx.strings.size()) {
                throw MalformedBody(owner.canonical() + ": const-string index out of range");
            }
            body.const_strings.emplace_back(dx.strings[idx], pc);
            break;
        }
        case OpKind::StringJumbo: {
            uint32_t idx = static_cast<uint32_t>(units[pc + 1]) |
                           static_cast<uint32_t>(units[pc + 2]) << 16;
            if (idx >= dx.strings.size()) {
                throw MalformedBody(owner.canonical() + ": const-string index out of range");
            }
            body.const_strings.emplace_back(dx.strings[idx], pc);
            break;
        }
        case OpKind::Field: {
            uint32_t idx = units[pc + 1];
            if (idx >= dx.fields.size()) {
                throw MalformedBody(owner.canonical() + ": field index out of range");
            }
            body.field_refs.emplace_back(dx.fields[idx], pc);
            break;
        }
        case OpKind::Invoke:
        case OpKind::InvokePoly: {
            uint32_t idx = units[pc + 1];
            if (idx >= dx.methods.size()) {
                throw MalformedBody(owner.canonical() + ": method index out of range");
            }
            body.invokes.emplace_back(dx.methods[idx], pc);
            break;
        }
        case OpKind::InvokeCustom:
            // call-site payload does not resolve to a method reference
            warn(warnings, "dex.invoke_custom",
                 owner.canonical() + ": invoke-custom target skipped");
            break;
        case OpKind::Unused:
            if (!warned_unknown) {
                warn(warnings, "dex.unknown_opcode",
                     owner.canonical() + ": unknown opcode 0x" + std::to_string(op));
                warned_unknown = true;
            }
            break;
        case OpKind::None:
            break;
        }
        pc += width;
    }
    return body;
}

}  // namespace dex

/// Walks every code item and collects the method-scoped facts the matcher
/// consumes. A malformed body is dropped with a warning; the rest survive.
inline std::vector<MethodBody> decode_bodies(const DexFile& dx_in, Warnings* sink = nullptr)
{
    Warnings local;
    Warnings& warnings = sink ? *sink : local;
    std::vector<MethodBody> bodies;
    for (const auto& cls : dx_in.classes) {
        auto decode_list = [&](const std::vector<dex::EncodedMethod>& methods) {
            for (const auto& em : methods) {
                if (em.code_off == 0) {
                    continue;
                }
                const MethodRef& owner = dx_in.methods[em.method_idx];
                try {
                    bodies.push_back(dex::decode_one_body(dx_in, owner, em.code_off, warnings));
                } catch (const MalformedBody& e) {
                    warn(warnings, "dex.malformed_body", e.what());
                } catch (const TruncatedInput&) {
                    warn(warnings, "dex.malformed_body",
                         owner.canonical() + ": code item out of bounds");
                }
            }
        };
        decode_list(cls.direct_methods);
        decode_list(cls.virtual_methods);
    }
    return bodies;
}

/// Set-union merge across all dex files of one APK.
inline ProgramFacts merge_multidex(const std::vector<DexFile>& dexes)
{
    ProgramFacts facts;
    for (const auto& dx : dexes) {
        facts.warnings.insert(facts.warnings.end(), dx.warnings.begin(), dx.warnings.end());
        for (auto body : decode_bodies(dx, &facts.warnings)) {
            facts.bodies.push_back(std::move(body));
        }
        facts.global_strings.insert(dx.strings.begin(), dx.strings.end());
        for (const auto& cls : dx.classes) {
            for (const auto* list : {&cls.direct_methods, &cls.virtual_methods}) {
                for (const auto& em : *list) {
                    facts.defined_methods.insert(dx.methods[em.method_idx]);
                }
            }
        }
    }
    return facts;
}

}  // namespace arascan
