#pragma once

#include <zlib.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/dex.hpp"
#include "arascan/hash.hpp"

namespace arascan::fixtures {

/// Planted instructions. Only the handful of shapes the fixtures need.
namespace ins {

struct ConstString {
    std::string value;
};

enum class InvokeKind { Virtual, Super, Direct, Static, Interface };

struct Invoke {
    InvokeKind kind = InvokeKind::Virtual;
    MethodRef callee;
};

struct SGetObject {
    FieldRef field;
};

struct ReturnVoid {};

using Any = std::variant<ConstString, Invoke, SGetObject, ReturnVoid>;

}  // namespace ins

struct MethodSpec {
    std::string name;
    std::string return_desc = "V";
    std::vector<std::string> param_descs;
    std::vector<ins::Any> body;  // return-void appended automatically
};

struct ClassSpec {
    std::string descriptor;
    std::vector<MethodSpec> methods;
};

struct DexSpec {
    std::vector<ClassSpec> classes;
    std::vector<std::string> extra_pool_strings;  // pool-only, no code site
};

/// Emits a minimal, well-formed dex file: sorted id tables, valid adler32 and
/// sha-1 header fields, one code item per non-empty method body. No debug
/// info, annotations, or static values.
class DexWriter {
public:
    explicit DexWriter(const DexSpec& spec) : spec_(spec) {}

    Bytes build()
    {
        collect();
        return emit();
    }

private:
    struct ProtoKey {
        std::string ret;
        std::vector<std::string> params;
        auto operator<=>(const ProtoKey&) const = default;
    };
    struct FieldKey {
        std::string cls, name, type;
        auto operator<=>(const FieldKey&) const = default;
    };
    struct MethodKey {
        std::string cls, name;
        ProtoKey proto;
        auto operator<=>(const MethodKey&) const = default;
    };

    static std::string shorty_char(const std::string& desc)
    {
        char c = desc[0];
        if (c == '[' || c == 'L') {
            return "L";
        }
        return std::string(1, c);
    }

    static std::string shorty_of(const ProtoKey& p)
    {
        std::string s = shorty_char(p.ret);
        for (const auto& d : p.params) {
            s += shorty_char(d);
        }
        return s;
    }

    void note_method(const MethodRef& m)
    {
        ProtoKey proto = parse_proto(m.proto);
        methods_.insert(MethodKey{m.class_desc, m.name, proto});
        note_proto(proto);
        note_type(m.class_desc);
        strings_.insert(m.name);
    }

    void note_field(const FieldRef& f)
    {
        fields_.insert(FieldKey{f.class_desc, f.name, f.type_desc});
        note_type(f.class_desc);
        note_type(f.type_desc);
        strings_.insert(f.name);
    }

    void note_proto(const ProtoKey& p)
    {
        protos_.insert(p);
        note_type(p.ret);
        for (const auto& d : p.params) {
            note_type(d);
        }
        strings_.insert(shorty_of(p));
    }

    void note_type(const std::string& desc)
    {
        types_.insert(desc);
        strings_.insert(desc);
    }

    static ProtoKey parse_proto(const std::string& text)
    {
        // "(<descriptors>)<descriptor>"
        ProtoKey p;
        size_t close = text.rfind(')');
        p.ret = text.substr(close + 1);
        size_t i = 1;
        while (i < close) {
            size_t start = i;
            while (text[i] == '[') {
                ++i;
            }
            if (text[i] == 'L') {
                i = text.find(';', i) + 1;
            } else {
                ++i;
            }
            p.params.push_back(text.substr(start, i - start));
        }
        return p;
    }

    void collect()
    {
        note_type("Ljava/lang/Object;");
        for (const auto& cls : spec_.classes) {
            note_type(cls.descriptor);
            for (const auto& m : cls.methods) {
                ProtoKey proto{m.return_desc, m.param_descs};
                methods_.insert(MethodKey{cls.descriptor, m.name, proto});
                note_proto(proto);
                strings_.insert(m.name);
                for (const auto& i : m.body) {
                    if (const auto* cs = std::get_if<ins::ConstString>(&i)) {
                        strings_.insert(cs->value);
                    } else if (const auto* iv = std::get_if<ins::Invoke>(&i)) {
                        note_method(iv->callee);
                    } else if (const auto* sg = std::get_if<ins::SGetObject>(&i)) {
                        note_field(sg->field);
                    }
                }
            }
        }
        for (const auto& s : spec_.extra_pool_strings) {
            strings_.insert(s);
        }

        string_list_.assign(strings_.begin(), strings_.end());
        for (size_t i = 0; i < string_list_.size(); ++i) {
            string_idx_[string_list_[i]] = static_cast<uint32_t>(i);
        }
        // type ids sorted by descriptor string index == lexical order here
        type_list_.assign(types_.begin(), types_.end());
        for (size_t i = 0; i < type_list_.size(); ++i) {
            type_idx_[type_list_[i]] = static_cast<uint32_t>(i);
        }
        // proto ids sorted by (return type idx, param type idx sequence)
        proto_list_.assign(protos_.begin(), protos_.end());
        std::sort(proto_list_.begin(), proto_list_.end(),
                  [&](const ProtoKey& a, const ProtoKey& b) {
                      auto key = [&](const ProtoKey& p) {
                          std::vector<uint32_t> k{type_idx_.at(p.ret)};
                          for (const auto& d : p.params) {
                              k.push_back(type_idx_.at(d));
                          }
                          return k;
                      };
                      return key(a) < key(b);
                  });
        for (size_t i = 0; i < proto_list_.size(); ++i) {
            proto_idx_[proto_list_[i]] = static_cast<uint32_t>(i);
        }
        field_list_.assign(fields_.begin(), fields_.end());
        std::sort(field_list_.begin(), field_list_.end(),
                  [&](const FieldKey& a, const FieldKey& b) {
                      return std::tuple(type_idx_.at(a.cls), string_idx_.at(a.name),
                                        type_idx_.at(a.type)) <
                             std::tuple(type_idx_.at(b.cls), string_idx_.at(b.name),
                                        type_idx_.at(b.type));
                  });
        for (size_t i = 0; i < field_list_.size(); ++i) {
            field_idx_[field_list_[i]] = static_cast<uint32_t>(i);
        }
        method_list_.assign(methods_.begin(), methods_.end());
        std::sort(method_list_.begin(), method_list_.end(),
                  [&](const MethodKey& a, const MethodKey& b) {
                      return std::tuple(type_idx_.at(a.cls), string_idx_.at(a.name),
                                        proto_idx_.at(a.proto)) <
                             std::tuple(type_idx_.at(b.cls), string_idx_.at(b.name),
                                        proto_idx_.at(b.proto));
                  });
        for (size_t i = 0; i < method_list_.size(); ++i) {
            method_idx_[method_list_[i]] = static_cast<uint32_t>(i);
        }
    }

    Bytes encode_body(const MethodSpec& m)
    {
        ByteWriter code;
        uint16_t outs = 0;
        bool has_return = false;
        for (const auto& i : m.body) {
            if (const auto* cs = std::get_if<ins::ConstString>(&i)) {
                uint32_t idx = string_idx_.at(cs->value);
                if (idx <= 0xffff) {
                    code.u16(0x1a | 0u << 8);  // const-string v0
                    code.u16(static_cast<uint16_t>(idx));
                } else {
                    code.u16(0x1b);  // const-string/jumbo v0
                    code.u16(static_cast<uint16_t>(idx));
                    code.u16(static_cast<uint16_t>(idx >> 16));
                }
            } else if (const auto* iv = std::get_if<ins::Invoke>(&i)) {
                uint8_t op = 0x6e;
                switch (iv->kind) {
                case ins::InvokeKind::Virtual: op = 0x6e; break;
                case ins::InvokeKind::Super: op = 0x6f; break;
                case ins::InvokeKind::Direct: op = 0x70; break;
                case ins::InvokeKind::Static: op = 0x71; break;
                case ins::InvokeKind::Interface: op = 0x72; break;
                }
                MethodKey key{iv->callee.class_desc, iv->callee.name,
                              parse_proto(iv->callee.proto)};
                // one register argument (v0) unless static with no params
                uint8_t argc = iv->kind == ins::InvokeKind::Static &&
                                       key.proto.params.empty()
                                   ? 0
                                   : 1;
                outs = std::max<uint16_t>(outs, argc);
                code.u16(static_cast<uint16_t>(op | (argc << 4) << 8));
                code.u16(static_cast<uint16_t>(method_idx_.at(key)));
                code.u16(0x0000);  // C..F registers, all v0
            } else if (const auto* sg = std::get_if<ins::SGetObject>(&i)) {
                FieldKey key{sg->field.class_desc, sg->field.name, sg->field.type_desc};
                code.u16(0x62);  // sget-object v0
                code.u16(static_cast<uint16_t>(field_idx_.at(key)));
            } else if (std::holds_alternative<ins::ReturnVoid>(i)) {
                code.u16(0x000e);
                has_return = true;
            }
        }
        if (!has_return) {
            code.u16(0x000e);
        }

        ByteWriter item;
        uint16_t ins_count = static_cast<uint16_t>(1 + m.param_descs.size());
        item.u16(std::max<uint16_t>(2, ins_count));  // registers_size
        item.u16(ins_count);                         // ins_size (this + params)
        item.u16(outs);
        item.u16(0);  // tries
        item.u32(0);  // debug_info_off
        item.u32(static_cast<uint32_t>(code.size() / 2));
        item.raw(code.data());
        return item.data();
    }

    Bytes emit()
    {
        ByteWriter out;
        for (int i = 0; i < 0x70; ++i) {
            out.u8(0);  // header placeholder
        }

        uint32_t string_ids_off = static_cast<uint32_t>(out.size());
        size_t string_ids_patch = out.size();
        for (size_t i = 0; i < string_list_.size(); ++i) {
            out.u32(0);
        }

        uint32_t type_ids_off = static_cast<uint32_t>(out.size());
        for (const auto& t : type_list_) {
            out.u32(string_idx_.at(t));
        }

        uint32_t proto_ids_off = static_cast<uint32_t>(out.size());
        size_t proto_ids_patch = out.size();
        for (const auto& p : proto_list_) {
            out.u32(string_idx_.at(shorty_of(p)));
            out.u32(type_idx_.at(p.ret));
            out.u32(0);  // parameters_off, patched
        }

        uint32_t field_ids_off = static_cast<uint32_t>(out.size());
        for (const auto& f : field_list_) {
            out.u16(static_cast<uint16_t>(type_idx_.at(f.cls)));
            out.u16(static_cast<uint16_t>(type_idx_.at(f.type)));
            out.u32(string_idx_.at(f.name));
        }

        uint32_t method_ids_off = static_cast<uint32_t>(out.size());
        for (const auto& m : method_list_) {
            out.u16(static_cast<uint16_t>(type_idx_.at(m.cls)));
            out.u16(static_cast<uint16_t>(proto_idx_.at(m.proto)));
            out.u32(string_idx_.at(m.name));
        }

        uint32_t class_defs_off = static_cast<uint32_t>(out.size());
        size_t class_defs_patch = out.size();
        for (const auto& cls : spec_.classes) {
            out.u32(type_idx_.at(cls.descriptor));
            out.u32(0x0001);  // ACC_PUBLIC
            out.u32(type_idx_.at("Ljava/lang/Object;"));
            out.u32(0);                 // interfaces_off
            out.u32(dex::kNoIndex);     // source_file_idx
            out.u32(0);                 // annotations_off
            out.u32(0);                 // class_data_off, patched
            out.u32(0);                 // static_values_off
        }

        uint32_t data_off = static_cast<uint32_t>(out.size());

        // type lists for protos with parameters
        std::map<std::vector<std::string>, uint32_t> type_list_offs;
        for (const auto& p : proto_list_) {
            if (p.params.empty() || type_list_offs.count(p.params)) {
                continue;
            }
            out.pad_to(4);
            type_list_offs[p.params] = static_cast<uint32_t>(out.size());
            out.u32(static_cast<uint32_t>(p.params.size()));
            for (const auto& d : p.params) {
                out.u16(static_cast<uint16_t>(type_idx_.at(d)));
            }
        }
        uint32_t type_list_first =
            type_list_offs.empty() ? 0 : std::min_element(type_list_offs.begin(),
                                                          type_list_offs.end(),
                                                          [](auto& a, auto& b) {
                                                              return a.second < b.second;
                                                          })
                                             ->second;
        for (size_t i = 0; i < proto_list_.size(); ++i) {
            if (!proto_list_[i].params.empty()) {
                out.patch_u32(proto_ids_patch + 12 * i + 8,
                              type_list_offs.at(proto_list_[i].params));
            }
        }

        // code items
        std::map<const MethodSpec*, uint32_t> code_offs;
        uint32_t code_first = 0;
        uint32_t code_count = 0;
        for (const auto& cls : spec_.classes) {
            for (const auto& m : cls.methods) {
                out.pad_to(4);
                uint32_t off = static_cast<uint32_t>(out.size());
                if (code_first == 0) {
                    code_first = off;
                }
                code_offs[&m] = off;
                out.raw(encode_body(m));
                ++code_count;
            }
        }

        // class data
        std::vector<uint32_t> class_data_offs;
        for (const auto& cls : spec_.classes) {
            uint32_t off = static_cast<uint32_t>(out.size());
            class_data_offs.push_back(off);
            out.uleb128(0);  // static fields
            out.uleb128(0);  // instance fields
            out.uleb128(0);  // direct methods
            out.uleb128(static_cast<uint32_t>(cls.methods.size()));
            std::vector<std::pair<uint32_t, const MethodSpec*>> ordered;
            for (const auto& m : cls.methods) {
                MethodKey key{cls.descriptor, m.name, ProtoKey{m.return_desc, m.param_descs}};
                ordered.emplace_back(method_idx_.at(key), &m);
            }
            std::sort(ordered.begin(), ordered.end());
            uint32_t prev = 0;
            bool first = true;
            for (const auto& [idx, m] : ordered) {
                out.uleb128(first ? idx : idx - prev);
                out.uleb128(0x0001);  // ACC_PUBLIC
                out.uleb128(code_offs.at(m));
                prev = idx;
                first = false;
            }
        }
        for (size_t i = 0; i < class_data_offs.size(); ++i) {
            out.patch_u32(class_defs_patch + 32 * i + 24, class_data_offs[i]);
        }

        // string data
        uint32_t string_data_first = static_cast<uint32_t>(out.size());
        for (size_t i = 0; i < string_list_.size(); ++i) {
            out.patch_u32(string_ids_patch + 4 * i, static_cast<uint32_t>(out.size()));
            const std::string& s = string_list_[i];
            uint32_t utf16_len = 0;
            for (unsigned char c : s) {
                if ((c & 0xc0) != 0x80) {
                    ++utf16_len;  // BMP-only inputs
                }
            }
            out.uleb128(utf16_len);
            out.ascii(s);
            out.u8(0);
        }

        // map list
        out.pad_to(4);
        uint32_t map_off = static_cast<uint32_t>(out.size());
        struct MapEntry {
            uint16_t type;
            uint32_t size;
            uint32_t offset;
        };
        std::vector<MapEntry> map = {
            {0x0000, 1, 0},
            {0x0001, static_cast<uint32_t>(string_list_.size()), string_ids_off},
            {0x0002, static_cast<uint32_t>(type_list_.size()), type_ids_off},
        };
        if (!proto_list_.empty()) {
            map.push_back({0x0003, static_cast<uint32_t>(proto_list_.size()), proto_ids_off});
        }
        if (!field_list_.empty()) {
            map.push_back({0x0004, static_cast<uint32_t>(field_list_.size()), field_ids_off});
        }
        if (!method_list_.empty()) {
            map.push_back({0x0005, static_cast<uint32_t>(method_list_.size()), method_ids_off});
        }
        if (!spec_.classes.empty()) {
            map.push_back({0x0006, static_cast<uint32_t>(spec_.classes.size()), class_defs_off});
        }
        if (!type_list_offs.empty()) {
            map.push_back({0x1001, static_cast<uint32_t>(type_list_offs.size()), type_list_first});
        }
        if (code_count != 0) {
            map.push_back({0x2001, code_count, code_first});
        }
        if (!class_data_offs.empty()) {
            map.push_back({0x2000, static_cast<uint32_t>(class_data_offs.size()),
                           class_data_offs.front()});
        }
        map.push_back({0x2002, static_cast<uint32_t>(string_list_.size()), string_data_first});
        map.push_back({0x1000, 1, map_off});
        std::sort(map.begin(), map.end(),
                  [](const MapEntry& a, const MapEntry& b) { return a.offset < b.offset; });
        out.u32(static_cast<uint32_t>(map.size()));
        for (const auto& e : map) {
            out.u16(e.type);
            out.u16(0);
            out.u32(e.size);
            out.u32(e.offset);
        }

        // header
        Bytes& buf = out.data();
        uint32_t file_size = static_cast<uint32_t>(buf.size());
        static const uint8_t magic[8] = {'d', 'e', 'x', '\n', '0', '3', '5', 0};
        std::copy(magic, magic + 8, buf.begin());
        out.patch_u32(0x20, file_size);
        out.patch_u32(0x24, 0x70);
        out.patch_u32(0x28, dex::kEndianConstant);
        out.patch_u32(0x2c, 0);  // link_size
        out.patch_u32(0x30, 0);  // link_off
        out.patch_u32(0x34, map_off);
        out.patch_u32(0x38, static_cast<uint32_t>(string_list_.size()));
        out.patch_u32(0x3c, string_ids_off);
        out.patch_u32(0x40, static_cast<uint32_t>(type_list_.size()));
        out.patch_u32(0x44, type_ids_off);
        out.patch_u32(0x48, static_cast<uint32_t>(proto_list_.size()));
        out.patch_u32(0x4c, proto_list_.empty() ? 0 : proto_ids_off);
        out.patch_u32(0x50, static_cast<uint32_t>(field_list_.size()));
        out.patch_u32(0x54, field_list_.empty() ? 0 : field_ids_off);
        out.patch_u32(0x58, static_cast<uint32_t>(method_list_.size()));
        out.patch_u32(0x5c, method_list_.empty() ? 0 : method_ids_off);
        out.patch_u32(0x60, static_cast<uint32_t>(spec_.classes.size()));
        out.patch_u32(0x64, spec_.classes.empty() ? 0 : class_defs_off);
        out.patch_u32(0x68, file_size - data_off);
        out.patch_u32(0x6c, data_off);

        Bytes sig = sha1(ByteView(buf).subspan(32));
        std::copy(sig.begin(), sig.end(), buf.begin() + 12);
        uLong adler = adler32(1, buf.data() + 12, static_cast<uInt>(buf.size() - 12));
        out.patch_u32(8, static_cast<uint32_t>(adler));
        return buf;
    }

    const DexSpec& spec_;
    std::set<std::string> strings_;
    std::set<std::string> types_;
    std::set<ProtoKey> protos_;
    std::set<FieldKey> fields_;
    std::set<MethodKey> methods_;
    std::vector<std::string> string_list_;
    std::vector<std::string> type_list_;
    std::vector<ProtoKey> proto_list_;
    std::vector<FieldKey> field_list_;
    std::vector<MethodKey> method_list_;
    std::map<std::string, uint32_t> string_idx_;
    std::map<std::string, uint32_t> type_idx_;
    std::map<ProtoKey, uint32_t> proto_idx_;
    std::map<FieldKey, uint32_t> field_idx_;
    std::map<MethodKey, uint32_t> method_idx_;
};

inline Bytes build_dex(const DexSpec& spec) { return DexWriter(spec).build(); }

}  // namespace arascan::fixtures
