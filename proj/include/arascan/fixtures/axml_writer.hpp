#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "arascan/axml.hpp"
#include "arascan/bytes.hpp"

namespace arascan::fixtures {

struct ManifestSpec {
    std::string package = "com.fix.app";
    Tri debuggable = Tri::Unset;
    // extra attributes on the application element, written as string values
    std::vector<std::pair<std::string, std::string>> application_attrs;
    std::vector<std::pair<std::string, std::string>> components;  // (kind, name)
    bool utf8_pool = false;
};

/// Emits a binary AndroidManifest.xml: string pool, android namespace, a
/// manifest/application element tree, component children.
class AxmlWriter {
public:
    explicit AxmlWriter(const ManifestSpec& spec) : spec_(spec) {}

    Bytes build()
    {
        intern(kAndroidUri);
        intern("android");
        intern("manifest");
        intern("package");
        intern(spec_.package);
        intern("application");
        if (spec_.debuggable != Tri::Unset) {
            intern("debuggable");
        }
        for (const auto& [k, v] : spec_.application_attrs) {
            intern(k);
            intern(v);
        }
        for (const auto& [kind, name] : spec_.components) {
            intern(kind);
            intern("name");
            intern(name);
        }

        ByteWriter body;
        start_namespace(body);
        start_element(body, "manifest", {Attr::str("package", spec_.package, false)});
        std::vector<Attr> app_attrs;
        if (spec_.debuggable != Tri::Unset) {
            app_attrs.push_back(Attr::boolean("debuggable", spec_.debuggable == Tri::True));
        }
        for (const auto& [k, v] : spec_.application_attrs) {
            app_attrs.push_back(Attr::str(k, v));
        }
        start_element(body, "application", app_attrs);
        for (const auto& [kind, name] : spec_.components) {
            start_element(body, kind, {Attr::str("name", name)});
            end_element(body, kind);
        }
        end_element(body, "application");
        end_element(body, "manifest");
        end_namespace(body);

        Bytes pool = build_pool();

        ByteWriter out;
        out.u16(axml::kResXml);
        out.u16(8);
        out.u32(static_cast<uint32_t>(8 + pool.size() + body.size()));
        out.raw(pool);
        out.raw(body.data());
        return out.data();
    }

private:
    static constexpr const char* kAndroidUri =
        "http://schemas.android.com/apk/res/android";

    struct Attr {
        std::string name;
        bool ns = true;  // android: namespace
        std::optional<std::string> string_value;
        std::optional<bool> bool_value;

        static Attr str(std::string name, std::string value, bool ns = true)
        {
            Attr a;
            a.name = std::move(name);
            a.ns = ns;
            a.string_value = std::move(value);
            return a;
        }

        static Attr boolean(std::string name, bool value)
        {
            Attr a;
            a.name = std::move(name);
            a.bool_value = value;
            return a;
        }
    };

    uint32_t intern(const std::string& s)
    {
        auto it = index_.find(s);
        if (it != index_.end()) {
            return it->second;
        }
        uint32_t idx = static_cast<uint32_t>(pool_.size());
        pool_.push_back(s);
        index_[s] = idx;
        return idx;
    }

    void node_header(ByteWriter& w, uint16_t type, uint32_t size)
    {
        w.u16(type);
        w.u16(16);  // node header: chunk header + line + comment
        w.u32(size);
        w.u32(1);           // line number
        w.u32(0xffffffff);  // comment
    }

    void start_namespace(ByteWriter& w)
    {
        node_header(w, axml::kResXmlStartNamespace, 24);
        w.u32(index_.at("android"));
        w.u32(index_.at(kAndroidUri));
    }

    void end_namespace(ByteWriter& w)
    {
        node_header(w, axml::kResXmlEndNamespace, 24);
        w.u32(index_.at("android"));
        w.u32(index_.at(kAndroidUri));
    }

    void start_element(ByteWriter& w, const std::string& name,
                       const std::vector<Attr>& attrs)
    {
        uint32_t size = 16 + 20 + static_cast<uint32_t>(attrs.size()) * 20;
        node_header(w, axml::kResXmlStartElement, size);
        w.u32(0xffffffff);  // element namespace
        w.u32(intern(name));
        w.u16(20);  // attributeStart
        w.u16(20);  // attributeSize
        w.u16(static_cast<uint16_t>(attrs.size()));
        w.u16(0);  // idIndex
        w.u16(0);  // classIndex
        w.u16(0);  // styleIndex
        for (const auto& a : attrs) {
            w.u32(a.ns ? index_.at(kAndroidUri) : 0xffffffff);
            w.u32(intern(a.name));
            if (a.string_value) {
                uint32_t idx = intern(*a.string_value);
                w.u32(idx);  // rawValue
                w.u16(8);
                w.u8(0);
                w.u8(axml::kTypeString);
                w.u32(idx);
            } else {
                w.u32(0xffffffff);  // rawValue
                w.u16(8);
                w.u8(0);
                w.u8(axml::kTypeIntBool);
                w.u32(a.bool_value.value_or(false) ? 0xffffffff : 0);
            }
        }
    }

    void end_element(ByteWriter& w, const std::string& name)
    {
        node_header(w, axml::kResXmlEndElement, 24);
        w.u32(0xffffffff);
        w.u32(index_.at(name));
    }

    Bytes build_pool() const
    {
        ByteWriter data;
        std::vector<uint32_t> offsets;
        for (const auto& s : pool_) {
            offsets.push_back(static_cast<uint32_t>(data.size()));
            if (spec_.utf8_pool) {
                data.u8(static_cast<uint8_t>(s.size()));  // utf16 length, ASCII inputs
                data.u8(static_cast<uint8_t>(s.size()));
                data.ascii(s);
                data.u8(0);
            } else {
                data.u16(static_cast<uint16_t>(s.size()));
                for (char c : s) {
                    data.u16(static_cast<uint8_t>(c));
                }
                data.u16(0);
            }
        }
        data.pad_to(4);

        ByteWriter pool;
        uint32_t header = 28;
        uint32_t strings_start = header + 4 * static_cast<uint32_t>(pool_.size());
        pool.u16(axml::kResStringPool);
        pool.u16(static_cast<uint16_t>(header));
        pool.u32(strings_start + static_cast<uint32_t>(data.size()));
        pool.u32(static_cast<uint32_t>(pool_.size()));
        pool.u32(0);  // style count
        pool.u32(spec_.utf8_pool ? 0x100 : 0);
        pool.u32(strings_start);
        pool.u32(0);  // styles start
        for (uint32_t off : offsets) {
            pool.u32(off);
        }
        pool.raw(data.data());
        return pool.data();
    }

    const ManifestSpec& spec_;
    std::vector<std::string> pool_;
    std::map<std::string, uint32_t> index_;
};

inline Bytes build_manifest(const ManifestSpec& spec) { return AxmlWriter(spec).build(); }

}  // namespace arascan::fixtures
