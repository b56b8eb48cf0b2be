#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "arascan/bytepattern.hpp"
#include "arascan/bytes.hpp"
#include "arascan/diag.hpp"

namespace arascan {

enum class ElfArch { ARM32, ARM64, X86, X86_64, OTHER };

inline std::string to_string(ElfArch a)
{
    switch (a) {
    case ElfArch::ARM32: return "ARM32";
    case ElfArch::ARM64: return "ARM64";
    case ElfArch::X86: return "X86";
    case ElfArch::X86_64: return "X86_64";
    default: return "OTHER";
    }
}

enum class SymBinding { Imported, Defined };

struct NativeSymbol {
    std::string name;
    SymBinding binding = SymBinding::Defined;

    auto operator<=>(const NativeSymbol&) const = default;
};

struct NativeString {
    std::string value;
    size_t file_offset = 0;
};

struct NativeFacts {
    std::string lib_path;
    ElfArch arch = ElfArch::OTHER;
    std::vector<NativeSymbol> symbols;
    std::vector<NativeString> strings;
    Bytes raw;
    // scan_bytes results per pattern text, filled lazily by the matcher
    mutable std::map<std::string, std::vector<size_t>> scanned_patterns;
    Warnings warnings;
};

namespace elf {

inline bool has_magic(ByteView bytes)
{
    return bytes.size() >= 4 && bytes[0] == 0x7f && bytes[1] == 'E' && bytes[2] == 'L' &&
           bytes[3] == 'F';
}

inline ElfArch arch_from_machine(uint16_t machine)
{
    switch (machine) {
    case 0x28: return ElfArch::ARM32;
    case 0xb7: return ElfArch::ARM64;
    case 0x03: return ElfArch::X86;
    case 0x3e: return ElfArch::X86_64;
    default: return ElfArch::OTHER;
    }
}

/// Maximal printable-ASCII runs of length >= 4 over the whole file, the same
/// population the strings(1) default scan reports.
inline std::vector<NativeString> extract_strings(ByteView data, size_t min_len = 4)
{
    std::vector<NativeString> out;
    size_t start = 0;
    size_t run = 0;
    for (size_t i = 0; i <= data.size(); ++i) {
        bool in_run = i < data.size() && is_printable_ascii(data[i]);
        if (in_run) {
            if (run == 0) {
                start = i;
            }
            ++run;
        } else {
            if (run >= min_len) {
                out.push_back(NativeString{
                    std::string(data.begin() + start, data.begin() + start + run), start});
            }
            run = 0;
        }
    }
    return out;
}

struct Section {
    uint32_t name_off = 0;
    uint32_t type = 0;
    uint64_t offset = 0;
    uint64_t size = 0;
    uint32_t link = 0;
    uint64_t entsize = 0;
};

inline constexpr uint32_t kShtSymtab = 2;
inline constexpr uint32_t kShtStrtab = 3;
inline constexpr uint32_t kShtDynsym = 11;

}  // namespace elf

/// Symbol tables (.dynsym and .symtab) plus whole-file strings. Damaged
/// section structures degrade to strings-only extraction with a warning.
inline NativeFacts parse_elf(ByteView bytes, std::string lib_path)
{
    if (!elf::has_magic(bytes)) {
        throw MalformedElf(lib_path + ": not an ELF file");
    }
    NativeFacts facts;
    facts.lib_path = std::move(lib_path);
    facts.raw.assign(bytes.begin(), bytes.end());
    facts.strings = elf::extract_strings(bytes);

    try {
        ByteReader r(bytes, 4);
        uint8_t ei_class = r.u8();
        uint8_t ei_data = r.u8();
        bool is64 = ei_class == 2;
        if (ei_data != 1) {
            throw MalformedElf(facts.lib_path + ": big-endian ELF not supported");
        }
        r.seek(0x12);
        facts.arch = elf::arch_from_machine(r.u16());

        uint64_t shoff;
        uint16_t shentsize, shnum;
        if (is64) {
            r.seek(0x28);
            shoff = r.u64();
            r.seek(0x3a);
            shentsize = r.u16();
            shnum = r.u16();
        } else {
            r.seek(0x20);
            shoff = r.u32();
            r.seek(0x2e);
            shentsize = r.u16();
            shnum = r.u16();
        }

        std::vector<elf::Section> sections;
        for (uint16_t i = 0; i < shnum; ++i) {
            ByteReader sr(bytes, shoff + static_cast<uint64_t>(i) * shentsize);
            elf::Section s;
            s.name_off = sr.u32();
            s.type = sr.u32();
            if (is64) {
                sr.skip(8 + 8);  // flags, addr
                s.offset = sr.u64();
                s.size = sr.u64();
                s.link = sr.u32();
                sr.skip(4 + 8);  // info, addralign
                s.entsize = sr.u64();
            } else {
                sr.skip(4 + 4);  // flags, addr
                s.offset = sr.u32();
                s.size = sr.u32();
                s.link = sr.u32();
                sr.skip(4 + 4);  // info, addralign
                s.entsize = sr.u32();
            }
            sections.push_back(s);
        }

        auto strtab_lookup = [&](const elf::Section& strtab, uint32_t off) {
            if (strtab.offset + off >= bytes.size()) {
                throw MalformedElf(facts.lib_path + ": symbol name out of bounds");
            }
            ByteReader nr(bytes, strtab.offset + off);
            return nr.c_str();
        };

        std::vector<NativeSymbol> symbols;
        for (const auto& sec : sections) {
            if (sec.type != elf::kShtSymtab && sec.type != elf::kShtDynsym) {
                continue;
            }
            if (sec.link >= sections.size() ||
                sections[sec.link].type != elf::kShtStrtab) {
                throw MalformedElf(facts.lib_path + ": symbol table has no string table");
            }
            const elf::Section& strtab = sections[sec.link];
            uint64_t entsize = sec.entsize ? sec.entsize : (is64 ? 24 : 16);
            uint64_t count = entsize ? sec.size / entsize : 0;
            for (uint64_t i = 0; i < count; ++i) {
                ByteReader er(bytes, sec.offset + i * entsize);
                uint32_t name_off = er.u32();
                uint16_t shndx;
                if (is64) {
                    er.skip(1 + 1);  // info, other
                    shndx = er.u16();
                } else {
                    er.skip(4 + 4 + 1 + 1);  // value, size, info, other
                    shndx = er.u16();
                }
                if (name_off == 0) {
                    continue;
                }
                std::string name = strtab_lookup(strtab, name_off);
                if (name.empty()) {
                    continue;
                }
                symbols.push_back(NativeSymbol{
                    std::move(name),
                    shndx == 0 ? SymBinding::Imported : SymBinding::Defined});
            }
        }
        std::sort(symbols.begin(), symbols.end());
        symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
        facts.symbols = std::move(symbols);
    } catch (const TruncatedInput&) {
        warn(facts.warnings, "elf.degraded",
             facts.lib_path + ": damaged section structures, strings-only extraction");
        facts.symbols.clear();
    } catch (const MalformedElf& e) {
        warn(facts.warnings, "elf.degraded",
             std::string(e.what()) + "; strings-only extraction");
        facts.symbols.clear();
    }
    return facts;
}

}  // namespace arascan
