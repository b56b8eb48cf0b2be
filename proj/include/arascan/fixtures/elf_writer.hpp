#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "arascan/bytes.hpp"
#include "arascan/elf.hpp"

namespace arascan::fixtures {

struct ElfSpec {
    ElfArch arch = ElfArch::ARM64;
    std::vector<std::string> imported_symbols;
    std::vector<std::string> defined_symbols = {"JNI_OnLoad"};
    std::vector<std::string> rodata_strings;
    Bytes text_bytes;       // machine code to plant, may be empty
    uint32_t pad_seed = 7;  // deterministic filler between sections
};

/// Byte offset of the start of .text inside the emitted file; plants at known
/// locations are recorded relative to this.
struct ElfLayout {
    Bytes bytes;
    size_t text_offset = 0;
};

/// Emits a minimal ET_DYN shared object: .text, .rodata, .dynsym/.dynstr,
/// .symtab/.strtab, .shstrtab. Enough structure for nm/strings/readelf and
/// for the native-facts extractor; no program headers, never loadable.
class ElfWriter {
public:
    explicit ElfWriter(const ElfSpec& spec) : spec_(spec), is64_(use_64bit(spec.arch)) {}

    ElfLayout build()
    {
        ElfLayout out;
        ByteWriter w;
        size_t ehsize = is64_ ? 64 : 52;
        for (size_t i = 0; i < ehsize; ++i) {
            w.u8(0);
        }

        // filler uses non-printable high bytes so it can never extend a
        // strings(1) run or collide with a hex pattern anchored below 0x80
        std::mt19937 rng(spec_.pad_seed);
        auto pad = [&](size_t n) {
            for (size_t i = 0; i < n; ++i) {
                w.u8(static_cast<uint8_t>(0x80 | (rng() & 0x7f)));
            }
        };

        pad(4);
        align(w, 8);
        size_t text_off = w.size();
        w.raw(spec_.text_bytes);
        if (spec_.text_bytes.empty()) {
            w.u8(0xc3);  // placeholder return
        }
        size_t text_size = w.size() - text_off;

        pad(6);
        size_t rodata_off = w.size();
        for (const auto& s : spec_.rodata_strings) {
            w.ascii(s);
            w.u8(0);
        }
        size_t rodata_size = w.size() - rodata_off;

        // .dynstr
        std::vector<uint32_t> dynstr_offs;
        size_t dynstr_off = w.size();
        w.u8(0);
        for (const auto& name : all_symbols()) {
            dynstr_offs.push_back(static_cast<uint32_t>(w.size() - dynstr_off));
            w.ascii(name.first);
            w.u8(0);
        }
        size_t dynstr_size = w.size() - dynstr_off;

        align(w, 8);
        size_t dynsym_off = w.size();
        write_symtab(w, dynstr_offs);
        size_t dynsym_size = w.size() - dynsym_off;

        // .strtab mirrors .dynstr so plain nm sees the same names
        std::vector<uint32_t> strtab_offs;
        size_t strtab_off = w.size();
        w.u8(0);
        for (const auto& name : all_symbols()) {
            strtab_offs.push_back(static_cast<uint32_t>(w.size() - strtab_off));
            w.ascii(name.first);
            w.u8(0);
        }
        size_t strtab_size = w.size() - strtab_off;

        align(w, 8);
        size_t symtab_off = w.size();
        write_symtab(w, strtab_offs);
        size_t symtab_size = w.size() - symtab_off;

        // .shstrtab
        static const char* names[] = {"",        ".text",   ".rodata", ".dynsym",
                                      ".dynstr", ".symtab", ".strtab", ".shstrtab"};
        size_t shstr_off = w.size();
        std::vector<uint32_t> shname_offs;
        w.u8(0);
        for (size_t i = 1; i < 8; ++i) {
            shname_offs.push_back(static_cast<uint32_t>(w.size() - shstr_off));
            w.ascii(names[i]);
            w.u8(0);
        }
        size_t shstr_size = w.size() - shstr_off;

        align(w, 8);
        size_t shoff = w.size();
        size_t sym_entsize = is64_ ? 24 : 16;
        struct Sh {
            uint32_t name;
            uint32_t type;
            uint64_t offset, size;
            uint32_t link, info;
            uint64_t entsize;
            uint64_t flags;
        };
        // sh_info of a symbol table = index of the first non-local symbol
        std::vector<Sh> sh = {
            {0, 0, 0, 0, 0, 0, 0, 0},
            {shname_offs[0], 1 /*PROGBITS*/, text_off, text_size, 0, 0, 0, 0x6 /*AX*/},
            {shname_offs[1], 1, rodata_off, rodata_size, 0, 0, 0, 0x2 /*A*/},
            {shname_offs[2], 11 /*DYNSYM*/, dynsym_off, dynsym_size, 4, 1, sym_entsize, 0x2},
            {shname_offs[3], 3 /*STRTAB*/, dynstr_off, dynstr_size, 0, 0, 0, 0x2},
            {shname_offs[4], 2 /*SYMTAB*/, symtab_off, symtab_size, 6, 1, sym_entsize, 0},
            {shname_offs[5], 3, strtab_off, strtab_size, 0, 0, 0, 0},
            {shname_offs[6], 3, shstr_off, shstr_size, 0, 0, 0, 0},
        };
        for (const auto& s : sh) {
            w.u32(s.name);
            w.u32(s.type);
            if (is64_) {
                w.u64(s.flags);
                w.u64(0);  // addr
                w.u64(s.offset);
                w.u64(s.size);
                w.u32(s.link);
                w.u32(s.info);
                w.u64(8);  // addralign
                w.u64(s.entsize);
            } else {
                w.u32(static_cast<uint32_t>(s.flags));
                w.u32(0);
                w.u32(static_cast<uint32_t>(s.offset));
                w.u32(static_cast<uint32_t>(s.size));
                w.u32(s.link);
                w.u32(s.info);
                w.u32(4);
                w.u32(static_cast<uint32_t>(s.entsize));
            }
        }

        // ELF header
        Bytes& buf = w.data();
        buf[0] = 0x7f;
        buf[1] = 'E';
        buf[2] = 'L';
        buf[3] = 'F';
        buf[4] = is64_ ? 2 : 1;
        buf[5] = 1;  // little endian
        buf[6] = 1;  // version
        ByteWriter hdr;
        hdr.u16(3);  // ET_DYN
        hdr.u16(machine());
        hdr.u32(1);  // version
        if (is64_) {
            hdr.u64(0);      // entry
            hdr.u64(0);      // phoff
            hdr.u64(shoff);
            hdr.u32(0);      // flags
            hdr.u16(64);     // ehsize
            hdr.u16(0);      // phentsize
            hdr.u16(0);      // phnum
            hdr.u16(64);     // shentsize
        } else {
            hdr.u32(0);
            hdr.u32(0);
            hdr.u32(static_cast<uint32_t>(shoff));
            hdr.u32(0);
            hdr.u16(52);
            hdr.u16(0);
            hdr.u16(0);
            hdr.u16(40);
        }
        hdr.u16(8);  // shnum
        hdr.u16(7);  // shstrndx
        std::copy(hdr.data().begin(), hdr.data().end(), buf.begin() + 16);

        out.bytes = std::move(buf);
        out.text_offset = text_off;
        return out;
    }

private:
    static bool use_64bit(ElfArch a)
    {
        return a == ElfArch::ARM64 || a == ElfArch::X86_64;
    }

    static void align(ByteWriter& w, size_t n) { w.pad_to(n); }

    uint16_t machine() const
    {
        switch (spec_.arch) {
        case ElfArch::ARM32: return 0x28;
        case ElfArch::ARM64: return 0xb7;
        case ElfArch::X86: return 0x03;
        case ElfArch::X86_64: return 0x3e;
        default: return 0;
        }
    }

    std::vector<std::pair<std::string, bool>> all_symbols() const
    {
        std::vector<std::pair<std::string, bool>> all;  // (name, imported)
        for (const auto& s : spec_.imported_symbols) {
            all.emplace_back(s, true);
        }
        for (const auto& s : spec_.defined_symbols) {
            all.emplace_back(s, false);
        }
        return all;
    }

    void write_symtab(ByteWriter& w, const std::vector<uint32_t>& name_offs)
    {
        auto entry = [&](uint32_t name, uint8_t info, uint16_t shndx, uint64_t value) {
            if (is64_) {
                w.u32(name);
                w.u8(info);
                w.u8(0);
                w.u16(shndx);
                w.u64(value);
                w.u64(0);
            } else {
                w.u32(name);
                w.u32(static_cast<uint32_t>(value));
                w.u32(0);
                w.u8(info);
                w.u8(0);
                w.u16(shndx);
            }
        };
        entry(0, 0, 0, 0);  // null symbol
        auto all = all_symbols();
        for (size_t i = 0; i < all.size(); ++i) {
            // STB_GLOBAL << 4 | STT_FUNC
            entry(name_offs[i], 0x12, all[i].second ? 0 : 1, all[i].second ? 0 : 0x10);
        }
    }

    const ElfSpec& spec_;
    bool is64_;
};

inline ElfLayout build_elf(const ElfSpec& spec) { return ElfWriter(spec).build(); }

}  // namespace arascan::fixtures
