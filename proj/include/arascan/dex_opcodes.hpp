#pragma once

#include <array>
#include <cstdint>

namespace arascan::dex {

/// What a decoded instruction contributes to method facts.
enum class OpKind : uint8_t {
    None,          // no reference payload we care about
    String,        // const-string, index in unit[1]
    StringJumbo,   // const-string/jumbo, index in unit[1] | unit[2] << 16
    Field,         // iget/iput/sget/sput families, index in unit[1]
    Invoke,        // invoke-kind and /range forms, method index in unit[1]
    InvokePoly,    // invoke-polymorphic forms, method index in unit[1]
    InvokeCustom,  // invoke-custom forms, call-site index (not a method)
    Unused,        // reserved opcode, width 1, decoded with a warning
};

struct OpInfo {
    uint8_t units;  // instruction width in 16-bit code units
    OpKind kind;
};

/// Width and payload class for every opcode byte. Widths follow the published
/// instruction-format table; the per-format register fields are irrelevant to
/// fact extraction and are skipped.
inline const std::array<OpInfo, 256>& op_table()
{
    static const std::array<OpInfo, 256> table = [] {
        std::array<OpInfo, 256> t{};
        auto set = [&t](int lo, int hi, uint8_t units, OpKind kind) {
            for (int op = lo; op <= hi; ++op) {
                t[op] = OpInfo{units, kind};
            }
        };
        set(0x00, 0x00, 1, OpKind::None);  // nop (payloads special-cased)
        set(0x01, 0x01, 1, OpKind::None);  // move
        set(0x02, 0x02, 2, OpKind::None);
        set(0x03, 0x03, 3, OpKind::None);
        set(0x04, 0x04, 1, OpKind::None);  // move-wide
        set(0x05, 0x05, 2, OpKind::None);
        set(0x06, 0x06, 3, OpKind::None);
        set(0x07, 0x07, 1, OpKind::None);  // move-object
        set(0x08, 0x08, 2, OpKind::None);
        set(0x09, 0x09, 3, OpKind::None);
        set(0x0a, 0x0d, 1, OpKind::None);  // move-result*, move-exception
        set(0x0e, 0x11, 1, OpKind::None);  // return*
        set(0x12, 0x12, 1, OpKind::None);  // const/4
        set(0x13, 0x13, 2, OpKind::None);
        set(0x14, 0x14, 3, OpKind::None);
        set(0x15, 0x15, 2, OpKind::None);
        set(0x16, 0x16, 2, OpKind::None);
        set(0x17, 0x17, 3, OpKind::None);
        set(0x18, 0x18, 5, OpKind::None);  // const-wide
        set(0x19, 0x19, 2, OpKind::None);
        set(0x1a, 0x1a, 2, OpKind::String);
        set(0x1b, 0x1b, 3, OpKind::StringJumbo);
        set(0x1c, 0x1c, 2, OpKind::None);  // const-class
        set(0x1d, 0x1e, 1, OpKind::None);  // monitor
        set(0x1f, 0x1f, 2, OpKind::None);  // check-cast
        set(0x20, 0x20, 2, OpKind::None);  // instance-of
        set(0x21, 0x21, 1, OpKind::None);  // array-length
        set(0x22, 0x23, 2, OpKind::None);  // new-instance, new-array
        set(0x24, 0x25, 3, OpKind::None);  // filled-new-array
        set(0x26, 0x26, 3, OpKind::None);  // fill-array-data
        set(0x27, 0x27, 1, OpKind::None);  // throw
        set(0x28, 0x28, 1, OpKind::None);  // goto
        set(0x29, 0x29, 2, OpKind::None);
        set(0x2a, 0x2a, 3, OpKind::None);
        set(0x2b, 0x2c, 3, OpKind::None);  // switches
        set(0x2d, 0x31, 2, OpKind::None);  // cmp
        set(0x32, 0x37, 2, OpKind::None);  // if-test
        set(0x38, 0x3d, 2, OpKind::None);  // if-testz
        set(0x3e, 0x43, 1, OpKind::Unused);
        set(0x44, 0x51, 2, OpKind::None);  // aget/aput
        set(0x52, 0x5f, 2, OpKind::Field);  // iget/iput
        set(0x60, 0x6d, 2, OpKind::Field);  // sget/sput
        set(0x6e, 0x72, 3, OpKind::Invoke);
        set(0x73, 0x73, 1, OpKind::Unused);
        set(0x74, 0x78, 3, OpKind::Invoke);  // /range
        set(0x79, 0x7a, 1, OpKind::Unused);
        set(0x7b, 0x8f, 1, OpKind::None);  // unop
        set(0x90, 0xaf, 2, OpKind::None);  // binop
        set(0xb0, 0xcf, 1, OpKind::None);  // binop/2addr
        set(0xd0, 0xd7, 2, OpKind::None);  // binop/lit16
        set(0xd8, 0xe2, 2, OpKind::None);  // binop/lit8
        set(0xe3, 0xf9, 1, OpKind::Unused);
        set(0xfa, 0xfb, 4, OpKind::InvokePoly);
        set(0xfc, 0xfd, 3, OpKind::InvokeCustom);
        set(0xfe, 0xff, 2, OpKind::None);  // const-method-handle/type
        return t;
    }();
    return table;
}

}  // namespace arascan::dex
