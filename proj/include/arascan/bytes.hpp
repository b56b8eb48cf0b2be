#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace arascan {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

class TruncatedInput : public std::runtime_error {
public:
    TruncatedInput(const std::string& what, size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)),
          offset(offset) {}
    size_t offset;
};

/// Bounds-checked little-endian cursor over a byte view.
class ByteReader {
public:
    explicit ByteReader(ByteView data, size_t pos = 0) : data_(data), pos_(pos) {}

    size_t pos() const { return pos_; }
    size_t size() const { return data_.size(); }
    size_t remaining() const { return pos_ <= data_.size() ? data_.size() - pos_ : 0; }
    bool eof() const { return pos_ >= data_.size(); }

    void seek(size_t pos)
    {
        if (pos > data_.size()) {
            throw TruncatedInput("seek past end", pos);
        }
        pos_ = pos;
    }

    void skip(size_t n) { seek(pos_ + n); }

    uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }

    uint16_t u16()
    {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_]) |
                     static_cast<uint16_t>(data_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    uint32_t u32()
    {
        need(4);
        uint32_t v = static_cast<uint32_t>(data_[pos_]) |
                     static_cast<uint32_t>(data_[pos_ + 1]) << 8 |
                     static_cast<uint32_t>(data_[pos_ + 2]) << 16 |
                     static_cast<uint32_t>(data_[pos_ + 3]) << 24;
        pos_ += 4;
        return v;
    }

    uint64_t u64()
    {
        uint64_t lo = u32();
        uint64_t hi = u32();
        return lo | hi << 32;
    }

    uint32_t uleb128()
    {
        uint32_t result = 0;
        int shift = 0;
        for (;;) {
            uint8_t b = u8();
            result |= static_cast<uint32_t>(b & 0x7f) << shift;
            if ((b & 0x80) == 0) {
                break;
            }
            shift += 7;
            if (shift > 28) {
                throw TruncatedInput("uleb128 too long", pos_);
            }
        }
        return result;
    }

    ByteView view(size_t n)
    {
        need(n);
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

    Bytes bytes(size_t n)
    {
        ByteView v = view(n);
        return Bytes(v.begin(), v.end());
    }

    std::string ascii(size_t n)
    {
        ByteView v = view(n);
        return std::string(v.begin(), v.end());
    }

    /// Bytes until the next NUL (consumed but not included).
    std::string c_str()
    {
        std::string s;
        for (;;) {
            uint8_t b = u8();
            if (b == 0) {
                return s;
            }
            s.push_back(static_cast<char>(b));
        }
    }

private:
    void need(size_t n) const
    {
        if (pos_ + n > data_.size()) {
            throw TruncatedInput("unexpected end of input", pos_);
        }
    }

    ByteView data_;
    size_t pos_;
};

/// Little-endian append-only byte buffer, the writer-side mirror of ByteReader.
class ByteWriter {
public:
    Bytes& data() { return buf_; }
    const Bytes& data() const { return buf_; }
    size_t size() const { return buf_.size(); }

    void u8(uint8_t v) { buf_.push_back(v); }

    void u16(uint16_t v)
    {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }

    void u32(uint32_t v)
    {
        u16(static_cast<uint16_t>(v));
        u16(static_cast<uint16_t>(v >> 16));
    }

    void u64(uint64_t v)
    {
        u32(static_cast<uint32_t>(v));
        u32(static_cast<uint32_t>(v >> 32));
    }

    void uleb128(uint32_t v)
    {
        do {
            uint8_t b = v & 0x7f;
            v >>= 7;
            if (v != 0) {
                b |= 0x80;
            }
            buf_.push_back(b);
        } while (v != 0);
    }

    void raw(ByteView v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
    void raw(const Bytes& v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
    void ascii(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    void pad_to(size_t alignment, uint8_t fill = 0)
    {
        while (buf_.size() % alignment != 0) {
            buf_.push_back(fill);
        }
    }

    void patch_u32(size_t offset, uint32_t v)
    {
        buf_[offset] = static_cast<uint8_t>(v);
        buf_[offset + 1] = static_cast<uint8_t>(v >> 8);
        buf_[offset + 2] = static_cast<uint8_t>(v >> 16);
        buf_[offset + 3] = static_cast<uint8_t>(v >> 24);
    }

private:
    Bytes buf_;
};

inline bool is_printable_ascii(uint8_t b)
{
    // Matches the byte classes the strings(1) default scan accepts.
    return b == '\t' || (b >= 0x20 && b <= 0x7e);
}

inline std::string escape_text(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    static const char* hex = "0123456789abcdef";
    for (unsigned char c : s) {
        if (c == '\\') {
            out += "\\\\";
        } else if (c == '\t') {
            out += "\\t";
        } else if (c == '\n') {
            out += "\\n";
        } else if (c < 0x20 || c > 0x7e) {
            out += "\\x";
            out += hex[c >> 4];
            out += hex[c & 0xf];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

inline std::string to_lower(std::string s)
{
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return s;
}

}  // namespace arascan
