#pragma once

#include <openssl/evp.h>

#include <array>
#include <stdexcept>
#include <string>

#include "arascan/bytes.hpp"

namespace arascan {

namespace detail {

inline Bytes evp_digest(const EVP_MD* md, ByteView data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int out_len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &out_len, md, nullptr) != 1) {
        throw std::runtime_error("digest computation failed");
    }
    return Bytes(out.begin(), out.begin() + out_len);
}

}  // namespace detail

inline Bytes sha1(ByteView data) { return detail::evp_digest(EVP_sha1(), data); }
inline Bytes sha256(ByteView data) { return detail::evp_digest(EVP_sha256(), data); }

inline std::string hex_lower(ByteView data)
{
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out += hex[b >> 4];
        out += hex[b & 0xf];
    }
    return out;
}

inline std::string sha256_hex(ByteView data) { return hex_lower(sha256(data)); }

}  // namespace arascan
