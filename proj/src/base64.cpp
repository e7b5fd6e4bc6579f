// SPDX-License-Identifier: Apache-2.0

#include "egoqr/base64.hpp"

#include "egoqr/error.hpp"

#include <openssl/evp.h>

namespace egoqr {

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0)
        throw FormatError("base64 length is not a multiple of 4");
    if (text.empty())
        return {};
    std::size_t pad = 0;
    if (text.back() == '=')
        pad = text[text.size() - 2] == '=' ? 2 : 1;
    if (text.substr(0, text.size() - pad).find('=') != std::string_view::npos)
        throw FormatError("misplaced base64 padding");
    // EVP_DecodeBlock keeps the padding bytes as zeros and does not reject all bad input, so check first
    for (char c : text.substr(0, text.size() - pad)) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
        if (!ok)
            throw FormatError("invalid base64 character");
    }
    std::vector<std::uint8_t> out(text.size() / 4 * 3);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0)
        throw FormatError("invalid base64");
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

} // namespace egoqr
