// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace egoqr {

/// Standard alphabet with padding, no line breaks.
std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws FormatError on characters outside the alphabet or bad length/padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace egoqr
