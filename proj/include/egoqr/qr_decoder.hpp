// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "egoqr/qr_symbol.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace egoqr {

enum class SegmentMode { Numeric, Alphanumeric, Byte };

std::string_view to_string(SegmentMode mode);

struct DecodedPayload
{
    std::vector<std::uint8_t> bytes;
    SegmentMode mode = SegmentMode::Byte; ///< mode of the first segment
    int version = 0;
    EcLevel ec_level = EcLevel::L;
    int mask_id = 0;
    int corrected_errors = 0; ///< codewords fixed by Reed-Solomon, summed over blocks

    std::string text() const { return {bytes.begin(), bytes.end()}; }
    bool operator==(const DecodedPayload&) const = default;
};

struct FormatInfo
{
    EcLevel ec_level = EcLevel::L;
    int mask_id = 0;
    int bit_errors = 0; ///< Hamming distance to the closest valid format word
};

/// Reads both format copies and keeps the one closer to a valid word.
/// Throws FormatError when both are more than 3 bits away from every valid word.
FormatInfo read_format_info(const BitMatrix& m);

/// Full decode of a sampled module matrix (dark = true). Throws FormatError, ChecksumError
/// or UnsupportedError (ECI, Kanji, structured append, FNC1).
DecodedPayload decode_matrix(const BitMatrix& m);

} // namespace egoqr
