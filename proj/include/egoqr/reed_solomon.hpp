// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace egoqr {

/// GF(2^8) arithmetic over the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
namespace gf256 {

std::uint8_t exp(int power); ///< alpha^power, any integer power
int log(std::uint8_t value); ///< value must be non-zero
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t div(std::uint8_t a, std::uint8_t b); ///< b must be non-zero
std::uint8_t inv(std::uint8_t a);                 ///< a must be non-zero

} // namespace gf256

/// Generator polynomial prod_{i<degree} (x - alpha^i), monic, highest-degree first (leading 1 omitted).
std::vector<std::uint8_t> rs_generator(int degree);

/// Parity bytes for `data` (remainder of data * x^n_parity divided by the generator).
std::vector<std::uint8_t> rs_parity(std::span<const std::uint8_t> data, int n_parity);

struct RsDecodeResult
{
    std::vector<std::uint8_t> message; ///< data part of the corrected block
    int corrected = 0;                 ///< number of codewords changed
};

/// Corrects up to n_parity/2 codeword errors (Berlekamp-Massey, Chien search, Forney).
/// The corrected block is re-encoded and compared before returning; any inconsistency
/// raises ChecksumError.
RsDecodeResult rs_decode_block(std::span<const std::uint8_t> codewords, int n_parity);

} // namespace egoqr
