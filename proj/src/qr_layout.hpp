// SPDX-License-Identifier: Apache-2.0
// Symbol layout tables shared by the encoder and the decoder (versions 1..10).
#pragma once

#include "egoqr/qr_symbol.hpp"

#include <array>
#include <utility>
#include <vector>

namespace egoqr::layout {

using Position = std::pair<int, int>; // (x = column, y = row)

int ecc_per_block(int version, EcLevel level);
int num_blocks(int version, EcLevel level);
int total_codewords(int version);
int data_codewords(int version, EcLevel level);

struct BlockShape
{
    int count = 0;        ///< number of blocks
    int short_count = 0;  ///< blocks carrying short_data data codewords; the rest carry short_data + 1
    int short_data = 0;
    int ecc = 0;

    int data_len(int block) const { return short_data + (block >= short_count ? 1 : 0); }
};
BlockShape block_shape(int version, EcLevel level);

std::vector<int> alignment_centers(int version);

/// 2-bit level indicator as written in format information.
int level_bits(EcLevel level);
EcLevel level_from_bits(int bits);

/// Finders, separators, timing, alignment patterns and the dark module drawn into `m`;
/// returns the map of every function module (format and version areas included).
BitMatrix draw_function_patterns(BitMatrix& m, int version);
BitMatrix function_map(int version);

/// Module positions of bit i (LSB first) in each format copy.
std::array<std::array<Position, 15>, 2> format_positions(int side);
/// Module positions of bit i (LSB first) in each version block; empty below version 7.
std::vector<std::array<Position, 2>> version_positions(int side);

bool mask_bit(int mask_id, int x, int y);

/// Symbol carrying exactly the given data codewords (parity, interleaving, masking and
/// format/version information are added). Used by the encoder and by tests that need
/// hand-built segment streams.
QrSymbol assemble_symbol(const std::vector<std::uint8_t>& data_codewords, int version, EcLevel level, int mask_id);

/// Data module visiting order (the two-column zigzag), function modules excluded.
std::vector<Position> data_order(int version);

} // namespace egoqr::layout
