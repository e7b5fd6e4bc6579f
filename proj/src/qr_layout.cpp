// SPDX-License-Identifier: Apache-2.0

#include "qr_layout.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace egoqr::layout {

namespace {

// indexed [level][version], version 0 unused
constexpr int kEccPerBlock[4][11] = {
    {-1, 7, 10, 15, 20, 26, 18, 20, 24, 30, 18},  // L
    {-1, 10, 16, 26, 18, 24, 16, 18, 22, 22, 26}, // M
    {-1, 13, 22, 18, 26, 18, 24, 18, 22, 20, 24}, // Q
    {-1, 17, 28, 22, 16, 22, 28, 26, 26, 24, 28}, // H
};

constexpr int kNumBlocks[4][11] = {
    {-1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 4}, // L
    {-1, 1, 1, 1, 2, 2, 4, 4, 4, 5, 5}, // M
    {-1, 1, 1, 2, 2, 4, 4, 6, 6, 8, 8}, // Q
    {-1, 1, 1, 2, 4, 4, 4, 5, 6, 8, 8}, // H
};

void check_version(int version)
{
    if (version < kMinVersion || version > kMaxVersion)
        throw std::out_of_range("QR version out of supported range 1..10");
}

int raw_data_modules(int version)
{
    int result = (16 * version + 128) * version + 64;
    if (version >= 2) {
        int n = version / 7 + 2;
        result -= (25 * n - 10) * n - 55;
        if (version >= 7)
            result -= 36;
    }
    return result;
}

} // namespace

int ecc_per_block(int version, EcLevel level)
{
    check_version(version);
    return kEccPerBlock[static_cast<int>(level)][version];
}

int num_blocks(int version, EcLevel level)
{
    check_version(version);
    return kNumBlocks[static_cast<int>(level)][version];
}

int total_codewords(int version)
{
    check_version(version);
    return raw_data_modules(version) / 8;
}

int data_codewords(int version, EcLevel level)
{
    return total_codewords(version) - ecc_per_block(version, level) * num_blocks(version, level);
}

BlockShape block_shape(int version, EcLevel level)
{
    BlockShape s;
    s.count = num_blocks(version, level);
    s.ecc = ecc_per_block(version, level);
    int total = total_codewords(version);
    s.short_count = s.count - total % s.count;
    s.short_data = total / s.count - s.ecc;
    return s;
}

std::vector<int> alignment_centers(int version)
{
    static const std::vector<int> table[11] = {
        {}, {}, {6, 18}, {6, 22}, {6, 26}, {6, 30}, {6, 34}, {6, 22, 38}, {6, 24, 42}, {6, 26, 46}, {6, 28, 50},
    };
    check_version(version);
    return table[version];
}

int level_bits(EcLevel level)
{
    switch (level) {
    case EcLevel::L: return 1;
    case EcLevel::M: return 0;
    case EcLevel::Q: return 3;
    case EcLevel::H: return 2;
    }
    return 0;
}

EcLevel level_from_bits(int bits)
{
    static constexpr EcLevel kLevels[4] = {EcLevel::M, EcLevel::L, EcLevel::H, EcLevel::Q};
    return kLevels[bits & 3];
}

BitMatrix draw_function_patterns(BitMatrix& m, int version)
{
    const int side = side_for_version(version);
    BitMatrix fn(side);
    auto put = [&](int x, int y, bool dark) {
        m.set(x, y, dark);
        fn.set(x, y, true);
    };

    for (int i = 0; i < side; ++i) {
        put(6, i, i % 2 == 0);
        put(i, 6, i % 2 == 0);
    }

    for (auto [cx, cy] : {Position{3, 3}, Position{side - 4, 3}, Position{3, side - 4}})
        for (int dy = -4; dy <= 4; ++dy)
            for (int dx = -4; dx <= 4; ++dx) {
                int x = cx + dx, y = cy + dy;
                if (x < 0 || y < 0 || x >= side || y >= side)
                    continue;
                int dist = std::max(std::abs(dx), std::abs(dy));
                put(x, y, dist != 2 && dist != 4);
            }

    auto centers = alignment_centers(version);
    const int n = static_cast<int>(centers.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if ((i == 0 && j == 0) || (i == 0 && j == n - 1) || (i == n - 1 && j == 0))
                continue;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    put(centers[i] + dx, centers[j] + dy, std::max(std::abs(dx), std::abs(dy)) != 1);
        }

    // reserve format and version areas; real values are written after masking
    for (const auto& copy : format_positions(side))
        for (auto [x, y] : copy)
            put(x, y, false);
    put(8, side - 8, true);
    for (const auto& pair : version_positions(side))
        for (auto [x, y] : pair)
            put(x, y, false);

    return fn;
}

BitMatrix function_map(int version)
{
    BitMatrix scratch(side_for_version(version));
    return draw_function_patterns(scratch, version);
}

std::array<std::array<Position, 15>, 2> format_positions(int side)
{
    std::array<std::array<Position, 15>, 2> pos{};
    for (int i = 0; i <= 5; ++i)
        pos[0][i] = {8, i};
    pos[0][6] = {8, 7};
    pos[0][7] = {8, 8};
    pos[0][8] = {7, 8};
    for (int i = 9; i < 15; ++i)
        pos[0][i] = {14 - i, 8};

    for (int i = 0; i < 8; ++i)
        pos[1][i] = {side - 1 - i, 8};
    for (int i = 8; i < 15; ++i)
        pos[1][i] = {8, side - 15 + i};
    return pos;
}

std::vector<std::array<Position, 2>> version_positions(int side)
{
    std::vector<std::array<Position, 2>> pos;
    if (side < side_for_version(7))
        return pos;
    for (int i = 0; i < 18; ++i) {
        int a = side - 11 + i % 3, b = i / 3;
        pos.push_back({Position{a, b}, Position{b, a}});
    }
    return pos;
}

bool mask_bit(int mask_id, int x, int y)
{
    switch (mask_id) {
    case 0: return (x + y) % 2 == 0;
    case 1: return y % 2 == 0;
    case 2: return x % 3 == 0;
    case 3: return (x + y) % 3 == 0;
    case 4: return (x / 3 + y / 2) % 2 == 0;
    case 5: return x * y % 2 + x * y % 3 == 0;
    case 6: return (x * y % 2 + x * y % 3) % 2 == 0;
    case 7: return ((x + y) % 2 + x * y % 3) % 2 == 0;
    }
    throw std::out_of_range("mask id out of range 0..7");
}

std::vector<Position> data_order(int version)
{
    const int side = side_for_version(version);
    auto fn = function_map(version);
    std::vector<Position> order;
    for (int right = side - 1; right >= 1; right -= 2) {
        if (right == 6)
            right = 5;
        bool upward = ((right + 1) & 2) == 0;
        for (int vert = 0; vert < side; ++vert) {
            int y = upward ? side - 1 - vert : vert;
            for (int j = 0; j < 2; ++j) {
                int x = right - j;
                if (!fn.get(x, y))
                    order.emplace_back(x, y);
            }
        }
    }
    return order;
}

} // namespace egoqr::layout
