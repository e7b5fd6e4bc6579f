// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "egoqr/image.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace egoqr {

inline constexpr int kMinVersion = 1;
inline constexpr int kMaxVersion = 10;

enum class EcLevel { L, M, Q, H };

std::string_view to_string(EcLevel level);
/// Accepts "L", "M", "Q", "H" (case insensitive); throws FormatError otherwise.
EcLevel parse_ec_level(std::string_view text);

constexpr int side_for_version(int version) { return 17 + 4 * version; }
/// std::nullopt unless side == 17 + 4v for v in [kMinVersion, kMaxVersion].
std::optional<int> version_for_side(int side);

/// Square boolean module grid, row-major, true = dark.
class BitMatrix
{
public:
    BitMatrix() = default;
    explicit BitMatrix(int side, bool fill = false);

    int side() const { return _side; }
    bool get(int x, int y) const { return _bits[static_cast<std::size_t>(y) * _side + x] != 0; }
    void set(int x, int y, bool v) { _bits[static_cast<std::size_t>(y) * _side + x] = v ? 1 : 0; }
    void flip(int x, int y) { _bits[static_cast<std::size_t>(y) * _side + x] ^= 1; }

    bool operator==(const BitMatrix&) const = default;

private:
    int _side = 0;
    std::vector<std::uint8_t> _bits;
};

struct QrSymbol
{
    int version = 1;
    EcLevel ec_level = EcLevel::L;
    int mask_id = 0;
    BitMatrix modules;

    int side() const { return modules.side(); }
};

/// Largest byte-mode payload for (version, level).
int byte_capacity(int version, EcLevel level);

/// Byte-mode encoder. Picks the smallest fitting version and the lowest-penalty mask when
/// not given. Throws CapacityError when the payload does not fit (version 10 at most).
QrSymbol encode(std::span<const std::uint8_t> data, EcLevel level, std::optional<int> version = std::nullopt,
                std::optional<int> mask_id = std::nullopt);
QrSymbol encode(std::string_view text, EcLevel level, std::optional<int> version = std::nullopt,
                std::optional<int> mask_id = std::nullopt);

/// Dark module -> 0, light -> 255, module_px square blocks, quiet_zone light modules around.
GrayImage render(const QrSymbol& sym, int module_px, int quiet_zone = 4);

/// 15-bit format word (BCH(15,5), XOR 0x5412) for (level, mask).
std::uint16_t format_bits(EcLevel level, int mask_id);
/// 18-bit version word (Golay(18,6)) for versions 7 and up.
std::uint32_t version_bits(int version);

} // namespace egoqr
