// SPDX-License-Identifier: Apache-2.0

#include "egoqr/qr_symbol.hpp"

#include "egoqr/error.hpp"
#include "egoqr/reed_solomon.hpp"
#include "qr_layout.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdlib>

namespace egoqr {

std::string_view to_string(EcLevel level)
{
    switch (level) {
    case EcLevel::L: return "L";
    case EcLevel::M: return "M";
    case EcLevel::Q: return "Q";
    case EcLevel::H: return "H";
    }
    return "?";
}

EcLevel parse_ec_level(std::string_view text)
{
    if (text.size() == 1)
        switch (std::toupper(static_cast<unsigned char>(text[0]))) {
        case 'L': return EcLevel::L;
        case 'M': return EcLevel::M;
        case 'Q': return EcLevel::Q;
        case 'H': return EcLevel::H;
        }
    throw FormatError("unknown error correction level '" + std::string(text) + "'");
}

std::optional<int> version_for_side(int side)
{
    if (side < side_for_version(kMinVersion) || side > side_for_version(kMaxVersion) || (side - 17) % 4 != 0)
        return std::nullopt;
    return (side - 17) / 4;
}

BitMatrix::BitMatrix(int side, bool fill)
    : _side(side), _bits(static_cast<std::size_t>(side) * side, fill ? 1 : 0)
{
}

std::uint16_t format_bits(EcLevel level, int mask_id)
{
    int data = layout::level_bits(level) << 3 | mask_id;
    int rem = data;
    for (int i = 0; i < 10; ++i)
        rem = (rem << 1) ^ ((rem >> 9) * 0x537);
    return static_cast<std::uint16_t>(((data << 10) | rem) ^ 0x5412);
}

std::uint32_t version_bits(int version)
{
    int rem = version;
    for (int i = 0; i < 12; ++i)
        rem = (rem << 1) ^ ((rem >> 11) * 0x1F25);
    return static_cast<std::uint32_t>(version) << 12 | static_cast<std::uint32_t>(rem);
}

namespace {

int byte_count_bits(int version)
{
    return version <= 9 ? 8 : 16;
}

class BitWriter
{
public:
    void append(unsigned value, int bits)
    {
        for (int i = bits - 1; i >= 0; --i)
            _bits.push_back((value >> i) & 1);
    }
    std::size_t size() const { return _bits.size(); }

    std::vector<std::uint8_t> bytes() const
    {
        std::vector<std::uint8_t> out((_bits.size() + 7) / 8, 0);
        for (std::size_t i = 0; i < _bits.size(); ++i)
            if (_bits[i])
                out[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
        return out;
    }

private:
    std::vector<bool> _bits;
};

std::vector<std::uint8_t> data_codeword_stream(std::span<const std::uint8_t> data, int version, EcLevel level)
{
    const std::size_t capacity_bits = static_cast<std::size_t>(layout::data_codewords(version, level)) * 8;
    BitWriter bw;
    bw.append(0b0100, 4);
    bw.append(static_cast<unsigned>(data.size()), byte_count_bits(version));
    for (auto b : data)
        bw.append(b, 8);
    bw.append(0, static_cast<int>(std::min<std::size_t>(4, capacity_bits - bw.size())));
    bw.append(0, static_cast<int>((8 - bw.size() % 8) % 8));
    auto bytes = bw.bytes();
    for (std::uint8_t pad = 0xEC; bytes.size() < capacity_bits / 8; pad ^= 0xEC ^ 0x11)
        bytes.push_back(pad);
    return bytes;
}

std::vector<std::uint8_t> interleave_with_parity(const std::vector<std::uint8_t>& data, int version, EcLevel level)
{
    auto shape = layout::block_shape(version, level);
    std::vector<std::vector<std::uint8_t>> blocks, parities;
    std::size_t k = 0;
    for (int b = 0; b < shape.count; ++b) {
        int len = shape.data_len(b);
        blocks.emplace_back(data.begin() + k, data.begin() + k + len);
        parities.push_back(rs_parity(blocks.back(), shape.ecc));
        k += len;
    }
    std::vector<std::uint8_t> out;
    for (int i = 0; i <= shape.short_data; ++i)
        for (int b = 0; b < shape.count; ++b)
            if (i < static_cast<int>(blocks[b].size()))
                out.push_back(blocks[b][i]);
    for (int i = 0; i < shape.ecc; ++i)
        for (int b = 0; b < shape.count; ++b)
            out.push_back(parities[b][i]);
    return out;
}

void write_format_and_version(BitMatrix& m, int version, EcLevel level, int mask_id)
{
    auto fmt = format_bits(level, mask_id);
    for (const auto& copy : layout::format_positions(m.side()))
        for (int i = 0; i < 15; ++i)
            m.set(copy[i].first, copy[i].second, (fmt >> i) & 1);
    if (version >= 7) {
        auto ver = version_bits(version);
        auto pos = layout::version_positions(m.side());
        for (int i = 0; i < 18; ++i)
            for (auto [x, y] : pos[i])
                m.set(x, y, (ver >> i) & 1);
    }
}

long penalty_score(const BitMatrix& m)
{
    const int n = m.side();
    long score = 0;

    auto line_penalty = [&](auto at) {
        for (int a = 0; a < n; ++a) {
            int run = 1;
            for (int b = 1; b <= n; ++b) {
                if (b < n && at(a, b) == at(a, b - 1)) {
                    ++run;
                    continue;
                }
                if (run >= 5)
                    score += 3 + (run - 5);
                run = 1;
            }
            static constexpr bool kA[11] = {1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0};
            static constexpr bool kB[11] = {0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1};
            for (int b = 0; b + 11 <= n; ++b) {
                bool ma = true, mb = true;
                for (int i = 0; i < 11; ++i) {
                    bool v = at(a, b + i);
                    ma &= v == kA[i];
                    mb &= v == kB[i];
                }
                score += 40 * (ma + mb);
            }
        }
    };
    line_penalty([&](int row, int col) { return m.get(col, row); });
    line_penalty([&](int col, int row) { return m.get(col, row); });

    for (int y = 0; y + 1 < n; ++y)
        for (int x = 0; x + 1 < n; ++x) {
            bool c = m.get(x, y);
            if (c == m.get(x + 1, y) && c == m.get(x, y + 1) && c == m.get(x + 1, y + 1))
                score += 3;
        }

    long dark = 0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            dark += m.get(x, y);
    long total = static_cast<long>(n) * n;
    long k = (std::labs(dark * 20 - total * 10) + total - 1) / total - 1;
    score += k * 10;
    return score;
}

} // namespace

QrSymbol layout::assemble_symbol(const std::vector<std::uint8_t>& stream, int version, EcLevel level, int mask_id)
{
    if (static_cast<int>(stream.size()) != data_codewords(version, level))
        throw std::invalid_argument("data codeword count does not match version and level");
    auto codewords = interleave_with_parity(stream, version, level);

    BitMatrix m(side_for_version(version));
    draw_function_patterns(m, version);
    auto order = data_order(version);
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto [x, y] = order[i];
        bool bit = i < codewords.size() * 8 && ((codewords[i / 8] >> (7 - i % 8)) & 1);
        m.set(x, y, bit != mask_bit(mask_id, x, y));
    }
    write_format_and_version(m, version, level, mask_id);
    return {version, level, mask_id, std::move(m)};
}

int byte_capacity(int version, EcLevel level)
{
    int bits = layout::data_codewords(version, level) * 8 - 4 - byte_count_bits(version);
    return bits / 8;
}

QrSymbol encode(std::span<const std::uint8_t> data, EcLevel level, std::optional<int> version, std::optional<int> mask_id)
{
    if (mask_id && (*mask_id < 0 || *mask_id > 7))
        throw std::out_of_range("mask id out of range 0..7");
    int v = 0;
    if (version) {
        if (*version < kMinVersion || *version > kMaxVersion)
            throw std::out_of_range("QR version out of supported range 1..10");
        if (static_cast<int>(data.size()) > byte_capacity(*version, level))
            throw CapacityError("payload of " + std::to_string(data.size()) + " bytes exceeds version " +
                                std::to_string(*version) + "-" + std::string(to_string(level)) + " capacity");
        v = *version;
    } else {
        for (int cand = kMinVersion; cand <= kMaxVersion && v == 0; ++cand)
            if (static_cast<int>(data.size()) <= byte_capacity(cand, level))
                v = cand;
        if (v == 0)
            throw CapacityError("payload of " + std::to_string(data.size()) + " bytes exceeds version 10-" +
                                std::string(to_string(level)) + " capacity of " +
                                std::to_string(byte_capacity(kMaxVersion, level)) + " bytes");
    }

    auto stream = data_codeword_stream(data, v, level);
    if (mask_id)
        return layout::assemble_symbol(stream, v, level, *mask_id);

    QrSymbol best;
    long best_score = LONG_MAX;
    for (int mask = 0; mask < 8; ++mask) {
        auto sym = layout::assemble_symbol(stream, v, level, mask);
        long p = penalty_score(sym.modules);
        if (p < best_score) {
            best_score = p;
            best = std::move(sym);
        }
    }
    return best;
}

QrSymbol encode(std::string_view text, EcLevel level, std::optional<int> version, std::optional<int> mask_id)
{
    return encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()),
                  level, version, mask_id);
}

GrayImage render(const QrSymbol& sym, int module_px, int quiet_zone)
{
    if (module_px < 1)
        throw std::invalid_argument("module_px must be at least 1");
    if (quiet_zone < 0)
        throw std::invalid_argument("quiet zone must be non-negative");
    const int n = sym.side();
    const int px = (n + 2 * quiet_zone) * module_px;
    GrayImage img(px, px, 255);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (sym.modules.get(x, y))
                for (int dy = 0; dy < module_px; ++dy)
                    for (int dx = 0; dx < module_px; ++dx)
                        img((x + quiet_zone) * module_px + dx, (y + quiet_zone) * module_px + dy) = 0;
    return img;
}

} // namespace egoqr
