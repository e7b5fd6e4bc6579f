// SPDX-License-Identifier: Apache-2.0

#include "egoqr/qr_decoder.hpp"

#include "egoqr/error.hpp"
#include "egoqr/reed_solomon.hpp"
#include "qr_layout.hpp"

#include <bit>
#include <climits>

namespace egoqr {

std::string_view to_string(SegmentMode mode)
{
    switch (mode) {
    case SegmentMode::Numeric: return "numeric";
    case SegmentMode::Alphanumeric: return "alphanumeric";
    case SegmentMode::Byte: return "byte";
    }
    return "?";
}

namespace {

constexpr int kMaxFormatErrors = 3;

class BitReader
{
public:
    explicit BitReader(const std::vector<std::uint8_t>& bytes) : _bytes(bytes) {}

    std::size_t available() const { return _bytes.size() * 8 - _pos; }

    unsigned read(int bits)
    {
        if (static_cast<std::size_t>(bits) > available())
            throw FormatError("segment runs past the end of the data codewords");
        unsigned v = 0;
        for (int i = 0; i < bits; ++i, ++_pos)
            v = v << 1 | ((_bytes[_pos / 8] >> (7 - _pos % 8)) & 1);
        return v;
    }

private:
    const std::vector<std::uint8_t>& _bytes;
    std::size_t _pos = 0;
};

int count_bits(SegmentMode mode, int version)
{
    bool small = version <= 9;
    switch (mode) {
    case SegmentMode::Numeric: return small ? 10 : 12;
    case SegmentMode::Alphanumeric: return small ? 9 : 11;
    case SegmentMode::Byte: return small ? 8 : 16;
    }
    return 0;
}

constexpr char kAlnum[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ $%*+-./:";

void parse_segments(const std::vector<std::uint8_t>& data, int version, DecodedPayload& out)
{
    BitReader br(data);
    bool first = true;
    while (br.available() >= 4) {
        unsigned indicator = br.read(4);
        SegmentMode mode;
        switch (indicator) {
        case 0x0: return;
        case 0x1: mode = SegmentMode::Numeric; break;
        case 0x2: mode = SegmentMode::Alphanumeric; break;
        case 0x4: mode = SegmentMode::Byte; break;
        case 0x7: throw UnsupportedError("ECI segments are not supported");
        case 0x8: throw UnsupportedError("Kanji segments are not supported");
        case 0x3: throw UnsupportedError("structured append is not supported");
        case 0x5:
        case 0x9: throw UnsupportedError("FNC1 (GS1) symbols are not supported");
        case 0xD: throw UnsupportedError("Hanzi segments are not supported");
        default: throw FormatError("malformed segment header: mode indicator " + std::to_string(indicator));
        }
        if (first)
            out.mode = mode;
        first = false;

        unsigned count = br.read(count_bits(mode, version));
        switch (mode) {
        case SegmentMode::Numeric:
            for (; count >= 3; count -= 3) {
                unsigned v = br.read(10);
                if (v >= 1000)
                    throw FormatError("invalid numeric triple");
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v / 100));
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v / 10 % 10));
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v % 10));
            }
            if (count == 2) {
                unsigned v = br.read(7);
                if (v >= 100)
                    throw FormatError("invalid numeric pair");
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v / 10));
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v % 10));
            } else if (count == 1) {
                unsigned v = br.read(4);
                if (v >= 10)
                    throw FormatError("invalid numeric digit");
                out.bytes.push_back(static_cast<std::uint8_t>('0' + v));
            }
            break;
        case SegmentMode::Alphanumeric:
            for (; count >= 2; count -= 2) {
                unsigned v = br.read(11);
                if (v >= 45 * 45)
                    throw FormatError("invalid alphanumeric pair");
                out.bytes.push_back(static_cast<std::uint8_t>(kAlnum[v / 45]));
                out.bytes.push_back(static_cast<std::uint8_t>(kAlnum[v % 45]));
            }
            if (count == 1) {
                unsigned v = br.read(6);
                if (v >= 45)
                    throw FormatError("invalid alphanumeric character");
                out.bytes.push_back(static_cast<std::uint8_t>(kAlnum[v]));
            }
            break;
        case SegmentMode::Byte:
            if (static_cast<std::size_t>(count) * 8 > br.available())
                throw FormatError("byte segment length exceeds data capacity");
            for (unsigned i = 0; i < count; ++i)
                out.bytes.push_back(static_cast<std::uint8_t>(br.read(8)));
            break;
        }
    }
}

} // namespace

FormatInfo read_format_info(const BitMatrix& m)
{
    FormatInfo best;
    best.bit_errors = INT_MAX;
    for (const auto& copy : layout::format_positions(m.side())) {
        unsigned word = 0;
        for (int i = 0; i < 15; ++i)
            word |= static_cast<unsigned>(m.get(copy[i].first, copy[i].second)) << i;
        for (int lvl = 0; lvl < 4; ++lvl)
            for (int mask = 0; mask < 8; ++mask) {
                auto level = static_cast<EcLevel>(lvl);
                int d = std::popcount(word ^ format_bits(level, mask));
                if (d < best.bit_errors)
                    best = {level, mask, d};
            }
    }
    if (best.bit_errors > kMaxFormatErrors)
        throw FormatError("format information unreadable (" + std::to_string(best.bit_errors) + " bit errors)");
    return best;
}

DecodedPayload decode_matrix(const BitMatrix& m)
{
    auto version = version_for_side(m.side());
    if (!version)
        throw FormatError("matrix side " + std::to_string(m.side()) + " is not a supported QR size");
    const int v = *version;

    if (v >= 7) {
        // the side decides the version; a readable version block must agree with it
        int best = INT_MAX, best_version = 0;
        for (int copy = 0; copy < 2; ++copy) {
            auto pos = layout::version_positions(m.side());
            unsigned word = 0;
            for (int i = 0; i < 18; ++i)
                word |= static_cast<unsigned>(m.get(pos[i][copy].first, pos[i][copy].second)) << i;
            for (int cand = 7; cand <= 40; ++cand) {
                int d = std::popcount(word ^ version_bits(cand));
                if (d < best) {
                    best = d;
                    best_version = cand;
                }
            }
        }
        if (best <= 3 && best_version != v)
            throw FormatError("version information disagrees with symbol size");
    }

    auto fmt = read_format_info(m);

    auto order = layout::data_order(v);
    const int total = layout::total_codewords(v);
    std::vector<std::uint8_t> raw(total, 0);
    for (int i = 0; i < total * 8; ++i) {
        auto [x, y] = order[i];
        bool bit = m.get(x, y) != layout::mask_bit(fmt.mask_id, x, y);
        if (bit)
            raw[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
    }

    auto shape = layout::block_shape(v, fmt.ec_level);
    std::vector<std::vector<std::uint8_t>> blocks(shape.count);
    std::size_t k = 0;
    for (int i = 0; i <= shape.short_data; ++i)
        for (int b = 0; b < shape.count; ++b)
            if (i < shape.data_len(b))
                blocks[b].push_back(raw[k++]);
    for (int i = 0; i < shape.ecc; ++i)
        for (int b = 0; b < shape.count; ++b)
            blocks[b].push_back(raw[k++]);

    DecodedPayload out;
    out.version = v;
    out.ec_level = fmt.ec_level;
    out.mask_id = fmt.mask_id;
    std::vector<std::uint8_t> data;
    for (const auto& block : blocks) {
        auto res = rs_decode_block(block, shape.ecc);
        out.corrected_errors += res.corrected;
        data.insert(data.end(), res.message.begin(), res.message.end());
    }
    parse_segments(data, v, out);
    return out;
}

} // namespace egoqr
