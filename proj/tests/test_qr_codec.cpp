// SPDX-License-Identifier: Apache-2.0

#include "egoqr/error.hpp"
#include "egoqr/grid_sampler.hpp"
#include "egoqr/qr_decoder.hpp"
#include "egoqr/qr_symbol.hpp"
#include "qr_layout.hpp"
#include "reference_symbols.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace egoqr {
namespace {

template <std::size_t N>
BitMatrix from_rows(const std::array<std::string_view, N>& rows)
{
    BitMatrix m(static_cast<int>(N));
    for (int y = 0; y < static_cast<int>(N); ++y)
        for (int x = 0; x < static_cast<int>(N); ++x)
            m.set(x, y, rows[y][x] == '1');
    return m;
}

std::string dump(const BitMatrix& m)
{
    std::string s;
    for (int y = 0; y < m.side(); ++y) {
        for (int x = 0; x < m.side(); ++x)
            s += m.get(x, y) ? '1' : '0';
        s += '\n';
    }
    return s;
}

/// Packs a bit string ("0100 0000 ...") into data codewords padded with 0xEC/0x11.
std::vector<std::uint8_t> pack_bits(std::string bits, int version, EcLevel level)
{
    std::erase(bits, ' ');
    while (bits.size() % 8)
        bits += '0';
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < bits.size(); i += 8)
        out.push_back(static_cast<std::uint8_t>(std::stoi(bits.substr(i, 8), nullptr, 2)));
    for (std::uint8_t pad = 0xEC; static_cast<int>(out.size()) < layout::data_codewords(version, level);
         pad ^= 0xEC ^ 0x11)
        out.push_back(pad);
    return out;
}

TEST(QrEncoder, MatchesIndependentReferenceVersion1)
{
    auto sym = encode("EGOQR", EcLevel::M, 1, 3);
    EXPECT_EQ(dump(sym.modules), dump(from_rows(testing::kEgoqr1M3)));
}

TEST(QrEncoder, MatchesIndependentReferenceVersion7)
{
    auto sym = encode("https://example.com/egoqr?id=42", EcLevel::Q, 7, 5);
    EXPECT_EQ(dump(sym.modules), dump(from_rows(testing::kUrl7Q5)));
}

TEST(QrEncoder, FormatBitsMatchPolynomialDivision)
{
    EXPECT_EQ(format_bits(EcLevel::L, 0), 0x77C4);
    EXPECT_EQ(format_bits(EcLevel::H, 7), 0x083B);
    // independent long division by x^10 + x^8 + x^5 + x^4 + x^2 + x + 1
    const int level_bits[] = {1, 0, 3, 2}; // L, M, Q, H
    for (int lvl = 0; lvl < 4; ++lvl)
        for (int mask = 0; mask < 8; ++mask) {
            unsigned value = (level_bits[lvl] << 3 | mask) << 10;
            unsigned rem = value;
            for (int bit = 14; bit >= 10; --bit)
                if (rem >> bit & 1)
                    rem ^= 0x537u << (bit - 10);
            EXPECT_EQ(format_bits(static_cast<EcLevel>(lvl), mask), (value | rem) ^ 0x5412);
        }
}

TEST(QrEncoder, VersionBits)
{
    EXPECT_EQ(version_bits(7), 0x07C94u);
    EXPECT_EQ(version_bits(10), 0x0A4D3u);
}

TEST(QrEncoder, ByteCapacities)
{
    EXPECT_EQ(byte_capacity(1, EcLevel::L), 17);
    EXPECT_EQ(byte_capacity(1, EcLevel::M), 14);
    EXPECT_EQ(byte_capacity(1, EcLevel::Q), 11);
    EXPECT_EQ(byte_capacity(1, EcLevel::H), 7);
    EXPECT_EQ(byte_capacity(10, EcLevel::L), 271);
    EXPECT_EQ(byte_capacity(10, EcLevel::M), 213);
    EXPECT_EQ(byte_capacity(10, EcLevel::Q), 151);
    EXPECT_EQ(byte_capacity(10, EcLevel::H), 119);
}

TEST(QrEncoder, PicksSmallestVersion)
{
    EXPECT_EQ(encode(std::string(17, 'a'), EcLevel::L).version, 1);
    EXPECT_EQ(encode(std::string(18, 'a'), EcLevel::L).version, 2);
    EXPECT_EQ(encode(std::string(271, 'a'), EcLevel::L).version, 10);
}

TEST(QrEncoder, CapacityExceeded)
{
    EXPECT_THROW(encode(std::string(3000, 'x'), EcLevel::M), CapacityError);
    EXPECT_THROW(encode(std::string(272, 'x'), EcLevel::L), CapacityError);
    EXPECT_THROW(encode(std::string(15, 'x'), EcLevel::M, 1), CapacityError);
    EXPECT_THROW(encode("x", EcLevel::M, 11), std::out_of_range);
    EXPECT_THROW(encode("x", EcLevel::M, 1, 8), std::out_of_range);
}

TEST(QrEncoder, RenderGeometry)
{
    auto sym = encode("EGOQR", EcLevel::M, 1, 3);
    auto img = render(sym, 3);
    EXPECT_EQ(img.width(), (21 + 8) * 3);
    EXPECT_EQ(img.height(), (21 + 8) * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            int mx = x / 3 - 4, my = y / 3 - 4;
            bool dark = mx >= 0 && my >= 0 && mx < 21 && my < 21 && sym.modules.get(mx, my);
            ASSERT_EQ(img(x, y), dark ? 0 : 255);
        }
    EXPECT_THROW(render(sym, 0), std::invalid_argument);
}

TEST(QrDecoder, EmptyPayload)
{
    auto sym = encode("", EcLevel::L, 1);
    auto res = decode_matrix(sym.modules);
    EXPECT_TRUE(res.bytes.empty());
    EXPECT_EQ(res.version, 1);
    EXPECT_EQ(res.ec_level, EcLevel::L);
}

TEST(QrDecoder, ReadsReferenceSymbols)
{
    auto a = decode_matrix(from_rows(testing::kEgoqr1M3));
    EXPECT_EQ(a.text(), "EGOQR");
    EXPECT_EQ(a.ec_level, EcLevel::M);
    EXPECT_EQ(a.mask_id, 3);
    auto b = decode_matrix(from_rows(testing::kUrl7Q5));
    EXPECT_EQ(b.text(), "https://example.com/egoqr?id=42");
    EXPECT_EQ(b.version, 7);
    EXPECT_EQ(b.mask_id, 5);
}

TEST(QrDecoder, MatrixRoundTripAllVersionsLevelsMasks)
{
    std::mt19937_64 rng(11);
    for (int v = kMinVersion; v <= kMaxVersion; ++v)
        for (int lvl = 0; lvl < 4; ++lvl) {
            auto level = static_cast<EcLevel>(lvl);
            int cap = byte_capacity(v, level);
            for (int mask = 0; mask < 8; ++mask)
                for (int n : {0, cap / 2, cap}) {
                    auto data = testing::random_bytes(rng, n);
                    auto sym = encode(data, level, v, mask);
                    ASSERT_EQ(sym.side(), 17 + 4 * v);
                    auto res = decode_matrix(sym.modules);
                    ASSERT_EQ(res.bytes, data) << "v" << v << " level " << to_string(level) << " mask " << mask;
                    EXPECT_EQ(res.mask_id, mask);
                    EXPECT_EQ(res.ec_level, level);
                    EXPECT_EQ(res.corrected_errors, 0);
                }
        }
}

TEST(QrDecoder, PayloadIsIndependentOfMask)
{
    for (int mask = 0; mask < 8; ++mask)
        EXPECT_EQ(decode_matrix(encode("mask invariance", EcLevel::Q, 2, mask).modules).text(), "mask invariance");
}

TEST(QrDecoder, CorrectsDataModuleErrors)
{
    std::mt19937_64 rng(5);
    auto sym = encode("error tolerant payload", EcLevel::H, 3, 2);
    auto order = layout::data_order(3);
    // flip whole codewords: 3-H has 2 blocks of 22 parity codewords, each fixes 11
    auto m = sym.modules;
    for (int cw : {0, 5, 9, 20})
        for (int b = 0; b < 8; ++b) {
            auto [x, y] = order[cw * 8 + b];
            m.flip(x, y);
        }
    auto res = decode_matrix(m);
    EXPECT_EQ(res.text(), "error tolerant payload");
    EXPECT_EQ(res.corrected_errors, 4);
}

TEST(QrDecoder, ToleratesFormatBitErrors)
{
    auto sym = encode("EGOQR", EcLevel::M, 1, 3);
    auto m = sym.modules;
    auto pos = layout::format_positions(m.side());
    m.flip(pos[0][1].first, pos[0][1].second);
    m.flip(pos[0][7].first, pos[0][7].second);
    auto fmt = read_format_info(m);
    EXPECT_EQ(fmt.ec_level, EcLevel::M);
    EXPECT_EQ(fmt.mask_id, 3);
    EXPECT_EQ(decode_matrix(m).text(), "EGOQR");
}

TEST(QrDecoder, UnreadableFormatRaises)
{
    // an all-dark matrix reads 15 ones in both format copies; that must be more than 3 bits from every valid word
    int min_dist = 99;
    for (int lvl = 0; lvl < 4; ++lvl)
        for (int mask = 0; mask < 8; ++mask)
            min_dist = std::min(min_dist, 15 - std::popcount(static_cast<unsigned>(format_bits(static_cast<EcLevel>(lvl), mask))));
    ASSERT_GT(min_dist, 3);
    EXPECT_THROW(decode_matrix(BitMatrix(21, true)), FormatError);
    EXPECT_THROW(decode_matrix(BitMatrix(22)), FormatError);
}

TEST(QrDecoder, VersionBlockMustAgreeWithSide)
{
    auto sym = encode("version check", EcLevel::L, 8, 0);
    auto m = sym.modules;
    auto pos = layout::version_positions(m.side());
    auto wrong = version_bits(9);
    for (int i = 0; i < 18; ++i)
        for (auto [x, y] : pos[i])
            m.set(x, y, (wrong >> i) & 1);
    EXPECT_THROW(decode_matrix(m), FormatError);
}

TEST(QrDecoder, NumericAndAlphanumericSegments)
{
    // numeric "01234567": 0001, count 8, 012 345 67
    auto num = pack_bits("0001 0000001000 0000001100 0101011001 1000011 0000", 1, EcLevel::M);
    auto res = decode_matrix(layout::assemble_symbol(num, 1, EcLevel::M, 0).modules);
    EXPECT_EQ(res.text(), "01234567");
    EXPECT_EQ(res.mode, SegmentMode::Numeric);

    // alphanumeric "AC-42": 0010, count 5, (10*45+12) (41*45+4) 2
    auto alnum = pack_bits("0010 000000101 00111001110 11100111001 000010 0000", 1, EcLevel::M);
    res = decode_matrix(layout::assemble_symbol(alnum, 1, EcLevel::M, 4).modules);
    EXPECT_EQ(res.text(), "AC-42");
    EXPECT_EQ(res.mode, SegmentMode::Alphanumeric);

    // mixed: numeric "12" then byte "x"
    auto mixed = pack_bits("0001 0000000010 0001100 0100 00000001 01111000 0000", 1, EcLevel::L);
    res = decode_matrix(layout::assemble_symbol(mixed, 1, EcLevel::L, 1).modules);
    EXPECT_EQ(res.text(), "12x");
    EXPECT_EQ(res.mode, SegmentMode::Numeric);
}

TEST(QrDecoder, UnsupportedModesRaise)
{
    auto eci = pack_bits("0111 00011010 0100 00000001 01111000 0000", 1, EcLevel::L);
    EXPECT_THROW(decode_matrix(layout::assemble_symbol(eci, 1, EcLevel::L, 0).modules), UnsupportedError);
    auto kanji = pack_bits("1000 00000001 1010101010101 0000", 1, EcLevel::L);
    EXPECT_THROW(decode_matrix(layout::assemble_symbol(kanji, 1, EcLevel::L, 0).modules), UnsupportedError);
    auto sa = pack_bits("0011 0000 0001 00000000 0000", 1, EcLevel::L);
    EXPECT_THROW(decode_matrix(layout::assemble_symbol(sa, 1, EcLevel::L, 0).modules), UnsupportedError);
}

TEST(QrDecoder, MalformedSegmentsRaise)
{
    // byte count larger than the remaining data
    auto overlong = pack_bits("0100 11111111 01111000", 1, EcLevel::L);
    EXPECT_THROW(decode_matrix(layout::assemble_symbol(overlong, 1, EcLevel::L, 0).modules), FormatError);
    // numeric triple 1000..1023 is invalid
    auto bad_num = pack_bits("0001 0000000011 1111111111 0000", 1, EcLevel::L);
    EXPECT_THROW(decode_matrix(layout::assemble_symbol(bad_num, 1, EcLevel::L, 0).modules), FormatError);
}

TEST(GridSampler, IdentityRenderReadsModulesDirectly)
{
    auto sym = encode("sampler", EcLevel::L, 2, 6);
    auto img = render(sym, 1, 0);
    int n = sym.side();
    std::array<PointF, 4> corners{PointF{0, 0}, {double(n), 0}, {double(n), double(n)}, {0, double(n)}};
    EXPECT_EQ(sample_grid(img, corners, n, threshold_binarizer(127)), sym.modules);
}

TEST(GridSampler, RenderedRoundTripAcrossModuleSizes)
{
    for (int px : {1, 2, 3, 4, 8}) {
        auto sym = encode("round trip " + std::to_string(px), EcLevel::M, 4);
        auto img = render(sym, px);
        double a = 4.0 * px, b = (4.0 + sym.side()) * px;
        std::array<PointF, 4> corners{PointF{a, a}, {b, a}, {b, b}, {a, b}};
        auto m = sample_grid(img, corners, sym.side(), threshold_binarizer(127));
        EXPECT_EQ(m, sym.modules) << "module_px " << px;
        EXPECT_EQ(decode_matrix(m).text(), "round trip " + std::to_string(px));
    }
}

TEST(GridSampler, PerspectiveWarpRoundTrip)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> jitter(-12.0, 12.0);
    for (int trial = 0; trial < 40; ++trial) {
        auto sym = encode(testing::random_bytes(rng, 20), EcLevel::Q);
        const int n = sym.side();
        // quad roughly 6 px per module with random corner displacement
        double s = 6.0 * n, o = 30.0;
        std::array<PointF, 4> quad{PointF{o + jitter(rng), o + jitter(rng)}, {o + s + jitter(rng), o + jitter(rng)},
                                   {o + s + jitter(rng), o + s + jitter(rng)}, {o + jitter(rng), o + s + jitter(rng)}};
        std::array<PointF, 4> module_quad{PointF{0, 0}, {double(n), 0}, {double(n), double(n)}, {0, double(n)}};
        auto to_module = Homography::from_quads(quad, module_quad);

        int size = static_cast<int>(s + 2 * o);
        GrayImage img(size, size, 255);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                auto p = to_module.map({x + 0.5, y + 0.5});
                int mx = static_cast<int>(std::floor(p.x)), my = static_cast<int>(std::floor(p.y));
                if (mx >= 0 && my >= 0 && mx < n && my < n && sym.modules.get(mx, my))
                    img(x, y) = 0;
            }
        auto m = sample_grid(img, quad, n, threshold_binarizer(127));
        ASSERT_EQ(m, sym.modules) << "trial " << trial;
    }
}

TEST(GridSampler, DegenerateCornersRaise)
{
    GrayImage img(50, 50, 255);
    std::array<PointF, 4> collinear{PointF{0, 0}, {10, 0}, {20, 0}, {30, 0}};
    EXPECT_THROW(sample_grid(img, collinear, 21, threshold_binarizer(127)), GeometryError);
    std::array<PointF, 4> repeated{PointF{5, 5}, {5, 5}, {30, 30}, {5, 30}};
    EXPECT_THROW(sample_grid(img, repeated, 21, threshold_binarizer(127)), GeometryError);
}

TEST(GridSampler, OutsideImageReadsLight)
{
    GrayImage img(10, 10, 0);
    std::array<PointF, 4> corners{PointF{-100, -100}, {-79, -100}, {-79, -79}, {-100, -79}};
    EXPECT_EQ(sample_grid(img, corners, 21, threshold_binarizer(127)), BitMatrix(21));
}

TEST(Homography, InverseAndComposition)
{
    std::array<PointF, 4> a{PointF{0, 0}, {10, 1}, {11, 12}, {-1, 9}};
    std::array<PointF, 4> b{PointF{3, 4}, {40, 2}, {38, 50}, {1, 45}};
    auto h = Homography::from_quads(a, b);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(h.map(a[i]).x, b[i].x, 1e-9);
        EXPECT_NEAR(h.map(a[i]).y, b[i].y, 1e-9);
        auto back = h.inverse().map(b[i]);
        EXPECT_NEAR(back.x, a[i].x, 1e-9);
        EXPECT_NEAR(back.y, a[i].y, 1e-9);
    }
    auto id = h.then(h.inverse());
    auto p = id.map({3.25, -7.5});
    EXPECT_NEAR(p.x, 3.25, 1e-9);
    EXPECT_NEAR(p.y, -7.5, 1e-9);
}

} // namespace
} // namespace egoqr
