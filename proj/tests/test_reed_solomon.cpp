// SPDX-License-Identifier: Apache-2.0

#include "egoqr/error.hpp"
#include "egoqr/reed_solomon.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace egoqr {
namespace {

TEST(Gf256, FieldAxioms)
{
    EXPECT_EQ(gf256::exp(0), 1);
    EXPECT_EQ(gf256::exp(8), 0x1D); // x^8 = x^4 + x^3 + x^2 + 1
    EXPECT_EQ(gf256::exp(255), 1);
    for (int a = 1; a < 256; ++a) {
        auto v = static_cast<std::uint8_t>(a);
        EXPECT_EQ(gf256::mul(v, gf256::inv(v)), 1);
        EXPECT_EQ(gf256::exp(gf256::log(v)), v);
    }
    // carry-less multiply with reduction as an independent check
    auto slow_mul = [](int a, int b) {
        int r = 0;
        for (int i = 7; i >= 0; --i) {
            r <<= 1;
            if (r & 0x100)
                r ^= 0x11D;
            if ((b >> i) & 1)
                r ^= a;
        }
        return r;
    };
    for (int a = 0; a < 256; a += 7)
        for (int b = 0; b < 256; b += 5)
            EXPECT_EQ(gf256::mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)), slow_mul(a, b));
}

TEST(ReedSolomon, KnownVersion1MParity)
{
    // "HELLO WORLD" 1-M data codewords and their published error correction codewords
    std::vector<std::uint8_t> data{32, 91, 11, 120, 209, 114, 220, 77, 67, 64, 236, 17, 236, 17, 236, 17};
    std::vector<std::uint8_t> ecc{196, 35, 39, 119, 235, 215, 231, 226, 93, 23};
    EXPECT_EQ(rs_parity(data, 10), ecc);
}

TEST(ReedSolomon, CleanBlockReturnsMessage)
{
    std::mt19937_64 rng(1);
    auto msg = testing::random_bytes(rng, 20);
    auto parity = rs_parity(msg, 8);
    auto block = msg;
    block.insert(block.end(), parity.begin(), parity.end());
    auto res = rs_decode_block(block, 8);
    EXPECT_EQ(res.message, msg);
    EXPECT_EQ(res.corrected, 0);
}

std::vector<std::uint8_t> corrupt(std::vector<std::uint8_t> block, int errors, std::mt19937_64& rng)
{
    std::vector<int> idx(block.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_int_distribution<int> flip(1, 255);
    for (int i = 0; i < errors; ++i)
        block[idx[i]] ^= static_cast<std::uint8_t>(flip(rng));
    return block;
}

TEST(ReedSolomon, CorrectsUpToHalfParity)
{
    std::mt19937_64 rng(2);
    for (auto [k, n_parity] : {std::pair{19, 7}, {16, 10}, {13, 13}, {9, 17}, {55, 26}, {68, 18}, {15, 30}}) {
        for (int trial = 0; trial < 200; ++trial) {
            auto msg = testing::random_bytes(rng, k);
            auto parity = rs_parity(msg, n_parity);
            auto block = msg;
            block.insert(block.end(), parity.begin(), parity.end());
            int e = std::uniform_int_distribution<int>(0, n_parity / 2)(rng);
            auto res = rs_decode_block(corrupt(block, e, rng), n_parity);
            ASSERT_EQ(res.message, msg) << "k=" << k << " parity=" << n_parity << " e=" << e;
            EXPECT_EQ(res.corrected, e);
        }
    }
}

TEST(ReedSolomon, BeyondCapacityNeverReturnsInconsistentBlock)
{
    std::mt19937_64 rng(3);
    int raised = 0, returned = 0;
    for (auto [k, n_parity] : {std::pair{19, 7}, {16, 10}, {34, 10}, {9, 17}}) {
        for (int trial = 0; trial < 500; ++trial) {
            auto msg = testing::random_bytes(rng, k);
            auto parity = rs_parity(msg, n_parity);
            auto block = msg;
            block.insert(block.end(), parity.begin(), parity.end());
            auto bad = corrupt(block, n_parity / 2 + 1, rng);
            try {
                auto res = rs_decode_block(bad, n_parity);
                ++returned;
                // whatever comes back must be a codeword within the correction radius of the input
                auto re = res.message;
                auto p = rs_parity(re, n_parity);
                re.insert(re.end(), p.begin(), p.end());
                int dist = 0;
                for (std::size_t i = 0; i < re.size(); ++i)
                    dist += re[i] != bad[i];
                EXPECT_EQ(dist, res.corrected);
                EXPECT_LE(dist, n_parity / 2);
                EXPECT_NE(res.message, msg);
            } catch (const ChecksumError&) {
                ++raised;
            }
        }
    }
    EXPECT_GT(raised, returned * 10);
}

TEST(ReedSolomon, RejectsBadShapes)
{
    std::vector<std::uint8_t> tiny(3, 0);
    EXPECT_THROW(rs_decode_block(tiny, 3), std::invalid_argument);
    EXPECT_THROW(rs_decode_block(tiny, 0), std::invalid_argument);
}

} // namespace
} // namespace egoqr
