// SPDX-License-Identifier: Apache-2.0

#include "egoqr/reed_solomon.hpp"

#include "egoqr/error.hpp"

#include <array>
#include <stdexcept>

namespace egoqr {

namespace gf256 {

namespace {

struct Tables
{
    std::array<std::uint8_t, 512> exp{};
    std::array<int, 256> log{};
};

constexpr Tables make_tables()
{
    Tables t;
    int x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<std::uint8_t>(x);
        t.log[x] = i;
        x <<= 1;
        if (x & 0x100)
            x ^= 0x11D;
    }
    for (int i = 255; i < 512; ++i)
        t.exp[i] = t.exp[i - 255];
    return t;
}

constexpr Tables tables = make_tables();

} // namespace

std::uint8_t exp(int power)
{
    power %= 255;
    if (power < 0)
        power += 255;
    return tables.exp[power];
}

int log(std::uint8_t value)
{
    if (value == 0)
        throw std::domain_error("gf256::log(0)");
    return tables.log[value];
}

std::uint8_t mul(std::uint8_t a, std::uint8_t b)
{
    if (a == 0 || b == 0)
        return 0;
    return tables.exp[tables.log[a] + tables.log[b]];
}

std::uint8_t div(std::uint8_t a, std::uint8_t b)
{
    if (b == 0)
        throw std::domain_error("gf256::div by zero");
    if (a == 0)
        return 0;
    return tables.exp[tables.log[a] + 255 - tables.log[b]];
}

std::uint8_t inv(std::uint8_t a)
{
    return div(1, a);
}

} // namespace gf256

std::vector<std::uint8_t> rs_generator(int degree)
{
    if (degree < 1 || degree > 254)
        throw std::invalid_argument("Reed-Solomon degree out of range");
    // coefficients of x^(degree-1) .. x^0; the monic x^degree term is implicit
    std::vector<std::uint8_t> gen(degree, 0);
    gen[degree - 1] = 1;
    std::uint8_t root = 1;
    for (int i = 0; i < degree; ++i) {
        for (int j = 0; j < degree; ++j) {
            gen[j] = gf256::mul(gen[j], root);
            if (j + 1 < degree)
                gen[j] ^= gen[j + 1];
        }
        root = gf256::mul(root, 0x02);
    }
    return gen;
}

std::vector<std::uint8_t> rs_parity(std::span<const std::uint8_t> data, int n_parity)
{
    auto gen = rs_generator(n_parity);
    std::vector<std::uint8_t> rem(n_parity, 0);
    for (auto b : data) {
        std::uint8_t factor = b ^ rem[0];
        rem.erase(rem.begin());
        rem.push_back(0);
        for (int i = 0; i < n_parity; ++i)
            rem[i] ^= gf256::mul(gen[i], factor);
    }
    return rem;
}

namespace {

// Polynomials below are stored lowest degree first.
std::uint8_t eval_low_first(const std::vector<std::uint8_t>& poly, std::uint8_t x)
{
    std::uint8_t y = 0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it)
        y = gf256::mul(y, x) ^ *it;
    return y;
}

} // namespace

RsDecodeResult rs_decode_block(std::span<const std::uint8_t> codewords, int n_parity)
{
    const int n = static_cast<int>(codewords.size());
    if (n_parity < 1 || n < n_parity + 1 || n > 255)
        throw std::invalid_argument("Reed-Solomon block shape out of range");

    std::vector<std::uint8_t> syndromes(n_parity);
    bool clean = true;
    for (int j = 0; j < n_parity; ++j) {
        std::uint8_t x = gf256::exp(j), s = 0;
        for (auto c : codewords)
            s = gf256::mul(s, x) ^ c;
        syndromes[j] = s;
        clean &= s == 0;
    }
    if (clean)
        return {{codewords.begin(), codewords.end() - n_parity}, 0};

    // Berlekamp-Massey
    std::vector<std::uint8_t> locator{1}, prev{1};
    int degree = 0, shift = 1;
    std::uint8_t prev_discrepancy = 1;
    for (int k = 0; k < n_parity; ++k) {
        std::uint8_t d = syndromes[k];
        for (int i = 1; i <= degree && i < static_cast<int>(locator.size()); ++i)
            d ^= gf256::mul(locator[i], syndromes[k - i]);
        if (d == 0) {
            ++shift;
            continue;
        }
        auto scaled = locator;
        std::uint8_t coef = gf256::div(d, prev_discrepancy);
        if (scaled.size() < prev.size() + shift)
            scaled.resize(prev.size() + shift, 0);
        for (std::size_t i = 0; i < prev.size(); ++i)
            scaled[i + shift] ^= gf256::mul(coef, prev[i]);
        if (2 * degree <= k) {
            prev = locator;
            degree = k + 1 - degree;
            prev_discrepancy = d;
            shift = 1;
        } else {
            ++shift;
        }
        locator = std::move(scaled);
    }
    while (locator.size() > 1 && locator.back() == 0)
        locator.pop_back();
    if (degree > n_parity / 2 || static_cast<int>(locator.size()) - 1 != degree)
        throw ChecksumError("Reed-Solomon block uncorrectable: locator degree " + std::to_string(degree));

    // Chien search: Lambda(alpha^-p) == 0 marks an error at power p (byte n-1-p)
    std::vector<int> powers;
    for (int p = 0; p < n; ++p)
        if (eval_low_first(locator, gf256::exp(-p)) == 0)
            powers.push_back(p);
    if (static_cast<int>(powers.size()) != degree)
        throw ChecksumError("Reed-Solomon block uncorrectable: locator roots do not match degree");

    // Forney with first consecutive root alpha^0: e = X * Omega(X^-1) / Lambda'(X^-1)
    std::vector<std::uint8_t> omega(n_parity, 0);
    for (int i = 0; i < n_parity; ++i)
        for (int j = 0; j < static_cast<int>(locator.size()) && i + j < n_parity; ++j)
            omega[i + j] ^= gf256::mul(syndromes[i], locator[j]);
    std::vector<std::uint8_t> derivative;
    for (std::size_t i = 1; i < locator.size(); ++i)
        derivative.push_back(i % 2 == 1 ? locator[i] : 0);

    std::vector<std::uint8_t> fixed(codewords.begin(), codewords.end());
    for (int p : powers) {
        std::uint8_t x_inv = gf256::exp(-p);
        std::uint8_t denom = eval_low_first(derivative, x_inv);
        if (denom == 0)
            throw ChecksumError("Reed-Solomon block uncorrectable: singular error evaluator");
        std::uint8_t magnitude = gf256::mul(gf256::exp(p), gf256::div(eval_low_first(omega, x_inv), denom));
        if (magnitude == 0)
            throw ChecksumError("Reed-Solomon block uncorrectable: zero error magnitude");
        fixed[n - 1 - p] ^= magnitude;
    }

    std::span<const std::uint8_t> message(fixed.data(), n - n_parity);
    auto parity = rs_parity(message, n_parity);
    if (!std::equal(parity.begin(), parity.end(), fixed.begin() + (n - n_parity)))
        throw ChecksumError("Reed-Solomon block uncorrectable: re-encode mismatch");

    return {{message.begin(), message.end()}, degree};
}

} // namespace egoqr
