#include "pls/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pls;

namespace {

ComplexVec naive_dft(const ComplexVec& x) {
    const std::size_t n = x.size();
    ComplexVec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t t = 0; t < n; ++t) {
            acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

ComplexVec random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> d;
    ComplexVec x(n);
    for (auto& v : x) v = {d(eng), d(eng)};
    return x;
}

double max_err(const ComplexVec& a, const ComplexVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Fft, MatchesNaiveDft) {
    for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
        const auto x = random_vec(n, 3);
        EXPECT_LT(max_err(fft(x), naive_dft(x)), 1e-9 * static_cast<double>(n)) << n;
    }
}

TEST(Fft, InverseCarriesScaling) {
    const auto x = random_vec(128, 5);
    EXPECT_LT(max_err(ifft(fft(x)), x), 1e-12);
    const ComplexVec ones(16, cplx{1.0, 0.0});
    const auto spec = fft(ones);
    EXPECT_NEAR(spec[0].real(), 16.0, 1e-12);
    EXPECT_NEAR(ifft(spec)[0].real(), 1.0, 1e-12);
}

TEST(Fft, Parseval) {
    const auto x = random_vec(256, 9);
    const auto X = fft(x);
    double ex = 0.0, eX = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ex += std::norm(x[i]);
        eX += std::norm(X[i]);
    }
    EXPECT_NEAR(eX, 256.0 * ex, 1e-9 * eX);
}

TEST(Fft, RejectsNonPowerOfTwo) {
    EXPECT_THROW(fft(ComplexVec(12)), std::invalid_argument);
    EXPECT_THROW(ifft(ComplexVec(0)), std::invalid_argument);
}

TEST(PolyRoots, SimpleCases) {
    const ComplexVec a{1.0, 0.5};
    const auto r = poly_roots(a);
    ASSERT_EQ(r.roots.size(), 1u);
    EXPECT_NEAR(std::abs(r.roots[0] - cplx{-0.5, 0.0}), 0.0, 1e-14);

    const ComplexVec b{1.0, 0.0, -0.25};
    auto rb = poly_roots(b).roots;
    ASSERT_EQ(rb.size(), 2u);
    std::sort(rb.begin(), rb.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    EXPECT_NEAR(std::abs(rb[0] - cplx{-0.5, 0.0}), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(rb[1] - cplx{0.5, 0.0}), 0.0, 1e-14);

    const ComplexVec c{2.0};
    const auto rc = poly_roots(c);
    EXPECT_TRUE(rc.roots.empty());
    EXPECT_EQ(rc.leading_coeff, cplx(2.0, 0.0));
}

TEST(PolyRoots, Degenerate) {
    EXPECT_THROW(poly_roots(ComplexVec{0.0, 0.0}), std::invalid_argument);
    try {
        poly_roots(ComplexVec(3));
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "degenerate polynomial");
    }
}

TEST(PolyRoots, TrailingAndLeadingZeros) {
    const auto r = poly_roots(ComplexVec{0.0, 1.0, 0.5, 0.0});
    EXPECT_EQ(r.delay, 1u);
    ASSERT_EQ(r.roots.size(), 1u);
    EXPECT_NEAR(std::abs(r.roots[0] + 0.5), 0.0, 1e-14);
}

TEST(PolyRoots, ReconstructsRandomPolynomials) {
    for (unsigned s = 0; s < 50; ++s) {
        const auto c = random_vec(11, 100 + s);
        const auto r = poly_roots(c);
        const auto back = poly_from_roots(r.roots, r.leading_coeff);
        double scale = 0.0;
        for (auto v : c) scale = std::max(scale, std::abs(v));
        EXPECT_LT(max_err(back, c), 1e-10 * scale) << s;
    }
}

TEST(Convolve, SmallCase) {
    const auto y = convolve(ComplexVec{1.0, 2.0}, ComplexVec{1.0, -1.0, 3.0});
    const ComplexVec want{1.0, 1.0, 1.0, 6.0};
    EXPECT_LT(max_err(y, want), 1e-15);
}

TEST(MinPhase, MatchesMinPhaseFir) {
    const ComplexVec h{1.0, 0.5};
    const auto H = fft_padded(h, 256);
    std::vector<double> mag(256);
    for (std::size_t k = 0; k < 256; ++k) mag[k] = std::abs(H[k]);
    const auto M = min_phase_from_magnitude(mag);
    EXPECT_LT(max_err(M, H), 1e-12);
}

TEST(MinPhase, CausalCepstrumAndMagnitude) {
    const auto h = random_vec(11, 21);
    const auto H = fft_padded(h, 256);
    std::vector<double> mag(256);
    for (std::size_t k = 0; k < 256; ++k) mag[k] = std::abs(H[k]);
    const auto M = min_phase_from_magnitude(mag);
    std::vector<double> ph(256);
    for (std::size_t k = 0; k < 256; ++k) {
        EXPECT_NEAR(std::abs(M[k]), mag[k], 1e-9 * mag[k]);
        ph[k] = std::arg(M[k]);
    }
    const auto un = unwrap_phase(ph);
    ComplexVec logm(256);
    for (std::size_t k = 0; k < 256; ++k) logm[k] = {std::log(std::abs(M[k])), un[k]};
    const auto cep = ifft(logm);
    double anti = 0.0, total = 0.0;
    for (std::size_t i = 0; i < 256; ++i) {
        total += std::norm(cep[i]);
        if (i > 128) anti += std::norm(cep[i]);
    }
    EXPECT_LT(anti / total, 1e-8);
}

TEST(MinPhase, FloorsZerosAndRejectsBadInput) {
    std::vector<double> mag(8, 1.0);
    mag[3] = 0.0;
    const auto M = min_phase_from_magnitude(mag);
    for (const auto& v : M) EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
    EXPECT_THROW(min_phase_from_magnitude(std::vector<double>(8, 0.0)), std::invalid_argument);
    std::vector<double> neg(8, 1.0);
    neg[1] = -1.0;
    EXPECT_THROW(min_phase_from_magnitude(neg), std::invalid_argument);
    EXPECT_THROW(min_phase_from_magnitude(std::vector<double>(6, 1.0)), std::invalid_argument);
}

TEST(Unwrap, Examples) {
    const auto u = unwrap_phase(std::vector<double>{3.0, -3.0});
    EXPECT_DOUBLE_EQ(u[0], 3.0);
    EXPECT_NEAR(u[1], -3.0 + 2.0 * kPi, 1e-12);
    EXPECT_NEAR(u[1], 3.2831853, 1e-6);

    std::vector<double> ramp(50);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = std::remainder(0.4 * static_cast<double>(i), 2.0 * kPi);
    const auto ur = unwrap_phase(ramp);
    for (std::size_t i = 0; i < ramp.size(); ++i) EXPECT_NEAR(ur[i], 0.4 * static_cast<double>(i), 1e-12);
}

TEST(ContinuousSqrt, SquaresBackAndIsSmooth) {
    const auto h = random_vec(5, 8);
    const auto H = fft_padded(h, 512);
    const auto s = continuous_sqrt(H);
    for (std::size_t k = 0; k < H.size(); ++k) {
        EXPECT_LT(std::abs(s[k] * s[k] - H[k]), 1e-12 * (1.0 + std::abs(H[k])));
    }
    const auto m = continuous_sqrt(ComplexVec{cplx{-1.0, 0.0}});
    EXPECT_NEAR(std::abs(m[0] - cplx{0.0, 1.0}), 0.0, 1e-15);
}
