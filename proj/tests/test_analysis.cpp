#include "pls/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pls;

namespace {

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Error probability of one rail whose decision statistic is Re(u* v), with u the
// unit-power estimate, v the rotated channel plus noise of variance 1/(2 g), and
// E[u* v] = mu. Conditioned on |u| = a, with a^2 ~ Exp(1), the statistic is
// Gaussian; the outer expectation over a is integrated numerically.
double rail_error_by_integration(cplx mu, double gamma_bar) {
    const double s2 = 1.0 + 1.0 / (2.0 * gamma_bar) - std::norm(mu);
    const double s = std::sqrt(s2);
    const int steps = 20000;
    const double amax = 9.0;
    const double h = amax / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double a = i * h;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * 2.0 * a * std::exp(-a * a) * q_func(mu.real() * std::sqrt(2.0) * a / s);
    }
    return acc * h / 3.0;
}

double bep_by_integration(double rho1, double rho2, double gamma_bar) {
    const double r = std::sqrt(0.5);
    const cplx m1{(rho1 + rho2) * r, (rho1 - rho2) * r};
    const cplx m2{(rho1 - rho2) * r, (rho1 + rho2) * r};
    return 0.5 * (rail_error_by_integration(m1, gamma_bar) + rail_error_by_integration(m2, gamma_bar));
}

}  // namespace

TEST(Bep, PerfectExamples) {
    EXPECT_NEAR(bep_perfect(1.0), 0.5 * (1.0 - 1.0 / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(bep_perfect(1.0), 0.146447, 1e-6);
    EXPECT_NEAR(bep_perfect(10.0), 0.023269, 1e-6);
    EXPECT_LT(bep_perfect(1e12), 1e-12);
    EXPECT_EQ(bep_perfect(std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_THROW(bep_perfect(0.0), std::invalid_argument);
    EXPECT_THROW(bep_perfect(-1.0), std::invalid_argument);
}

TEST(Bep, ImperfectLimits) {
    for (double g : {0.1, 1.0, 10.0, 1000.0}) {
        EXPECT_NEAR(bep_imperfect({g, 1.0, 0.0}), bep_perfect(g), 1e-12);
        EXPECT_DOUBLE_EQ(bep_imperfect({g, 0.0, 0.0}), 0.5);
    }
    EXPECT_THROW(bep_imperfect({1.0, 0.9, 0.9}), std::invalid_argument);
    EXPECT_THROW(bep_imperfect({0.0, 1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(bep_imperfect({1.0, -0.1, 0.0}), std::invalid_argument);
}

TEST(Bep, ImperfectMatchesIntegrationOracle) {
    EXPECT_NEAR(bep_imperfect({10.0, 0.99, 0.0}), bep_by_integration(0.99, 0.0, 10.0), 1e-9);
    EXPECT_NEAR(bep_imperfect({3.0, 0.6, 0.3}), bep_by_integration(0.6, 0.3, 3.0), 1e-9);
    EXPECT_NEAR(bep_imperfect({0.5, 0.2, 0.7}), bep_by_integration(0.2, 0.7, 0.5), 1e-9);
}

TEST(Bep, Correlated) {
    for (double g : {0.5, 5.0, 50.0}) {
        EXPECT_NEAR(bep_correlated(g, 1.0), bep_perfect(g), 1e-15);
        EXPECT_DOUBLE_EQ(bep_correlated(g, 0.0), 0.5);
    }
    EXPECT_NEAR(bep_correlated(std::numeric_limits<double>::infinity(), rho_min(0.999)), 0.021877, 1e-5);
    EXPECT_THROW(bep_correlated(1.0, 1.1), std::invalid_argument);
}

TEST(Bep, MonotoneAndBounded) {
    double prev = 1.0;
    for (double db = -10.0; db <= 40.0; db += 0.5) {
        const double g = std::pow(10.0, db / 10.0);
        const double p = bep_perfect(g);
        EXPECT_LT(p, prev);
        prev = p;
        double prev_r = 1.0;
        for (double rho = 0.0; rho <= 1.0; rho += 0.05) {
            const double c = bep_correlated(g, rho);
            EXPECT_LT(c, prev_r);
            prev_r = c;
            EXPECT_LE(p, c + 1e-15);
            EXPECT_LE(c, 0.5);
        }
    }
}

TEST(Gamma, ConstraintsAndExamples) {
    EXPECT_DOUBLE_EQ(gamma_factor(1.0), 1.0);
    EXPECT_DOUBLE_EQ(gamma_factor(0.0), 2.0);
    EXPECT_NEAR(gamma_factor(0.8), 1.6, 1e-15);
    for (int i = 0; i <= 1000; ++i) {
        const double rho = i / 1000.0;
        EXPECT_GE(gamma_factor(rho), 1.0);
        EXPECT_GE(rho / gamma_factor(rho), 0.0);
        EXPECT_LE(rho / gamma_factor(rho), 1.0);
        EXPECT_LE(rho_min(rho), rho);
        if (i > 0 && i < 1000) EXPECT_LT(rho_min(rho), rho);
    }
    EXPECT_THROW(gamma_factor(-0.01), std::invalid_argument);
}

TEST(RhoMin, Examples) {
    EXPECT_DOUBLE_EQ(rho_min(1.0), 1.0);
    EXPECT_DOUBLE_EQ(rho_min(0.0), 0.0);
    EXPECT_NEAR(rho_min(0.999), 0.956246, 1e-6);
    EXPECT_NEAR(rho_min(0.9), 0.626789, 1e-5);
}

TEST(Nmse, Examples) {
    const Cfr t{{1.0, cplx{0.0, 2.0}, -1.0}};
    EXPECT_DOUBLE_EQ(nmse(t, t), 0.0);
    EXPECT_DOUBLE_EQ(nmse(Cfr{ComplexVec(3)}, t), 1.0);
    Cfr twice = t;
    for (auto& v : twice.values) v *= 2.0;
    EXPECT_DOUBLE_EQ(nmse(twice, t), 1.0);
    EXPECT_THROW(nmse(t, Cfr{ComplexVec(3)}), std::invalid_argument);
    EXPECT_THROW(nmse(t, Cfr{ComplexVec(2, 1.0)}), std::invalid_argument);
}

TEST(Papr, Examples) {
    ComplexVec flat(64);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = std::polar(1.0, 0.3 * static_cast<double>(i));
    EXPECT_NEAR(papr_db(flat), 0.0, 1e-12);
    ComplexVec spike(256);
    spike[17] = 3.0;
    EXPECT_NEAR(papr_db(spike), 10.0 * std::log10(256.0), 1e-12);
    EXPECT_THROW(papr_db(ComplexVec(8)), std::invalid_argument);
    EXPECT_THROW(papr_db(ComplexVec{}), std::invalid_argument);
}

TEST(Ccdf, ExceedanceAndLevel) {
    std::vector<double> s;
    for (int i = 1; i <= 1000; ++i) s.push_back(i);
    const std::vector<double> th{0.0, 500.0, 999.5, 2000.0};
    const auto c = ccdf(s, th);
    EXPECT_DOUBLE_EQ(c.probabilities[0], 1.0);
    EXPECT_DOUBLE_EQ(c.probabilities[1], 0.5);
    EXPECT_DOUBLE_EQ(c.probabilities[2], 0.001);
    EXPECT_DOUBLE_EQ(c.probabilities[3], 0.0);
    for (std::size_t i = 1; i < c.probabilities.size(); ++i) EXPECT_LE(c.probabilities[i], c.probabilities[i - 1]);
    EXPECT_DOUBLE_EQ(ccdf_level(s, 0.001), 999.0);
    EXPECT_DOUBLE_EQ(ccdf_level(s, 0.0), 1000.0);
}

TEST(MinPhaseCorrelation, LimitsAndGuards) {
    const auto pdp = exp_pdp(11, 1.0);
    Rng rng(41);
    std::vector<ChannelPair> same, indep;
    // The magnitude estimate is biased upward at zero correlation; 2e4 pairs keep
    // its sampling spread near 0.005.
    for (int t = 0; t < 20000; ++t) {
        const auto h = draw_channel(pdp, rng);
        const auto d = decompose_fir(h, 64);
        if (t < 1000) same.push_back({d, d});
        indep.push_back({d, decompose_fir(draw_correlated(h, pdp, 0.0, rng), 64)});
    }
    EXPECT_NEAR(empirical_min_phase_correlation(same), 1.0, 1e-6);
    EXPECT_NEAR(empirical_min_phase_correlation(indep), 0.0, 0.03);
    const auto per = per_subcarrier_min_phase_correlation(same);
    ASSERT_EQ(per.size(), 64u);
    for (double v : per) EXPECT_NEAR(v, 1.0, 1e-9);
    same.resize(999);
    EXPECT_THROW(empirical_min_phase_correlation(same), std::invalid_argument);
}
