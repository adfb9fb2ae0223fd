#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace galerkin;

TEST(MarginalVariance, Examples) {
    EXPECT_DOUBLE_EQ(marginal_variance({1, 0}, FlowParams(1.0, 0.5)), 1.0);
    EXPECT_DOUBLE_EQ(marginal_variance({0, 2}, FlowParams(1.0, 1.0)), 0.125);
    const double v = marginal_variance({2, 3}, FlowParams(1.3, 0.7));
    EXPECT_DOUBLE_EQ(marginal_variance({2, 3}, FlowParams(2.6, 0.7)), 4 * v);
    EXPECT_DOUBLE_EQ(marginal_variance({2, 3}, FlowParams(1.3, 1.4)), v / 2);
    EXPECT_THROW(marginal_variance({0, 0}, FlowParams(1.0, 1.0)), InvalidArgument);
}

TEST(Sampling, MomentsAndIndependence) {
    const FlowParams p(1.0, 0.5);
    const MeasureSampler sampler(3, p);
    RunningStats var10, cov, mean;
    std::vector<RunningStats> means(enumerate_indices(3).size());
    for (std::uint32_t i = 0; i < 100000; ++i) {
        const auto u = sampler.sample(RngStream(17, i));
        var10.add(u.at({1, 0}) * u.at({1, 0}));
        cov.add(u.at({1, 0}) * u.at({0, 1}));
        for (std::size_t k = 0; k < means.size(); ++k) means[k].add(u[k]);
    }
    EXPECT_LE(std::abs(var10.mean - 1.0), 3 * var10.std_error());
    EXPECT_LE(std::abs(cov.mean), 3 * cov.std_error());
    int outside = 0;
    for (auto& m : means) outside += std::abs(m.mean) > 3 * m.std_error();
    EXPECT_LE(outside, 1);  // 28 coordinates
}

TEST(Sampling, ReproducibleAndNested) {
    const FlowParams p(1.0, 2.0);
    const auto u = sample_measure(4, p, RngStream(3, 9));
    const auto v = sample_measure(4, p, RngStream(3, 9));
    const auto w = sample_measure(6, p, RngStream(3, 9));
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_EQ(u[i], v[i]);
        EXPECT_EQ(u[i], w[i]);
    }
}

TEST(SobolevMoment, Examples) {
    const FlowParams p(1.0, 2.0);
    for (double s : {-1.0, 0.0, 2.5}) EXPECT_DOUBLE_EQ(sobolev_moment(1, s, p), 4 * 1.0 / (2 * 2.0));
    double prev = 0.0;
    for (int n : {4, 8, 16, 32, 64}) {
        const double m = sobolev_moment(n, 0.0, p);
        EXPECT_GT(m, prev + 0.5);  // grows like log n
        prev = m;
    }
    const auto S2 = lattice_sum_S(2.0, 1e-8);
    const double limit = S2.value() / (2 * 2.0);
    EXPECT_LT(sobolev_moment(64, 1.0, p), limit);
    EXPECT_NEAR(sobolev_moment(64, 1.0, p), limit, 2e-3 * limit);
}

TEST(GaussianExpectation, Polynomials) {
    const FlowParams p(1.0, 1.0);
    const WaveIndex k{1, 1};
    const double v = marginal_variance(k, p);
    EXPECT_DOUBLE_EQ(gaussian_expectation(Polynomial::variable(k, 4), p), 3 * v * v);
    EXPECT_EQ(gaussian_expectation(Polynomial::variable(k, 3), p), 0.0);
}

TEST(Ibp, ExactCasesAreZero) {
    const FlowParams p(1.3, 0.7);
    for (const WaveIndex k : {WaveIndex{1, 0}, WaveIndex{2, -1}, WaveIndex{0, 3}}) {
        EXPECT_EQ(ibp_residual_exact(Polynomial::variable(k), k, p), 0.0);
        EXPECT_EQ(ibp_residual_exact(Polynomial::variable(k, 2), k, p), 0.0);
        EXPECT_EQ(ibp_residual_exact(Polynomial::variable(k, 3), k, p), 0.0);
    }
    const auto poly = Polynomial::variable({1, 0}, 2) * Polynomial::variable({0, 1}) + Polynomial::variable({0, 1}, 3);
    EXPECT_NEAR(ibp_residual_exact(poly, {0, 1}, p), 0.0, 1e-15);
}

TEST(Ibp, MonteCarloExample) {
    const FlowParams p(1.0, 1.0);
    const WaveIndex k{1, 0}, l{0, 1};
    const auto phi = CylinderFunction::analytic(
        {AnalyticTerm{1.0, {Atom{k, 0, 1.0, 0.0, 0.0}, Atom{l, 0, 0.0, std::numbers::pi / 2, 1.0}}}});
    const auto e = ibp_residual(phi, k, 2, p, 100000, 5);
    EXPECT_EQ(e.samples, 100000u);
    EXPECT_TRUE(e.within(3.0)) << e.mean << " +- " << e.std_error;
}

TEST(Ibp, DetectsAWrongVariance) {
    // phi = u_k: residual 1 - v'/v = -0.1 when sampled with variance v' = 1.1 v
    const FlowParams p(1.0, 1.0), wrong(std::sqrt(1.1), 1.0);
    const auto phi = CylinderFunction::coordinate({1, 0});
    RunningStats s;
    const MeasureSampler sampler(2, wrong);
    for (std::uint32_t i = 0; i < 20000; ++i) s.add(ibp_integrand(phi, {1, 0}, sampler.sample(RngStream(8, i)), p));
    EXPECT_GT(std::abs(s.mean), 5 * s.std_error());
}

TEST(Ibp, Errors) {
    const FlowParams p(1.0, 1.0);
    const auto value_only = CylinderFunction::custom({{1, 0}}, [](auto v) { return v[0]; });
    EXPECT_THROW(ibp_residual(value_only, {1, 0}, 2, p, 100), InvalidArgument);
    EXPECT_THROW(ibp_residual(CylinderFunction::coordinate({3, 0}), {3, 0}, 2, p, 100), InvalidArgument);
    EXPECT_THROW(ibp_residual(CylinderFunction::coordinate({1, 0}), {1, 0}, 2, p, 1), InvalidArgument);
}

TEST(Ibp, ReproducibleAcrossThreadCounts) {
    const FlowParams p(1.0, 1.0);
    const auto phi = standard_battery()[9].phi;
    setenv("GALERKIN_THREADS", "1", 1);
    const auto a = ibp_residual(phi, {1, 1}, 2, p, 5000, 3);
    setenv("GALERKIN_THREADS", "3", 1);
    const auto b = ibp_residual(phi, {1, 1}, 2, p, 5000, 3);
    unsetenv("GALERKIN_THREADS");
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}
