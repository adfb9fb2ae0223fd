#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace galerkin;

namespace {

const WaveIndex a{1, 0}, b{0, 1}, c{1, 1};

Polynomial x(WaveIndex k, int p = 1) { return Polynomial::variable(k, p); }

SpectralField point(int n, std::uint64_t seed) {
    SpectralField u(n);
    RngStream(seed).fill_normals(u.coeffs(), 0, Purpose::test);
    return u;
}

}  // namespace

TEST(GaussianMoments, Factors) {
    EXPECT_EQ(gaussian_moment_factor(0), 1.0);
    EXPECT_EQ(gaussian_moment_factor(2), 1.0);
    EXPECT_EQ(gaussian_moment_factor(4), 3.0);
    EXPECT_EQ(gaussian_moment_factor(6), 15.0);
    EXPECT_EQ(gaussian_moment_factor(3), 0.0);
    EXPECT_DOUBLE_EQ(gaussian_moment(4, 0.5), 0.75);
}

TEST(PolynomialTest, ArithmeticAndDerivative) {
    const auto p = x(a) * x(b) + 0.5 * x(c, 2) - x(a);
    EXPECT_EQ(p.degree(), 2);
    EXPECT_EQ(p.variables().size(), 3u);
    const auto dp = p.derivative(a);  // u_b - 1
    const auto u = point(2, 1);
    EXPECT_DOUBLE_EQ(dp.evaluate(u), u.at(b) - 1.0);
    EXPECT_DOUBLE_EQ(p.evaluate(u), u.at(a) * u.at(b) + 0.5 * u.at(c) * u.at(c) - u.at(a));
    EXPECT_TRUE((p - p).is_zero());
    EXPECT_TRUE((0.0 * p).is_zero());
    EXPECT_DOUBLE_EQ((x(a, 2) * x(a)).evaluate(u), std::pow(u.at(a), 3));
    EXPECT_THROW(Polynomial::variable({0, 0}), InvalidArgument);
}

TEST(PolynomialTest, GaussianExpectations) {
    auto var = [](WaveIndex k) { return 1.0 / static_cast<double>(k.norm2()); };
    EXPECT_DOUBLE_EQ(x(c, 2).gaussian_expectation(var), 0.5);
    EXPECT_DOUBLE_EQ((x(a, 2) * x(c, 4)).gaussian_expectation(var), 3.0 * 0.25);
    EXPECT_EQ((x(a) * x(b)).gaussian_expectation(var), 0.0);
    // E[x_c * x_c^3] / v_c = 3 v_c
    EXPECT_DOUBLE_EQ(x(c, 3).gaussian_expectation_times_coordinate_over_variance(c, var), 1.5);
    EXPECT_DOUBLE_EQ(x(c).gaussian_expectation_times_coordinate_over_variance(c, var), 1.0);
    EXPECT_EQ(x(c, 2).gaussian_expectation_times_coordinate_over_variance(c, var), 0.0);
}

TEST(Cylinder, PolynomialDerivativesMatchSymbolic) {
    const auto p = x(a, 2) * x(b) + 3.0 * x(c, 3) - x(a) * x(b) * x(c);
    const auto f = CylinderFunction::polynomial(p);
    const auto u = point(2, 3);
    EXPECT_NEAR(f.value(u), p.evaluate(u), 1e-14);
    for (auto k : {a, b, c}) {
        EXPECT_NEAR(f.partial(k, u), p.derivative(k).evaluate(u), 1e-13);
        for (auto l : {a, b, c}) {
            EXPECT_NEAR(f.partial2(k, l, u), p.derivative(k).derivative(l).evaluate(u), 1e-13);
            for (auto m : {a, b, c})
                EXPECT_NEAR(f.partial3(k, l, m, u), p.derivative(k).derivative(l).derivative(m).evaluate(u), 1e-13);
        }
    }
    EXPECT_EQ(f.partial({2, 0}, u), 0.0);
}

TEST(Cylinder, AnalyticDerivativesMatchFiniteDifferences) {
    const auto battery = standard_battery();
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto u0 = point(2, 100 + s);
        for (const auto& item : battery) {
            const auto& f = item.phi;
            for (auto k : f.support()) {
                auto along = [&](auto g) {
                    return [&, g](double t) {
                        SpectralField v = u0;
                        v.set(k, t);
                        return g(v);
                    };
                };
                const double h = 1e-3;
                const double fd1 = oracle::derivative(along([&](const SpectralField& v) { return f.value(v); }), u0.at(k), h);
                EXPECT_NEAR(f.partial(k, u0), fd1, 1e-6 * (1 + std::abs(fd1))) << item.name;
                for (auto l : f.support()) {
                    const double fd2 = oracle::derivative(
                        along([&](const SpectralField& v) { return f.partial(l, v); }), u0.at(k), h);
                    EXPECT_NEAR(f.partial2(k, l, u0), fd2, 1e-6 * (1 + std::abs(fd2))) << item.name;
                    const double fd3 = oracle::derivative(
                        along([&](const SpectralField& v) { return f.partial2(l, l, v); }), u0.at(k), h);
                    EXPECT_NEAR(f.partial3(k, l, l, u0), fd3, 1e-6 * (1 + std::abs(fd3))) << item.name;
                }
            }
        }
    }
}

TEST(Cylinder, CustomFunctionsLimitDerivativeOrder) {
    const auto f = CylinderFunction::custom({a}, [](auto v) { return std::sin(v[0]); });
    const auto g = CylinderFunction::custom(
        {a, b}, [](auto v) { return v[0] * v[1]; }, [](auto v) { return std::vector<double>{v[1], v[0]}; });
    const auto u = point(2, 4);
    EXPECT_DOUBLE_EQ(f.value(u), std::sin(u.at(a)));
    EXPECT_EQ(f.max_derivative_order(), 0);
    EXPECT_THROW(f.partial(a, u), InvalidArgument);
    EXPECT_EQ(g.max_derivative_order(), 1);
    EXPECT_DOUBLE_EQ(g.partial(b, u), u.at(a));
    EXPECT_THROW(g.partial2(a, b, u), InvalidArgument);
    EXPECT_THROW(CylinderFunction::custom({a, a}, [](auto) { return 0.0; }), InvalidArgument);
    EXPECT_THROW(f.as_polynomial(), InvalidArgument);
}

TEST(Cylinder, SupportChecks) {
    const auto f = CylinderFunction::polynomial(x({3, 0}));
    EXPECT_THROW(f.require_support_in(enumerate_indices(2)), InvalidArgument);
    EXPECT_NO_THROW(f.require_support_in(enumerate_indices(3)));
    EXPECT_THROW(CylinderFunction::analytic({AnalyticTerm{1.0, {Atom{a}, Atom{a}}}}), InvalidArgument);
    EXPECT_THROW(CylinderFunction::analytic({AnalyticTerm{1.0, {Atom{a, 0, 0.0, 0.0, -1.0}}}}), InvalidArgument);
}

TEST(Battery, TwentyItemsOnI2) {
    const auto battery = standard_battery();
    EXPECT_EQ(battery.size(), 20u);
    const auto I2 = enumerate_indices(2);
    for (const auto& item : battery) {
        EXPECT_NO_THROW(item.phi.require_support_in(I2)) << item.name;
        EXPECT_TRUE(item.phi.in_support(item.ibp_index)) << item.name;
        EXPECT_EQ(item.phi.max_derivative_order(), 3);
    }
}
