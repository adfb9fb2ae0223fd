#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace galerkin;

namespace {
const FlowParams kParams(1.0, 1.0, 1.0);
}

TEST(TruncationC, Examples) {
    for (const WaveIndex k : enumerate_indices(4)) {
        const auto b = truncation_error_C_exact(k, 4, kParams.with_beta(0.0), 1e-10);
        EXPECT_EQ(b.lower, 0.0);
        EXPECT_EQ(b.upper, 0.0);
        if (k.k1 == 0) {
            EXPECT_EQ(truncation_error_C_exact(k, 4, kParams, 1e-10).upper, 0.0);
        }
    }
    const auto e4 = truncation_error_C_exact({1, 0}, 4, kParams, 1e-10);
    const auto e8 = truncation_error_C_exact({1, 0}, 8, kParams, 1e-10);
    const auto e16 = truncation_error_C_exact({1, 0}, 16, kParams, 1e-10);
    EXPECT_GT(e4.lower, e8.upper);
    EXPECT_GT(e8.lower, e16.upper);
    // tail sum over |j| > n of 1/j^4 ~ 2/(3 n^3)
    EXPECT_NEAR(e8.value() / e16.value(), 8.0, 0.8);
}

TEST(TruncationC, MatchesDirectSum) {
    const FlowParams p(1.3, 0.7, 2.0);
    for (const WaveIndex k : {WaveIndex{1, 0}, WaveIndex{2, 1}, WaveIndex{-3, 2}, WaveIndex{1, -3}}) {
        double direct = 0.0;
        for (int j = -200000; j <= 200000; ++j) {
            const WaveIndex l{-k.k1, j};
            if (l.norm2() <= 16) continue;
            const double g = gamma_coeff(k, l);
            direct += p.beta() * p.beta() * g * g * marginal_variance(l, p);
        }
        const auto b = truncation_error_C_exact(k, 4, p, 1e-9);
        EXPECT_LE(b.relative_width(), 1e-9);
        EXPECT_NEAR(direct, b.value(), 1e-8 * b.value()) << to_string(k);
        // no other l contributes
        for (int l1 = -6; l1 <= 6; ++l1)
            for (int l2 = -6; l2 <= 6; ++l2)
                if (l1 != -k.k1 && !(l1 == 0 && l2 == 0)) {
                    EXPECT_EQ(gamma_coeff(k, {l1, l2}), 0.0);
                }
    }
}

TEST(TruncationB, MatchesBruteForce) {
    for (const WaveIndex k : {WaveIndex{1, 0}, WaveIndex{2, 1}}) {
        const auto exact = truncation_error_B_exact(k, 4, kParams, 1e-8);
        EXPECT_LE(exact.relative_width(), 1e-8);
        const double r1 = oracle::truncation_B_bruteforce(k, 4, kParams, 700);
        const double r2 = oracle::truncation_B_bruteforce(k, 4, kParams, 1400);
        // the brute force misses a tail of order 1/R^2
        EXPECT_LE(std::abs(r2 - exact.value()), 2.0 * std::abs(r2 - r1) + exact.width()) << to_string(k);
        EXPECT_LE(std::abs(r2 - exact.value()), 1e-5 * exact.value());
    }
}

TEST(TruncationB, VanishesForLargeLevelsOnlyInTheLimit) {
    double prev = INFINITY;
    for (int n : {2, 4, 8, 16, 32, 64}) {
        const auto b = truncation_error_B_exact({1, 0}, n, kParams, 1e-6);
        EXPECT_GT(b.lower, 0.0);
        EXPECT_LT(b.upper, prev);
        prev = b.lower;
    }
    EXPECT_LT(prev, 1e-3 * truncation_error_B_exact({1, 0}, 2, kParams, 1e-6).value());
}

TEST(TruncationB, MonteCarloFiniteComplement) {
    constexpr int n = 4, N = 16;
    constexpr std::size_t samples = 10000;
    const auto I = enumerate_indices(n);
    const TriadTable small(n), large(N);
    const MeasureSampler sampler(N, kParams);
    std::vector<RunningStats> stats(I.size());
    for (std::uint32_t s = 0; s < samples; ++s) {
        const auto u = sampler.sample(RngStream(2024, s));
        const std::span<const double> all(u.coeffs().data(), u.size());
        for (std::size_t k = 0; k < I.size(); ++k) {
            const double d = large.B(all, k) - small.B(all.first(I.size()), k);
            stats[k].add(d * d);
        }
    }
    int outside = 0;
    for (std::size_t k = 0; k < I.size(); ++k) {
        const double exact = truncation_error_B_between(I[k], n, N, kParams);
        const double z = (stats[k].mean - exact) / stats[k].std_error();
        outside += std::abs(z) > 3.0;
        EXPECT_LT(std::abs(z), 5.0) << to_string(I[k]);
    }
    // 48 modes: at most ceil(48 P(|Z| > 3)) = 1 excursion
    EXPECT_LE(outside, 1);
}

TEST(TruncationB, MonteCarloLevel64) {
    constexpr int n = 4, N = 64;
    const WaveIndex k{1, 0};
    // the pairs (l, m) of B_k^N that are not both in I_n
    struct Pair {
        std::size_t l, m;
        double coeff;
    };
    const auto I = shared_index_set(N);
    std::vector<Pair> outer;
    for (std::size_t li = 0; li < I->size(); ++li)
        for (const WaveIndex m : triad_partners(k, (*I)[li])) {
            const int mi = I->position(m);
            if (m.is_zero() || mi < 0) continue;
            if ((*I)[li].norm2() <= n * n && m.norm2() <= n * n) continue;
            const double b = b_coeff(k, (*I)[li], m);
            if (b != 0.0) outer.push_back({li, static_cast<std::size_t>(mi), b});
        }
    const MeasureSampler sampler(N, kParams);
    SpectralField u(I);
    RunningStats stats;
    for (std::uint32_t s = 0; s < 10000; ++s) {
        sampler.sample_into(u, RngStream(77, s));
        double d = 0.0;
        for (const auto& p : outer) d += p.coeff * u[p.l] * u[p.m];
        stats.add(d * d);
    }
    const double exact = truncation_error_B_between(k, n, N, kParams);
    EXPECT_LE(std::abs(stats.mean - exact), 3.0 * stats.std_error());
    EXPECT_LT(exact, truncation_error_B_exact(k, n, kParams, 1e-8).lower);

    // the pair list reproduces the difference of the two truncations
    const auto v = sample_measure(N, kParams, RngStream(78));
    SpectralField w(shared_index_set(n));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = v[i];
    double d = 0.0;
    for (const auto& p : outer) d += p.coeff * v[p.l] * v[p.m];
    EXPECT_NEAR(d, eval_B_component(v, k) - eval_B_component(w, k), 1e-12);
}

TEST(TruncationB, BetweenIncreasesToTheInfiniteComplement) {
    const WaveIndex k{1, 1};
    const auto full = truncation_error_B_exact(k, 4, kParams, 1e-10);
    double prev = 0.0;
    for (int N : {4, 8, 16, 32, 64, 128}) {
        const double v = truncation_error_B_between(k, 4, N, kParams);
        EXPECT_GE(v, prev);
        EXPECT_LE(v, full.upper);
        prev = v;
    }
    EXPECT_EQ(truncation_error_B_between(k, 4, 4, kParams), 0.0);
    EXPECT_NEAR(prev, full.value(), 2e-3 * full.value());
}

TEST(TruncationB, MonotoneInLevel) {
    for (const WaveIndex k : {WaveIndex{1, 0}, WaveIndex{1, 2}, WaveIndex{-2, 2}}) {
        double prevB = INFINITY, prevC = INFINITY;
        for (int n : {3, 4, 5, 6, 8, 12}) {
            const auto b = truncation_error_B_exact(k, n, kParams, 1e-6);
            const auto c = truncation_error_C_exact(k, n, kParams, 1e-9);
            EXPECT_LE(b.lower, prevB);
            EXPECT_LE(c.lower, prevC);
            prevB = b.upper;
            prevC = c.upper;
        }
    }
}

TEST(TruncationB, SecondMomentGrowth) {
    // E|B_k|^2 <= c |k|^2 log(1 + |k|) over I_16 with c fixed at k = (1, 0)
    const FlowParams p(1.0, 1.0);
    auto ratio = [&](WaveIndex k) {
        const auto m = second_moment_B(k, p, 1e-4);
        EXPECT_GT(m.lower, 0.0);
        return m.upper / (static_cast<double>(k.norm2()) * std::log(1.0 + k.norm()));
    };
    const double c = ratio({1, 0});
    for (const WaveIndex k : enumerate_indices(16)) {
        if (k.k1 < 0 || (k.k1 == 0 && k.k2 < 0)) continue;  // symmetric under k -> -k
        EXPECT_LE(ratio(k), c) << to_string(k);
    }
}

TEST(TruncationB, SecondMomentMatchesBruteForce) {
    const WaveIndex k{1, 2};
    const auto m = second_moment_B(k, kParams, 1e-8);
    // n = 0: nothing excluded
    const double r = oracle::truncation_B_bruteforce(k, 0, kParams, 1000);
    EXPECT_NEAR(r, m.value(), 1e-5 * m.value());
}

TEST(TruncationB, FarFieldClosedForm) {
    const double V = 1.0;
    const double C02V2 = kTriadPrefactor * kTriadPrefactor * V * V;
    for (const WaveIndex k : {WaveIndex{1, 0}, WaveIndex{1, 1}, WaveIndex{2, -1}, WaveIndex{0, 3}}) {
        const double a = static_cast<double>(k.norm2());
        const double alpha = std::atan2(k.k2, k.k1);
        for (int l1 = -40; l1 <= 40; ++l1)
            for (int l2 = -40; l2 <= 40; ++l2) {
                const WaveIndex l{l1, l2};
                if (std::abs(l1) <= std::abs(k.k1) || l.is_zero()) continue;
                const double t = detail::triad_variance_term(k, l, 0, V);
                const double f = detail::triad_variance_far(k, l, V);
                ASSERT_NEAR(t, f, 1e-12 * std::abs(t) + 1e-20) << to_string(k) << ' ' << to_string(l);
                if (l.norm() < 4 * k.norm()) continue;
                const double r2 = static_cast<double>(l.norm2());
                const double lead = 0.5 * C02V2 * a * (1.0 - std::cos(4.0 * (std::atan2(l2, l1) - alpha))) / (r2 * r2);
                EXPECT_LE(std::abs(f - lead), detail::kFarRemainderConstant * C02V2 * a * a / (r2 * r2 * r2));
            }
    }
}

TEST(TruncationB, LatticeConstants) {
    const int R = 3000;
    const double s2 = oracle::lattice_sum(2.0, R);
    // tail of sum |l|^-4 beyond R is about pi / R^2
    EXPECT_NEAR(kLatticeS2, s2 + std::numbers::pi / (R * R), 1e-8);
    EXPECT_NEAR(kLatticeG4, oracle::lattice_cos4(R), 1e-8);
}

TEST(TruncationNorm, RangesAndRates) {
    EXPECT_THROW(truncation_norm(DriftKind::B, 4, 1.0, kParams, 1e-6), InvalidArgument);
    EXPECT_THROW(truncation_norm(DriftKind::C, 4, 0.0, kParams, 1e-6), InvalidArgument);
    EXPECT_NO_THROW(truncation_norm(DriftKind::B, 4, 1.05, kParams, 1e-4));

    std::vector<double> c;
    for (int n : {4, 8, 16, 32}) c.push_back(truncation_norm(DriftKind::C, n, 1.0, kParams, 1e-8).value());
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c[i], c[i - 1]);
    const double slope = std::log(c.back() / c.front()) / std::log(8.0);
    EXPECT_LE(slope, -0.85);

    // the s = 1.05 norm decays more slowly than the s = 1.5 norm
    const double b105 = truncation_norm(DriftKind::B, 8, 1.05, kParams, 1e-4).value() /
                        truncation_norm(DriftKind::B, 4, 1.05, kParams, 1e-4).value();
    const double b15 = truncation_norm(DriftKind::B, 8, 1.5, kParams, 1e-4).value() /
                       truncation_norm(DriftKind::B, 4, 1.5, kParams, 1e-4).value();
    EXPECT_GT(b105, b15);
    EXPECT_EQ(truncation_norm(DriftKind::C, 8, 1.0, kParams.with_beta(0.0), 1e-8).upper, 0.0);
}

TEST(TruncationErrors, Preconditions) {
    EXPECT_THROW(truncation_error_B_exact({5, 0}, 4, kParams, 1e-6), InvalidArgument);
    EXPECT_THROW(truncation_error_C_exact({5, 0}, 4, kParams, 1e-6), InvalidArgument);
    EXPECT_THROW(truncation_error_B_exact({1, 0}, 4, kParams, 0.0), InvalidArgument);
    EXPECT_THROW(truncation_error_B_between({1, 0}, 8, 4, kParams), InvalidArgument);
}
