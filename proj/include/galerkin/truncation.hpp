#pragma once

// Exact mean-square truncation errors E|B_k - B_k^n|^2 and E|C_k - C_k^n|^2
// under mu, with certified brackets for the infinite parts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/measure.hpp"
#include "galerkin/parallel.hpp"
#include "galerkin/summation.hpp"
#include "galerkin/triads.hpp"

namespace galerkin {

/// S(2) = sum_{k != 0} |k|^{-4} = (2 pi^2 / 3) G, G Catalan's constant.
inline constexpr double kLatticeS2 = 6.02681203969194012;
/// sum_{k != 0} cos(4 theta_k) |k|^{-4} = Gamma(1/4)^8 / (960 pi^2).
inline constexpr double kLatticeG4 = 3.15121200215389754;

namespace detail {

inline bool in_level(WaveIndex l, int n) { return l.norm2() <= std::int64_t{n} * n; }

/// sum over partners m of l (m != 0, m != l, and not both l, m in I_n) of
/// ((b^k_{lm})^2 + b^k_{lm} b^k_{ml}) v_l v_m, with v_j = V / |j|^2.
/// n = 0 means no exclusion.
inline double triad_variance_term(WaveIndex k, WaveIndex l, int n, double V) {
    const bool l_inner = n > 0 && in_level(l, n);
    double acc = 0.0;
    for (const WaveIndex m : triad_partners(k, l)) {
        if (m.is_zero() || m == l) continue;
        if (l_inner && in_level(m, n)) continue;
        const double blm = b_coeff(k, l, m);
        if (blm == 0.0) continue;
        acc += (blm * blm + blm * b_coeff(k, m, l)) * (V / static_cast<double>(l.norm2())) *
               (V / static_cast<double>(m.norm2()));
    }
    return acc;
}

/// Closed form of triad_variance_term (no exclusion) valid for |l1| > |k1|.
inline double triad_variance_far(WaveIndex k, WaveIndex l, double V) {
    const double a = static_cast<double>(k.norm2());
    const double r2 = static_cast<double>(l.norm2());
    const double x = static_cast<double>(dot(k, l));
    const double cross = static_cast<double>(perp_dot(k, l));
    const double q = r2 + a;
    const double den = q * q - 4.0 * x * x;
    const double num = 2.0 * (2.0 * x * x + a * a) * (q * q + 4.0 * x * x) - 24.0 * a * q * x * x;
    return kTriadPrefactor * kTriadPrefactor * V * V * (cross * cross / (a * r2 * r2)) * num / (den * den);
}

/// Constant M in |far - leading| <= M C0^2 V^2 |k|^4 / |l|^6 for |l| >= 4|k|.
inline constexpr double kFarRemainderConstant = 3.0;

/// sum_{|l| <= R} |l|^{-4} and sum_{|l| <= R} cos(4 theta_l) |l|^{-4}, by R^2.
class DiscMoments {
public:
    static DiscMoments& instance() {
        static DiscMoments m;
        return m;
    }

    std::pair<double, double> at(std::int64_t r2) {
        std::lock_guard lock(mutex_);
        if (r2 >= static_cast<std::int64_t>(p1_.size())) build(std::max<std::int64_t>(r2, 2 * static_cast<std::int64_t>(p1_.size())));
        return {p1_[static_cast<std::size_t>(r2)], p2_[static_cast<std::size_t>(r2)]};
    }

private:
    void build(std::int64_t r2max) {
        std::vector<CompensatedSum> s1(static_cast<std::size_t>(r2max) + 1), s2(static_cast<std::size_t>(r2max) + 1);
        const int R = static_cast<int>(std::floor(std::sqrt(static_cast<double>(r2max)))) + 1;
        for (int a = -R; a <= R; ++a)
            for (int b = -R; b <= R; ++b) {
                const std::int64_t q = std::int64_t{a} * a + std::int64_t{b} * b;
                if (q == 0 || q > r2max) continue;
                const double qd = static_cast<double>(q);
                const double a2 = static_cast<double>(a) * a, b2 = static_cast<double>(b) * b;
                s1[static_cast<std::size_t>(q)] += 1.0 / (qd * qd);
                s2[static_cast<std::size_t>(q)] += (a2 * a2 - 6.0 * a2 * b2 + b2 * b2) / (qd * qd * qd * qd);
            }
        p1_.assign(s1.size(), 0.0);
        p2_.assign(s2.size(), 0.0);
        CompensatedSum c1, c2;
        for (std::size_t q = 0; q < s1.size(); ++q) {
            c1 += s1[q].value();
            c2 += s2[q].value();
            p1_[q] = c1.value();
            p2_[q] = c2.value();
        }
    }

    std::mutex mutex_;
    std::vector<double> p1_, p2_;
};

/// Integer floor(sqrt(x)) for x >= 0, or -1 for x < 0.
inline std::int64_t isqrt(std::int64_t x) {
    if (x < 0) return -1;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
    while (r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

/// Calls f(l) for every lattice point with r2_lo < |l|^2 <= r2_hi.
template <class F>
void for_each_in_annulus(std::int64_t r2_lo, std::int64_t r2_hi, F&& f) {
    const auto R = static_cast<int>(isqrt(r2_hi));
    for (int a = -R; a <= R; ++a) {
        const std::int64_t a2 = std::int64_t{a} * a;
        const std::int64_t hi = isqrt(r2_hi - a2);
        const std::int64_t lo = isqrt(r2_lo - a2);  // -1 when the inner disc misses this column
        for (std::int64_t b = lo + 1; b <= hi; ++b) {
            f(WaveIndex{a, static_cast<int>(b)});
            if (b != 0) f(WaveIndex{a, static_cast<int>(-b)});
        }
    }
}

/// sum_{|l| > R} |l|^{-6} upper bound via unit-square comparison.
inline double inverse_sixth_tail(double R) {
    const double c = std::numbers::sqrt2 / 2.0;
    const double t0 = R - 2.0 * c;
    return 2.0 * std::numbers::pi * (1.0 / (4.0 * std::pow(t0, 4)) + c / (5.0 * std::pow(t0, 5)));
}

/// E|B_k - B_k^n|^2 (n >= 1) or E|B_k|^2 (n = 0).
inline Bracket triad_truncation_bracket(WaveIndex k, int n, double V, double rel_tol) {
    const int k1abs = std::abs(k.k1);
    const double K = k.norm();
    const double a = static_cast<double>(k.norm2());
    const double C02V2 = kTriadPrefactor * kTriadPrefactor * V * V;
    const double ka = static_cast<double>(k.k1) * k.k1, kb = static_cast<double>(k.k2) * k.k2;
    const double cos4alpha = (ka * ka - 6.0 * ka * kb + kb * kb) / (a * a);
    const std::int64_t n2 = std::int64_t{n} * n;

    auto inner_term = [&](WaveIndex l) {
        if (l.norm2() <= n2 || std::abs(l.k1) <= k1abs) return triad_variance_term(k, l, n, V);
        return triad_variance_far(k, l, V);
    };

    int R = std::max({static_cast<int>(std::ceil(4.0 * K)), n + 1, 8});
    CompensatedSum inner;
    for_each_in_annulus(-1, std::int64_t{R} * R, [&](WaveIndex l) {
        if (!l.is_zero()) inner += inner_term(l);
    });

    for (int iter = 0; iter < 64; ++iter) {
        const std::int64_t R2 = std::int64_t{R} * R;
        const auto [P1, P2] = DiscMoments::instance().at(R2);
        const double lead = 0.5 * C02V2 * a * ((kLatticeS2 - P1) - cos4alpha * (kLatticeG4 - P2));
        const double remainder = kFarRemainderConstant * C02V2 * a * a * inverse_sixth_tail(R);
        const double rough_total = std::max(inner.value() + lead, 0.0);

        // strip |l1| <= |k1| beyond R: explicit (T - F) up to |l2| <= J, bound beyond
        const double strip_const = (2.0 * k1abs + 1.0) * 24.0 * kTriadPrefactor * kTriadPrefactor * V * V / 3.0;
        const double strip_target = 0.25 * rel_tol * rough_total;
        double J = R;
        if (strip_target > 0.0) J = std::max(J, K + std::cbrt(strip_const / strip_target) + 1.0);
        const int Ji = static_cast<int>(std::ceil(J));
        const double strip_bound = strip_const / std::pow(Ji - K, 3);
        CompensatedSum strip;
        for (int l1 = -k1abs; l1 <= k1abs; ++l1)
            for (int l2 = -Ji; l2 <= Ji; ++l2) {
                const WaveIndex l{l1, l2};
                if (l.norm2() <= R2) continue;
                strip += triad_variance_term(k, l, 0, V) - triad_variance_far(k, l, V);
            }

        const double centre = inner.value() + lead + strip.value();
        const double slack = 1e-14 * (std::abs(inner.value()) + std::abs(lead) + std::abs(strip.value())) +
                             C02V2 * a * 4.0 * std::numeric_limits<double>::epsilon() * kLatticeS2;
        const double half = remainder + strip_bound + slack;
        const Bracket b{centre - half, centre + half};
        if (b.lower > 0.0 && b.width() <= rel_tol * b.lower) return b;

        const int R_next = static_cast<int>(std::ceil(1.5 * R));
        for_each_in_annulus(R2, std::int64_t{R_next} * R_next, [&](WaveIndex l) { inner += inner_term(l); });
        R = R_next;
    }
    throw InvalidArgument("truncation_error_B_exact: rel_tol " + std::to_string(rel_tol) + " not reached for k = " +
                          to_string(k));
}

}  // namespace detail

/// E|C_k - C_k^n|^2 = beta^2 sum_{l not in I_n} (gamma^k_l)^2 sigma^2 / (2 nu |l|^2).
///
/// Only l = (-k1, j) contribute and (gamma^k_l)^2 = k1^2 / (|k|^2 |l|^2),
/// so the sum is one-dimensional with an integral-comparison tail.
inline Bracket truncation_error_C_exact(WaveIndex k, int n, const FlowParams& params, double rel_tol) {
    detail::require(shared_index_set(n)->contains(k), "truncation_error_C_exact: " + to_string(k) + " not in I_n");
    detail::require(rel_tol > 0.0, "truncation_error_C_exact: rel_tol must be positive");
    if (params.beta() == 0.0 || k.k1 == 0) return {0.0, 0.0};
    const double V = params.sigma() * params.sigma() / (2.0 * params.nu());
    const double a = static_cast<double>(k.k1) * k.k1;
    const double pref = params.beta() * params.beta() * V * a / static_cast<double>(k.norm2());
    const std::int64_t n2 = std::int64_t{n} * n;

    auto f = [&](std::int64_t j) {
        const double q = a + static_cast<double>(j) * static_cast<double>(j);
        return 1.0 / (q * q);
    };
    // smallest j >= 0 with a + j^2 > n^2
    std::int64_t j0 = 0;
    while (std::int64_t{k.k1} * k.k1 + j0 * j0 <= n2) ++j0;

    CompensatedSum partial;
    std::int64_t M = std::max<std::int64_t>(j0, 16);
    for (std::int64_t j = j0; j <= M; ++j) partial += (j == 0 ? 1.0 : 2.0) * f(j);
    for (;;) {
        // sum_{j > M} f(j) lies between int_{M+1}^inf f and int_M^inf f, and
        // x^{-4} (1 - 2a/x^2) <= f(x) <= x^{-4}
        const double m1 = static_cast<double>(M + 1), m0 = static_cast<double>(M);
        const double lo = 1.0 / (3.0 * std::pow(m1, 3)) - 2.0 * a / (5.0 * std::pow(m1, 5));
        const double hi = 1.0 / (3.0 * std::pow(m0, 3));
        const Bracket b{pref * (partial.value() + 2.0 * std::max(lo, 0.0)), pref * (partial.value() + 2.0 * hi)};
        if (b.width() <= rel_tol * b.lower) return b;
        const std::int64_t M_next = 2 * M;
        for (std::int64_t j = M + 1; j <= M_next; ++j) partial += 2.0 * f(j);
        M = M_next;
        if (M > (std::int64_t{1} << 40))
            throw InvalidArgument("truncation_error_C_exact: rel_tol " + std::to_string(rel_tol) + " unreachable");
    }
}

/// E|B_k - B_k^n|^2 = sum over (l, m) not both in I_n of
/// ((b^k_{lm})^2 + b^k_{lm} b^k_{ml}) E[u_l^2] E[u_m^2].
inline Bracket truncation_error_B_exact(WaveIndex k, int n, const FlowParams& params, double rel_tol) {
    detail::require(shared_index_set(n)->contains(k), "truncation_error_B_exact: " + to_string(k) + " not in I_n");
    detail::require(rel_tol > 0.0, "truncation_error_B_exact: rel_tol must be positive");
    const double V = params.sigma() * params.sigma() / (2.0 * params.nu());
    return detail::triad_truncation_bracket(k, n, V, rel_tol);
}

/// E|B_k|^2 for the untruncated drift.
inline Bracket second_moment_B(WaveIndex k, const FlowParams& params, double rel_tol) {
    detail::require(!k.is_zero(), "second_moment_B: zero wavenumber");
    detail::require(rel_tol > 0.0, "second_moment_B: rel_tol must be positive");
    const double V = params.sigma() * params.sigma() / (2.0 * params.nu());
    return detail::triad_truncation_bracket(k, 0, V, rel_tol);
}

/// E|B_k^N - B_k^n|^2 for n <= N, a finite sum.
inline double truncation_error_B_between(WaveIndex k, int n, int N, const FlowParams& params) {
    detail::require(n >= 1 && n <= N, "truncation_error_B_between: need 1 <= n <= N");
    detail::require(shared_index_set(n)->contains(k), "truncation_error_B_between: " + to_string(k) + " not in I_n");
    const double V = params.sigma() * params.sigma() / (2.0 * params.nu());
    const auto I = shared_index_set(N);
    CompensatedSum acc;
    for (const WaveIndex l : *I) {
        const bool l_inner = detail::in_level(l, n);
        for (const WaveIndex m : triad_partners(k, l)) {
            if (m.is_zero() || m == l || !detail::in_level(m, N)) continue;
            if (l_inner && detail::in_level(m, n)) continue;
            const double blm = b_coeff(k, l, m);
            if (blm == 0.0) continue;
            acc += (blm * blm + blm * b_coeff(k, m, l)) * (V / static_cast<double>(l.norm2())) *
                   (V / static_cast<double>(m.norm2()));
        }
    }
    return acc.value();
}

/// sum_{k in I_n} |k|^{-2s} E|X_k - X_k^n|^2 for X = B (s > 1) or C (s > 0).
inline Bracket truncation_norm(DriftKind kind, int n, double s, const FlowParams& params, double rel_tol) {
    if (kind == DriftKind::B)
        detail::require(s > 1.0, "truncation_norm: B requires s > 1, got s = " + std::to_string(s));
    else
        detail::require(s > 0.0, "truncation_norm: C requires s > 0, got s = " + std::to_string(s));
    detail::require(rel_tol > 0.0, "truncation_norm: rel_tol must be positive");
    const auto I = shared_index_set(n);
    std::vector<Bracket> per_mode(I->size());
    parallel_chunks(I->size(), 8, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const WaveIndex k = (*I)[i];
            per_mode[i] = kind == DriftKind::B ? truncation_error_B_exact(k, n, params, rel_tol)
                                               : truncation_error_C_exact(k, n, params, rel_tol);
        }
    });
    CompensatedSum lo, hi;
    for (std::size_t i = 0; i < I->size(); ++i) {
        const double w = std::pow(static_cast<double>((*I)[i].norm2()), -s);
        lo += w * per_mode[i].lower;
        hi += w * per_mode[i].upper;
    }
    return {lo.value(), hi.value()};
}

}  // namespace galerkin
