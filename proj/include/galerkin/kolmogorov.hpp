#pragma once

// The truncated Kolmogorov operator
//   K^n phi = (sigma^2/2) sum_k d_k^2 phi + sum_k (-nu |k|^2 u_k - B_k^n - C_k^n) d_k phi,
// its invariance under mu, the commutator [d_k, K^n] and the viscosity
// condition nu^3 > 40 S(2) sigma^2 / pi^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "galerkin/cylinder.hpp"
#include "galerkin/dynamics.hpp"
#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/measure.hpp"
#include "galerkin/parallel.hpp"
#include "galerkin/polynomial.hpp"
#include "galerkin/rng.hpp"
#include "galerkin/triads.hpp"

namespace galerkin {

namespace detail {

inline void require_level(const SpectralField& u, const TriadTable& table) {
    require(u.level() == table.level(), "level mismatch between field and triad table");
}

/// -nu |k|^2 u_k - B_k^n(u) - C_k^n(u) for k at canonical position ki.
inline double drift_component(const TriadTable& table, const SpectralField& u, std::size_t ki,
                              const FlowParams& params) {
    const WaveIndex k = table.indices()[ki];
    return -params.nu() * static_cast<double>(k.norm2()) * u[ki] - table.B(u.coeffs(), ki) -
           table.C(u.coeffs(), ki, params.beta());
}

}  // namespace detail

inline double apply_K(const CylinderFunction& phi, const SpectralField& u, const FlowParams& params,
                      const TriadTable& table) {
    detail::require_level(u, table);
    phi.require_support_in(u.indices());
    if (phi.max_derivative_order() < 2) throw InvalidArgument("apply_K: test function lacks second derivatives");
    const double half_s2 = 0.5 * params.sigma() * params.sigma();
    double acc = 0.0;
    for (const WaveIndex k : phi.support()) {
        const auto ki = static_cast<std::size_t>(u.indices().position(k));
        acc += half_s2 * phi.partial2(k, k, u) + detail::drift_component(table, u, ki, params) * phi.partial(k, u);
    }
    return acc;
}

/// K^n phi (u) at the level of u.
inline double apply_K(const CylinderFunction& phi, const SpectralField& u, const FlowParams& params) {
    phi.require_support_in(u.indices());
    if (phi.max_derivative_order() < 2) throw InvalidArgument("apply_K: test function lacks second derivatives");
    const double half_s2 = 0.5 * params.sigma() * params.sigma();
    double acc = 0.0;
    for (const WaveIndex k : phi.support()) {
        const double drift = -params.nu() * static_cast<double>(k.norm2()) * u.at(k) - eval_B_component(u, k) -
                             eval_C_component(u, k, params.beta());
        acc += half_s2 * phi.partial2(k, k, u) + drift * phi.partial(k, u);
    }
    return acc;
}

/// K^n P as a polynomial, for polynomial P supported in I_n.
inline Polynomial kolmogorov_polynomial(const Polynomial& p, int n, const FlowParams& params) {
    const auto table = shared_triad_table(n);
    const auto& I = table->indices();
    Polynomial out;
    for (const WaveIndex k : p.variables()) {
        const int ki = I.position(k);
        detail::require(ki >= 0, "kolmogorov_polynomial: " + to_string(k) + " outside I_n");
        const Polynomial dk = p.derivative(k);
        out += (0.5 * params.sigma() * params.sigma()) * dk.derivative(k);
        Polynomial drift = Polynomial::variable(k) * (-params.nu() * static_cast<double>(k.norm2()));
        for (const auto& e : table->row(static_cast<std::size_t>(ki)))
            drift -= Polynomial::monomial(e.coeff, {{I[static_cast<std::size_t>(e.l)], 1}, {I[static_cast<std::size_t>(e.m)], 1}});
        for (const auto& e : table->coriolis_row(static_cast<std::size_t>(ki)))
            drift += Polynomial::monomial(params.beta() * e.gamma, {{I[static_cast<std::size_t>(e.l)], 1}});
        out += drift * dk;
    }
    return out;
}

/// Exact int K^n P dmu for polynomial P, using nu |k|^2 = sigma^2 / (2 v_k):
/// sum_k (sigma^2/2) (E d_k^2 P - E[u_k d_k P] / v_k) - E[(B_k + C_k) d_k P].
inline double invariance_exact(const Polynomial& p, int n, const FlowParams& params) {
    const auto table = shared_triad_table(n);
    const auto& I = table->indices();
    auto var = [&](WaveIndex j) { return marginal_variance(j, params); };
    double acc = 0.0;
    for (const WaveIndex k : p.variables()) {
        const int ki = I.position(k);
        detail::require(ki >= 0, "invariance_exact: " + to_string(k) + " outside I_n");
        const Polynomial dk = p.derivative(k);
        acc += 0.5 * params.sigma() * params.sigma() *
               (dk.derivative(k).gaussian_expectation(var) - dk.gaussian_expectation_times_coordinate_over_variance(k, var));
        Polynomial bc;
        for (const auto& e : table->row(static_cast<std::size_t>(ki)))
            bc += Polynomial::monomial(e.coeff, {{I[static_cast<std::size_t>(e.l)], 1}, {I[static_cast<std::size_t>(e.m)], 1}});
        for (const auto& e : table->coriolis_row(static_cast<std::size_t>(ki)))
            bc -= Polynomial::monomial(params.beta() * e.gamma, {{I[static_cast<std::size_t>(e.l)], 1}});
        acc -= (bc * dk).gaussian_expectation(var);
    }
    return acc;
}

/// Monte Carlo estimate of int K^n phi dmu^n.
inline MCEstimate invariance_mc(const CylinderFunction& phi, int n, const FlowParams& params, std::size_t samples,
                                std::uint64_t seed = 1) {
    detail::require(samples >= 2, "invariance_mc: need at least two samples");
    const auto table = shared_triad_table(n);
    phi.require_support_in(table->indices());
    const MeasureSampler sampler(n, params);
    const RngStream root(seed);
    const auto stats = parallel_stats(samples, [&](std::size_t i) {
        thread_local SpectralField u(1);
        if (u.level() != n) u = SpectralField(sampler.shared_indices());
        sampler.sample_into(u, root.substream(static_cast<std::uint32_t>(i)));
        return apply_K(phi, u, params, *table);
    });
    return MCEstimate::from(stats);
}

/// d B_l^n / d u_k = sum_i (b^l_{ik} + b^l_{ki}) u_i over the four
/// neighbours i in {l - k, k - l, k + l, -k - l} within I_n, or
/// d C_l^n / d u_k = -beta gamma^l_k.
inline double drift_jacobian_entry(DriftKind which, WaveIndex l, WaveIndex k, const SpectralField& u,
                                   const FlowParams& params) {
    const auto& I = u.indices();
    detail::require(I.contains(l) && I.contains(k),
                    "drift_jacobian_entry: " + to_string(l) + " or " + to_string(k) + " outside I_n");
    if (which == DriftKind::C) return -params.beta() * gamma_coeff(l, k);
    double acc = 0.0;
    for (const WaveIndex i : std::array{l - k, k - l, k + l, -k - l}) {
        const int p = I.position(i);
        if (p < 0) continue;
        acc += (b_coeff(l, i, k) + b_coeff(l, k, i)) * u[static_cast<std::size_t>(p)];
    }
    return acc;
}

struct CommutatorCheck {
    double residual = 0.0;
    double scale = 0.0;  ///< sum of magnitudes of the terms on both sides
    double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// d_k (K^n phi)(u) - [K^n (d_k phi)(u) - nu |k|^2 d_k phi(u) - sum_l d_k (B_l^n + C_l^n)(u) d_l phi(u)].
///
/// The left side is symbolic for polynomials; for the analytic family it is
/// assembled from third derivatives with d_k of the drift taken from the
/// triad table rather than the four-neighbour expansion.
inline CommutatorCheck commutator_check(const CylinderFunction& phi, WaveIndex k, const SpectralField& u,
                                        const FlowParams& params) {
    const auto& I = u.indices();
    const int n = u.level();
    detail::require(I.contains(k), "commutator_residual: " + to_string(k) + " outside I_n");
    phi.require_support_in(I);
    if (phi.max_derivative_order() < 3)
        throw InvalidArgument("commutator_residual: test function lacks third derivatives");
    const auto table = shared_triad_table(n);
    const double half_s2 = 0.5 * params.sigma() * params.sigma();
    const double nuk2 = params.nu() * static_cast<double>(k.norm2());

    // right side
    double k_dk = 0.0;  // K^n (d_k phi)(u)
    double k_dk_mag = 0.0;
    for (const WaveIndex j : phi.support()) {
        const auto ji = static_cast<std::size_t>(I.position(j));
        const double t1 = half_s2 * phi.partial3(k, j, j, u);
        const double t2 = detail::drift_component(*table, u, ji, params) * phi.partial2(k, j, u);
        k_dk += t1 + t2;
        k_dk_mag += std::abs(t1) + std::abs(t2);
    }
    const double dk_phi = phi.partial(k, u);
    double jac_sum = 0.0, jac_mag = 0.0;
    for (const WaveIndex l : phi.support()) {
        const double j = drift_jacobian_entry(DriftKind::B, l, k, u, params) +
                         drift_jacobian_entry(DriftKind::C, l, k, u, params);
        jac_sum += j * phi.partial(l, u);
        jac_mag += std::abs(j * phi.partial(l, u));
    }
    const double rhs = k_dk - nuk2 * dk_phi - jac_sum;

    double lhs = 0.0;
    if (phi.is_polynomial()) {
        lhs = kolmogorov_polynomial(phi.as_polynomial(), n, params).derivative(k).evaluate(u);
    } else {
        const auto ki = static_cast<std::size_t>(I.position(k));
        for (const WaveIndex j : phi.support()) {
            const auto ji = static_cast<std::size_t>(I.position(j));
            // d_k of the drift component at j, from the table
            double d = j == k ? -nuk2 : 0.0;
            for (const auto& e : table->row(ji)) {
                if (static_cast<std::size_t>(e.l) == ki) d -= e.coeff * u[static_cast<std::size_t>(e.m)];
                if (static_cast<std::size_t>(e.m) == ki) d -= e.coeff * u[static_cast<std::size_t>(e.l)];
            }
            for (const auto& e : table->coriolis_row(ji))
                if (static_cast<std::size_t>(e.l) == ki) d += params.beta() * e.gamma;
            lhs += half_s2 * phi.partial3(k, j, j, u) + d * phi.partial(j, u) +
                   detail::drift_component(*table, u, ji, params) * phi.partial2(k, j, u);
        }
    }
    return {lhs - rhs, std::abs(lhs) + k_dk_mag + std::abs(nuk2 * dk_phi) + jac_mag};
}

inline double commutator_residual(const CylinderFunction& phi, WaveIndex k, const SpectralField& u,
                                  const FlowParams& params) {
    return commutator_check(phi, k, u, params).residual;
}

struct AssumptionReport {
    Bracket s2_bracket;         ///< certified S(2)
    Bracket threshold;          ///< 40 S(2) sigma^2 / pi^2
    double margin = 0.0;        ///< nu^3 - threshold.upper
    bool holds = false;         ///< margin > 0
    Bracket nu_min;             ///< (threshold)^{1/3} at both bracket ends
};

inline constexpr double kAssumptionS2Tolerance = 1e-8;

/// nu^3 > 40 S(2) sigma^2 / pi^2, decided against the upper end of the S(2) bracket.
inline AssumptionReport assumption_check(const FlowParams& params) {
    const LatticeSum s2 = lattice_sum_S(2.0, kAssumptionS2Tolerance);
    const double c = 40.0 * params.sigma() * params.sigma() / (std::numbers::pi * std::numbers::pi);
    AssumptionReport r;
    r.s2_bracket = s2.bracket;
    r.threshold = {c * s2.bracket.lower, c * s2.bracket.upper};
    r.margin = params.nu() * params.nu() * params.nu() - r.threshold.upper;
    r.holds = r.margin > 0.0;
    r.nu_min = {std::cbrt(r.threshold.lower), std::cbrt(r.threshold.upper)};
    return r;
}

/// A named test function plus the coordinate used for integration by parts.
struct BatteryItem {
    std::string name;
    CylinderFunction phi;
    WaveIndex ibp_index;
};

/// Twenty cylinder functions supported in I_2: polynomials, Gaussian bumps
/// and trigonometric factors, alone and in products.
inline std::vector<BatteryItem> standard_battery() {
    const WaveIndex a{1, 0}, b{0, 1}, c{1, 1}, d{-1, 1}, e{2, 0}, f{0, -1}, g{-1, 0}, h{1, -1}, i{0, 2};
    auto x = [](WaveIndex k, int p = 1) { return Polynomial::variable(k, p); };
    auto poly = [](Polynomial p) { return CylinderFunction::polynomial(std::move(p)); };
    auto atom = [](WaveIndex k, int power, double freq, double phase, double decay) {
        return Atom{k, power, freq, phase, decay};
    };
    auto prod = [](double coeff, std::vector<Atom> atoms) {
        return CylinderFunction::analytic({AnalyticTerm{coeff, std::move(atoms)}});
    };
    constexpr double p2 = std::numbers::pi / 2;
    std::vector<BatteryItem> v;
    v.push_back({"u_(1,0)", poly(x(a)), a});
    v.push_back({"u_(1,0)^2", poly(x(a, 2)), a});
    v.push_back({"u_(0,1) u_(1,1)", poly(x(b) * x(c)), b});
    v.push_back({"u_(1,0) u_(0,1) u_(1,1)", poly(x(a) * x(b) * x(c)), c});
    v.push_back({"u_(1,1)^3", poly(x(c, 3)), c});
    v.push_back({"u_(1,0)^2 u_(-1,1)", poly(x(a, 2) * x(d)), a});
    v.push_back({"u_(1,0) u_(-1,1)", poly(x(a) * x(d)), d});
    v.push_back({"exp(-u_(1,0)^2)", prod(1.0, {atom(a, 0, 0.0, p2, 1.0)}), a});
    v.push_back({"sin(u_(0,1))", prod(1.0, {atom(b, 0, 1.0, 0.0, 0.0)}), b});
    v.push_back({"cos(2 u_(1,1)) exp(-u_(1,1)^2/2)", prod(1.0, {atom(c, 0, 2.0, p2, 0.5)}), c});
    v.push_back({"sin(u_(1,0)) exp(-u_(0,1)^2)", prod(1.0, {atom(a, 0, 1.0, 0.0, 0.0), atom(b, 0, 0.0, p2, 1.0)}), b});
    v.push_back({"u_(2,0) exp(-u_(2,0)^2)", prod(1.0, {atom(e, 1, 0.0, p2, 1.0)}), e});
    v.push_back({"u_(1,1)^2 exp(-u_(-1,1)^2)", prod(1.0, {atom(c, 2, 0.0, p2, 0.0), atom(d, 0, 0.0, p2, 1.0)}), d});
    v.push_back({"sin(u_(1,0)) cos(u_(0,1)) sin(u_(1,1))",
                 prod(1.0, {atom(a, 0, 1.0, 0.0, 0.0), atom(b, 0, 1.0, p2, 0.0), atom(c, 0, 1.0, 0.0, 0.0)}), c});
    v.push_back({"u_(0,-1) u_(-1,0)", poly(x(f) * x(g)), f});
    v.push_back({"u_(1,-1) cos(u_(1,0))", prod(1.0, {atom(h, 1, 0.0, p2, 0.0), atom(a, 0, 1.0, p2, 0.0)}), h});
    v.push_back({"u_(0,2)^2 exp(-2 u_(0,2)^2)", prod(1.0, {atom(i, 2, 0.0, p2, 2.0)}), i});
    v.push_back({"u_(1,0) u_(0,1) + u_(1,1)^2/2 - u_(-1,1)", poly(x(a) * x(b) + 0.5 * x(c, 2) - x(d)), a});
    v.push_back({"exp(-u_(1,0)^2 - u_(0,1)^2)", prod(1.0, {atom(a, 0, 0.0, p2, 1.0), atom(b, 0, 0.0, p2, 1.0)}), a});
    v.push_back({"sin(u_(-1,1) + 0.3) u_(2,0)^2", prod(1.0, {atom(d, 0, 1.0, 0.3, 0.0), atom(e, 2, 0.0, p2, 0.0)}), e});
    return v;
}

/// Random polynomial of degree <= 3 in `vars` distinct coordinates of I_n
/// (all monomials present, coefficients uniform in [-1, 1]).
inline Polynomial random_cubic_polynomial(int n, int vars, const RngStream& stream) {
    detail::require(vars >= 1 && vars <= 3, "random_cubic_polynomial: 1 to 3 coordinates");
    const auto I = shared_index_set(n);
    detail::require(static_cast<std::size_t>(vars) <= I->size(), "random_cubic_polynomial: level too small");
    std::vector<WaveIndex> xs;
    std::uint32_t draw = 0;
    while (static_cast<int>(xs.size()) < vars) {
        const auto pick = static_cast<std::size_t>(stream.uniform(draw++) * static_cast<double>(I->size()));
        const WaveIndex k = (*I)[std::min(pick, I->size() - 1)];
        if (std::find(xs.begin(), xs.end(), k) == xs.end()) xs.push_back(k);
    }
    Polynomial p;
    std::array<int, 3> e{};
    for (e[0] = 0; e[0] <= 3; ++e[0])
        for (e[1] = 0; e[1] <= (vars > 1 ? 3 : 0); ++e[1])
            for (e[2] = 0; e[2] <= (vars > 2 ? 3 : 0); ++e[2]) {
                if (e[0] + e[1] + e[2] > 3) continue;
                Monomial m;
                for (int j = 0; j < vars; ++j)
                    if (e[static_cast<std::size_t>(j)] > 0) m.emplace_back(xs[static_cast<std::size_t>(j)], e[static_cast<std::size_t>(j)]);
                p += Polynomial::monomial(2.0 * stream.uniform(draw++) - 1.0, m);
            }
    return p;
}

}  // namespace galerkin
