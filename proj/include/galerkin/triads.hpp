#pragma once

// Convection triad coefficients beta^k_{l,m}, Coriolis coefficients
// gamma^k_l, and the truncated drifts B^n, C^n.
//
// Basis: e_k = (1/(sqrt2 pi)) (k^perp/|k|) phi_k with phi_k = sin(k.xi) on
// Z^2_+ and cos(k.xi) on -Z^2_+, k^perp = (-k2, k1).

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"

namespace galerkin {

enum class DriftKind { B, C };

inline std::string to_string(DriftKind kind) { return kind == DriftKind::B ? "B" : "C"; }

/// sqrt(2) / (4 pi)
inline constexpr double kTriadPrefactor = std::numbers::sqrt2 / (4.0 * std::numbers::pi);

/// (1/pi^2) int_{T^2} phi_{-k} phi_l phi_m, which is -1, 0 or 1.
///
/// At most one Kronecker delta fires for nonzero k, l, m. Signs follow the
/// product-to-sum expansion of the three trigonometric factors.
inline int delta_triple(WaveIndex k, WaveIndex l, WaveIndex m) {
    detail::require(!k.is_zero() && !l.is_zero() && !m.is_zero(), "delta_triple: zero wavenumber");
    const bool pk = is_positive_half(k), pl = is_positive_half(l), pm = is_positive_half(m);
    auto d = [](WaveIndex v) { return v.is_zero() ? 1 : 0; };
    const int klm = d(k - l - m);  // k = l + m
    const int klpm = d(k - l + m);  // m = l - k
    const int kplm = d(k + l - m);  // m = k + l
    const int kplpm = d(k + l + m);  // m = -k - l
    if (pk && pl && pm) return -klm + klpm + kplm;
    if (pk && !pl && !pm) return kplm + klpm + kplpm;
    if (!pk && !pl && pm) return klpm + kplpm - klm;
    if (!pk && pl && !pm) return kplm + kplpm - klm;
    return 0;
}

/// beta^k_{l,m} = <B(e_l, e_m), e_k>.
inline double b_coeff(WaveIndex k, WaveIndex l, WaveIndex m) {
    const int delta = delta_triple(k, l, m);
    if (delta == 0) return 0.0;
    const double num = static_cast<double>(perp_dot(k, l)) * static_cast<double>(dot(k, m));
    if (num == 0.0) return 0.0;
    const double den = std::sqrt(static_cast<double>(k.norm2()) * static_cast<double>(l.norm2()) *
                                 static_cast<double>(m.norm2()));
    return kTriadPrefactor * num / den * delta;
}

/// gamma^k_l = (k^perp.l)/(|k||l|) / (k2 + l2) on k1 + l1 = 0, k2 + l2 != 0.
inline double gamma_coeff(WaveIndex k, WaveIndex l) {
    detail::require(!k.is_zero() && !l.is_zero(), "gamma_coeff: zero wavenumber");
    if (k.k1 + l.k1 != 0 || k.k2 + l.k2 == 0) return 0.0;
    const double cross = static_cast<double>(perp_dot(k, l));
    return cross / std::sqrt(static_cast<double>(k.norm2()) * static_cast<double>(l.norm2())) /
           static_cast<double>(k.k2 + l.k2);
}

/// The only m for which beta^k_{l,m} can be nonzero: k - l, l - k, k + l, -k - l.
inline std::array<WaveIndex, 4> triad_partners(WaveIndex k, WaveIndex l) {
    return {k - l, l - k, k + l, -k - l};
}

/// B^n_k(u) for a single k in I_n, O(|I_n|).
inline double eval_B_component(const SpectralField& u, WaveIndex k) {
    const auto& I = u.indices();
    detail::require(I.contains(k), "eval_B_component: " + to_string(k) + " not in I_n");
    double acc = 0.0;
    for (std::size_t li = 0; li < I.size(); ++li) {
        const double ul = u[li];
        if (ul == 0.0) continue;
        const WaveIndex l = I[li];
        for (const WaveIndex m : triad_partners(k, l)) {
            const int mi = I.position(m);
            if (mi < 0) continue;
            const double um = u[static_cast<std::size_t>(mi)];
            if (um == 0.0) continue;
            acc += b_coeff(k, l, m) * ul * um;
        }
    }
    return acc;
}

/// B^n(u) exploiting the delta structure: O(|I_n|^2).
inline SpectralField eval_B(const SpectralField& u) {
    SpectralField out(u.shared_indices());
    const auto& I = u.indices();
    for (std::size_t ki = 0; ki < I.size(); ++ki) out[ki] = eval_B_component(u, I[ki]);
    return out;
}

/// C^n_k(u) = -beta sum_l gamma^k_l u_l; only l = (-k1, j) contribute.
inline double eval_C_component(const SpectralField& u, WaveIndex k, double beta) {
    if (beta == 0.0) return 0.0;
    const auto& I = u.indices();
    const int n = I.level();
    double acc = 0.0;
    for (int j = -n; j <= n; ++j) {
        const WaveIndex l{-k.k1, j};
        const int li = I.position(l);
        if (li < 0) continue;
        acc += gamma_coeff(k, l) * u[static_cast<std::size_t>(li)];
    }
    return -beta * acc;
}

inline SpectralField eval_C(const SpectralField& u, const FlowParams& params) {
    SpectralField out(u.shared_indices());
    const auto& I = u.indices();
    for (std::size_t ki = 0; ki < I.size(); ++ki) out[ki] = eval_C_component(u, I[ki], params.beta());
    return out;
}

/// Sparse cache of the triad and Coriolis coefficients at one level, for
/// inner loops that evaluate B^n and C^n many times.
///
/// Symmetric pairs are merged: each stored entry carries
/// beta^k_{l,m} + beta^k_{m,l} for l < m (diagonal coefficients vanish).
class TriadTable {
public:
    struct Entry {
        int l;
        int m;
        double coeff;
    };
    struct CoriolisEntry {
        int l;
        double gamma;
    };

    explicit TriadTable(int n) : indices_(shared_index_set(n)) {
        const auto& I = *indices_;
        rows_.resize(I.size());
        coriolis_.resize(I.size());
        for (std::size_t ki = 0; ki < I.size(); ++ki) {
            const WaveIndex k = I[ki];
            auto& row = rows_[ki];
            for (std::size_t li = 0; li < I.size(); ++li) {
                const WaveIndex l = I[li];
                for (const WaveIndex m : triad_partners(k, l)) {
                    const int mi = I.position(m);
                    if (mi <= static_cast<int>(li)) continue;
                    const double c = b_coeff(k, l, m) + b_coeff(k, m, l);
                    if (c != 0.0) row.push_back({static_cast<int>(li), mi, c});
                }
            }
            for (int j = -n; j <= n; ++j) {
                const int li = I.position({-k.k1, j});
                if (li < 0) continue;
                const double g = gamma_coeff(k, I[static_cast<std::size_t>(li)]);
                if (g != 0.0) coriolis_[ki].push_back({li, g});
            }
        }
    }

    int level() const { return indices_->level(); }
    const IndexSet& indices() const { return *indices_; }
    const std::shared_ptr<const IndexSet>& shared_indices() const { return indices_; }
    const std::vector<Entry>& row(std::size_t k) const { return rows_[k]; }
    const std::vector<CoriolisEntry>& coriolis_row(std::size_t k) const { return coriolis_[k]; }

    std::size_t nonzeros() const {
        std::size_t nz = 0;
        for (const auto& r : rows_) nz += r.size();
        return nz;
    }

    double B(std::span<const double> u, std::size_t k) const {
        double acc = 0.0;
        for (const auto& e : rows_[k]) acc += e.coeff * u[static_cast<std::size_t>(e.l)] * u[static_cast<std::size_t>(e.m)];
        return acc;
    }

    double C(std::span<const double> u, std::size_t k, double beta) const {
        if (beta == 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& e : coriolis_[k]) acc += e.gamma * u[static_cast<std::size_t>(e.l)];
        return -beta * acc;
    }

    SpectralField eval_B(const SpectralField& u) const {
        check(u);
        SpectralField out(indices_);
        for (std::size_t k = 0; k < u.size(); ++k) out[k] = B(u.coeffs(), k);
        return out;
    }

    SpectralField eval_C(const SpectralField& u, const FlowParams& params) const {
        check(u);
        SpectralField out(indices_);
        for (std::size_t k = 0; k < u.size(); ++k) out[k] = C(u.coeffs(), k, params.beta());
        return out;
    }

private:
    void check(const SpectralField& u) const {
        detail::require(u.level() == level(), "TriadTable: field level " + std::to_string(u.level()) +
                                                  " does not match table level " + std::to_string(level()));
    }

    std::shared_ptr<const IndexSet> indices_;
    std::vector<std::vector<Entry>> rows_;
    std::vector<std::vector<CoriolisEntry>> coriolis_;
};

struct ConservationCheck {
    double residual;  ///< sum_k |k|^{2i} (B_k + C_k) u_k
    double scale;     ///< sum_k |k|^{2i} (|B_k| + |C_k|) |u_k|
    double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// Energy (i = 0) or enstrophy (i = 1) balance of the drift B^n + C^n.
inline ConservationCheck conservation_check(const SpectralField& u, const SpectralField& b, const SpectralField& c,
                                            int i) {
    detail::require(i == 0 || i == 1, "conservation_residual: i must be 0 or 1, got " + std::to_string(i));
    const auto& I = u.indices();
    CompensatedSum res, scale;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double w = i == 0 ? 1.0 : static_cast<double>(I[k].norm2());
        res += w * (b[k] + c[k]) * u[k];
        scale += w * (std::abs(b[k]) + std::abs(c[k])) * std::abs(u[k]);
    }
    return {res.value(), scale.value()};
}

inline ConservationCheck conservation_check(const SpectralField& u, const FlowParams& params, int i) {
    detail::require(i == 0 || i == 1, "conservation_residual: i must be 0 or 1, got " + std::to_string(i));
    return conservation_check(u, eval_B(u), eval_C(u, params), i);
}

inline double conservation_residual(const SpectralField& u, const FlowParams& params, int i) {
    return conservation_check(u, params, i).residual;
}

}  // namespace galerkin
