#pragma once

// Truncated spectral fields over I_n, physical parameters, Sobolev norms.

#include <cmath>
#include <istream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/summation.hpp"

namespace galerkin {

/// Noise intensity sigma, viscosity nu and Coriolis gradient beta.
/// Validated once here; downstream operations assume valid values.
class FlowParams {
public:
    FlowParams(double sigma, double nu, double beta = 0.0) : sigma_(sigma), nu_(nu), beta_(beta) {
        detail::require(std::isfinite(sigma) && sigma > 0.0, "FlowParams: sigma must be > 0");
        detail::require(std::isfinite(nu) && nu > 0.0, "FlowParams: nu must be > 0");
        detail::require(std::isfinite(beta) && beta >= 0.0, "FlowParams: beta must be >= 0");
    }

    double sigma() const { return sigma_; }
    double nu() const { return nu_; }
    double beta() const { return beta_; }

    FlowParams with_beta(double b) const { return {sigma_, nu_, b}; }

private:
    double sigma_;
    double nu_;
    double beta_;
};

/// Real coefficients u_k, k in I_n, stored densely in canonical order.
class SpectralField {
public:
    explicit SpectralField(int n) : SpectralField(shared_index_set(n)) {}

    explicit SpectralField(std::shared_ptr<const IndexSet> indices)
        : indices_(std::move(indices)), coeffs_(indices_->size(), 0.0) {}

    SpectralField(std::shared_ptr<const IndexSet> indices, std::vector<double> coeffs)
        : indices_(std::move(indices)), coeffs_(std::move(coeffs)) {
        detail::require(coeffs_.size() == indices_->size(),
                        "SpectralField: expected " + std::to_string(indices_->size()) + " coefficients, got " +
                            std::to_string(coeffs_.size()));
        for (double c : coeffs_) detail::require(std::isfinite(c), "SpectralField: non-finite coefficient");
    }

    static SpectralField zeros(int n) { return SpectralField(n); }

    /// Field with u_k = value and all other coefficients zero.
    static SpectralField single_mode(int n, WaveIndex k, double value = 1.0) {
        SpectralField u(n);
        u.set(k, value);
        return u;
    }

    int level() const { return indices_->level(); }
    std::size_t size() const { return coeffs_.size(); }
    const IndexSet& indices() const { return *indices_; }
    const std::shared_ptr<const IndexSet>& shared_indices() const { return indices_; }

    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    /// u_k; zero for k outside I_n.
    double at(WaveIndex k) const {
        const int p = indices_->position(k);
        return p < 0 ? 0.0 : coeffs_[static_cast<std::size_t>(p)];
    }

    void set(WaveIndex k, double value) {
        const int p = indices_->position(k);
        detail::require(p >= 0, "SpectralField::set: " + to_string(k) + " not in I_" + std::to_string(level()));
        coeffs_[static_cast<std::size_t>(p)] = value;
    }

    bool all_finite() const {
        for (double c : coeffs_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    SpectralField& operator*=(double c) {
        for (double& x : coeffs_) x *= c;
        return *this;
    }
    friend SpectralField operator*(double c, SpectralField u) { return u *= c; }

    SpectralField& operator+=(const SpectralField& o) {
        detail::require(o.level() == level(), "SpectralField: level mismatch");
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }

private:
    std::shared_ptr<const IndexSet> indices_;
    std::vector<double> coeffs_;
};

/// (sum_k |k|^{2s} u_k^2)^{1/2}; s may be any real number.
inline double sobolev_norm(const SpectralField& u, double s) {
    CompensatedSum acc;
    const auto& I = u.indices();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = std::pow(static_cast<double>(I[i].norm2()), s);
        acc += w * u[i] * u[i];
    }
    return std::sqrt(acc.value());
}

/// ||u||_{s0}^{theta} ||u||_{s1}^{1-theta} - ||u||_s with theta = (s1-s)/(s1-s0);
/// nonnegative up to rounding by Hoelder.
inline double interpolation_gap(const SpectralField& u, double s0, double s, double s1) {
    detail::require(s0 < s && s < s1, "interpolation_gap: need s0 < s < s1");
    const double n0 = sobolev_norm(u, s0);
    detail::require(n0 > 0.0, "interpolation_gap: zero field");
    const double theta = (s1 - s) / (s1 - s0);
    return std::pow(n0, theta) * std::pow(sobolev_norm(u, s1), 1.0 - theta) - sobolev_norm(u, s);
}

/// CSV with header "k1,k2,coeff", one row per index in canonical order.
inline void write_field_csv(std::ostream& os, const SpectralField& u) {
    os << "k1,k2,coeff\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    const auto& I = u.indices();
    for (std::size_t i = 0; i < u.size(); ++i) os << I[i].k1 << ',' << I[i].k2 << ',' << u[i] << '\n';
}

/// Inverse of write_field_csv. The level is inferred from the largest |k|,
/// and every row must match the canonical enumeration of that level.
inline SpectralField read_field_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("k1,k2,coeff", 0) != 0)
        throw InvalidArgument("read_field_csv: missing header k1,k2,coeff");
    std::vector<WaveIndex> ks;
    std::vector<double> cs;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        WaveIndex k;
        double c = 0.0;
        char comma1 = 0, comma2 = 0;
        if (!(row >> k.k1 >> comma1 >> k.k2 >> comma2 >> c) || comma1 != ',' || comma2 != ',')
            throw InvalidArgument("read_field_csv: malformed row '" + line + "'");
        ks.push_back(k);
        cs.push_back(c);
    }
    detail::require(!ks.empty(), "read_field_csv: no rows");
    std::int64_t max2 = 0;
    for (auto k : ks) max2 = std::max(max2, k.norm2());
    int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(max2))));
    while (std::int64_t{n} * n < max2) ++n;
    auto I = shared_index_set(n);
    detail::require(I->size() == ks.size(), "read_field_csv: row count does not match I_" + std::to_string(n));
    for (std::size_t i = 0; i < ks.size(); ++i)
        detail::require((*I)[i] == ks[i], "read_field_csv: row " + std::to_string(i) + " out of canonical order");
    return SpectralField(std::move(I), std::move(cs));
}

}  // namespace galerkin
