#pragma once

// The enstrophy measure mu = prod_k N(0, sigma^2 / (2 nu |k|^2)): sampling,
// exact moments, and the integration-by-parts check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "galerkin/cylinder.hpp"
#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/parallel.hpp"
#include "galerkin/polynomial.hpp"
#include "galerkin/rng.hpp"
#include "galerkin/summation.hpp"

namespace galerkin {

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;

    /// |mean| / std_error (0 when both vanish).
    double z() const {
        if (std_error > 0.0) return std::abs(mean) / std_error;
        return mean == 0.0 ? 0.0 : INFINITY;
    }
    bool within(double nsigma) const { return std::abs(mean) <= nsigma * std_error; }

    static MCEstimate from(const RunningStats& s) { return {s.mean, s.std_error(), s.count}; }
};

/// sigma^2 / (2 nu |k|^2)
inline double marginal_variance(WaveIndex k, const FlowParams& params) {
    detail::require(!k.is_zero(), "marginal_variance: zero wavenumber");
    return params.sigma() * params.sigma() / (2.0 * params.nu() * static_cast<double>(k.norm2()));
}

/// Draws fields at one level; coordinate j of the canonical enumeration
/// uses normal j of the stream, so levels are nested prefixes of each other.
class MeasureSampler {
public:
    MeasureSampler(int n, const FlowParams& params) : indices_(shared_index_set(n)), stddev_(indices_->size()) {
        for (std::size_t i = 0; i < stddev_.size(); ++i)
            stddev_[i] = std::sqrt(marginal_variance((*indices_)[i], params));
    }

    void sample_into(SpectralField& u, const RngStream& stream) const {
        detail::require(u.level() == indices_->level(), "MeasureSampler: level mismatch");
        auto c = u.coeffs();
        stream.fill_normals(c, 0, Purpose::initial);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= stddev_[i];
    }

    SpectralField sample(const RngStream& stream) const {
        SpectralField u(indices_);
        sample_into(u, stream);
        return u;
    }

    const std::shared_ptr<const IndexSet>& shared_indices() const { return indices_; }

private:
    std::shared_ptr<const IndexSet> indices_;
    std::vector<double> stddev_;
};

inline SpectralField sample_measure(int n, const FlowParams& params, const RngStream& stream) {
    return MeasureSampler(n, params).sample(stream);
}

/// E ||u||_{-s}^2 over I_n = sum_k |k|^{-2s} sigma^2 / (2 nu |k|^2).
inline double sobolev_moment(int n, double s, const FlowParams& params) {
    const auto I = shared_index_set(n);
    CompensatedSum acc;
    for (auto k : *I) acc += std::pow(static_cast<double>(k.norm2()), -s) * marginal_variance(k, params);
    return acc.value();
}

/// Exact E[P(u)] under mu.
inline double gaussian_expectation(const Polynomial& p, const FlowParams& params) {
    return p.gaussian_expectation([&](WaveIndex k) { return marginal_variance(k, params); });
}

/// Per-sample integrand of the integration-by-parts identity:
/// d_k phi(u) - (2 nu |k|^2 / sigma^2) u_k phi(u).
inline double ibp_integrand(const CylinderFunction& phi, WaveIndex k, const SpectralField& u,
                            const FlowParams& params) {
    return phi.partial(k, u) - u.at(k) * phi.value(u) / marginal_variance(k, params);
}

/// Monte Carlo estimate of int d_k phi dmu - (2 nu |k|^2 / sigma^2) int u_k phi dmu.
inline MCEstimate ibp_residual(const CylinderFunction& phi, WaveIndex k, int n, const FlowParams& params,
                               std::size_t samples, std::uint64_t seed = 1) {
    detail::require(samples >= 2, "ibp_residual: need at least two samples");
    if (phi.max_derivative_order() < 1) throw InvalidArgument("ibp_residual: test function lacks first derivatives");
    const auto I = shared_index_set(n);
    detail::require(I->contains(k) || phi.in_support(k), "ibp_residual: " + to_string(k) + " outside I_n and support");
    phi.require_support_in(*I);
    const MeasureSampler sampler(n, params);
    const RngStream root(seed);
    const auto stats = parallel_stats(samples, [&](std::size_t i) {
        thread_local SpectralField u(1);
        if (u.level() != n) u = SpectralField(sampler.shared_indices());
        sampler.sample_into(u, root.substream(static_cast<std::uint32_t>(i)));
        return ibp_integrand(phi, k, u, params);
    });
    return MCEstimate::from(stats);
}

/// The same residual computed from exact Gaussian moments (polynomial phi).
inline double ibp_residual_exact(const Polynomial& phi, WaveIndex k, const FlowParams& params) {
    auto var = [&](WaveIndex j) { return marginal_variance(j, params); };
    return phi.derivative(k).gaussian_expectation(var) - phi.gaussian_expectation_times_coordinate_over_variance(k, var);
}

}  // namespace galerkin
