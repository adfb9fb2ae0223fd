#pragma once

// Time stepping of the Galerkin system
//   du_k = (-nu |k|^2 u_k - B_k^n(u) - C_k^n(u)) dt + sigma dW_k
// with the exact Ornstein-Uhlenbeck transition for the linear and noise
// part and explicit Euler for B^n + C^n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/measure.hpp"
#include "galerkin/parallel.hpp"
#include "galerkin/rng.hpp"
#include "galerkin/triads.hpp"

namespace galerkin {

/// Process-wide cache of triad tables.
inline std::shared_ptr<const TriadTable> shared_triad_table(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const TriadTable>> cache;
    detail::require(n >= 1, "triad table level must be >= 1");
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const TriadTable>(n);
    return slot;
}

struct DynamicsOptions {
    bool convection = true;  ///< include B^n
    bool coriolis = true;    ///< include C^n
    bool noise = true;       ///< include the stochastic forcing
};

inline constexpr double kBlowUpThreshold = 1e6;

/// Precomputed per-mode factors for a fixed (n, dt, params).
class Stepper {
public:
    Stepper(int n, double dt, const FlowParams& params, DynamicsOptions opts = {})
        : table_(shared_triad_table(n)), params_(params), opts_(opts), dt_(dt) {
        detail::require(std::isfinite(dt) && dt > 0.0, "step: dt must be > 0");
        const auto& I = table_->indices();
        decay_.resize(I.size());
        noise_sd_.resize(I.size());
        for (std::size_t i = 0; i < I.size(); ++i) {
            const double lam = params.nu() * static_cast<double>(I[i].norm2());
            decay_[i] = std::exp(-lam * dt);
            noise_sd_[i] = opts.noise ? std::sqrt(params.sigma() * params.sigma() * -std::expm1(-2.0 * lam * dt) /
                                                  (2.0 * lam))
                                      : 0.0;
        }
        drift_.resize(I.size());
        xi_.resize(I.size());
    }

    int level() const { return table_->level(); }
    double dt() const { return dt_; }

    /// Advances u in place by one step. `step_index` selects the noise
    /// increments of the stream; `trajectory` only labels diagnostics.
    void advance(std::span<double> u, const RngStream& stream, std::uint32_t step_index,
                 std::int64_t trajectory = -1) {
        const std::size_t N = u.size();
        for (std::size_t k = 0; k < N; ++k) {
            double d = 0.0;
            if (opts_.convection) d += table_->B(u, k);
            if (opts_.coriolis) d += table_->C(u, k, params_.beta());
            drift_[k] = d;
        }
        if (opts_.noise) stream.fill_normals(xi_, step_index, Purpose::noise);
        for (std::size_t k = 0; k < N; ++k) {
            double v = decay_[k] * (u[k] - dt_ * drift_[k]);
            if (opts_.noise) v += noise_sd_[k] * xi_[k];
            if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) {
                const auto& I = table_->indices();
                throw BlowUp("step: |u" + to_string(I[k]) + "| = " + std::to_string(v) + " exceeds threshold at step " +
                                 std::to_string(step_index) +
                                 (trajectory >= 0 ? " of trajectory " + std::to_string(trajectory) : std::string()),
                             trajectory, step_index, to_string(I[k]));
            }
            u[k] = v;
        }
    }

private:
    std::shared_ptr<const TriadTable> table_;
    FlowParams params_;
    DynamicsOptions opts_;
    double dt_;
    std::vector<double> decay_, noise_sd_, drift_, xi_;
};

/// One exponential-Euler step.
inline SpectralField step(const SpectralField& u, double dt, const FlowParams& params, const RngStream& stream,
                          std::uint32_t step_index = 0, DynamicsOptions opts = {}) {
    Stepper s(u.level(), dt, params, opts);
    SpectralField out = u;
    s.advance(out.coeffs(), stream, step_index);
    return out;
}

/// dt with dt (L_B + beta) = 0.1, where L_B = max_k sum |coeff| (sd_l + sd_m)
/// estimates the Lipschitz size of B^n at typical amplitudes under mu.
inline double default_dt(int n, const FlowParams& params) {
    const auto table = shared_triad_table(n);
    const auto& I = table->indices();
    std::vector<double> sd(I.size());
    for (std::size_t i = 0; i < I.size(); ++i) sd[i] = std::sqrt(marginal_variance(I[i], params));
    double lip = 0.0;
    for (std::size_t k = 0; k < I.size(); ++k) {
        double row = 0.0;
        for (const auto& e : table->row(k))
            row += std::abs(e.coeff) * (sd[static_cast<std::size_t>(e.l)] + sd[static_cast<std::size_t>(e.m)]);
        lip = std::max(lip, row);
    }
    return 0.1 / (lip + params.beta() + 1e-300);
}

struct SimConfig {
    int n = 4;
    double dt = 1e-3;
    double T = 1.0;
    std::uint64_t seed = 1;
    std::size_t trajectories = 10000;
    DynamicsOptions options{};

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

    void validate() const {
        detail::require(n >= 1, "SimConfig: n must be >= 1");
        detail::require(std::isfinite(dt) && dt > 0.0, "SimConfig: dt must be > 0");
        detail::require(std::isfinite(T) && T > 0.0, "SimConfig: T must be > 0");
        detail::require(dt <= T, "SimConfig: dt must not exceed T");
        detail::require(std::abs(static_cast<double>(steps()) * dt - T) <= 1e-9 * T,
                        "SimConfig: T must be an integer multiple of dt");
        detail::require(trajectories >= 2, "SimConfig: need at least two trajectories");
        detail::require(steps() <= 0xFFFFFFFFull, "SimConfig: too many steps");
    }
};

struct ModeStatistics {
    WaveIndex k;
    double emp_mean;
    double emp_var;
    double target_var;
    double zscore;  ///< (emp_var - target_var) / standard error of emp_var
    double mean_z;  ///< emp_mean / standard error of emp_mean
};

struct InvarianceReport {
    std::vector<ModeStatistics> modes;
    std::size_t trajectories = 0;
    std::size_t steps = 0;
    std::size_t violations = 0;          ///< modes with |zscore| > 3
    double expected_violations = 0.0;    ///< modes * P(|Z| > 3)
    double max_abs_z = 0.0;

    /// At most the expected number of 3-sigma violations, rounded up.
    bool pass() const { return static_cast<double>(violations) <= std::ceil(expected_violations); }
    bool all_within_3() const { return violations == 0; }
};

inline constexpr double kTwoSidedThreeSigma = 0.0026997960632601866;

/// Starts trajectories from mu^n, evolves them to time T and compares the
/// per-mode variances at T with sigma^2 / (2 nu |k|^2).
inline InvarianceReport invariance_experiment(const SimConfig& cfg, const FlowParams& params) {
    cfg.validate();
    const auto I = shared_index_set(cfg.n);
    const std::size_t N = I->size();
    const std::size_t steps = cfg.steps();
    const MeasureSampler sampler(cfg.n, params);
    const RngStream root(cfg.seed);

    // per chunk: running mean/M2 of u_k and of u_k^2 (for the variance SE)
    struct Partial {
        std::vector<RunningStats> x, x2;
    };
    constexpr std::size_t chunk = 64;
    const std::size_t chunks = (cfg.trajectories + chunk - 1) / chunk;
    std::vector<Partial> partial(chunks);
    parallel_chunks(cfg.trajectories, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        Stepper stepper(cfg.n, cfg.dt, params, cfg.options);
        SpectralField u(sampler.shared_indices());
        Partial p{std::vector<RunningStats>(N), std::vector<RunningStats>(N)};
        for (std::size_t t = b; t < e; ++t) {
            const RngStream stream = root.substream(static_cast<std::uint32_t>(t));
            sampler.sample_into(u, stream);
            try {
                for (std::size_t s = 0; s < steps; ++s)
                    stepper.advance(u.coeffs(), stream, static_cast<std::uint32_t>(s), static_cast<std::int64_t>(t));
            } catch (const BlowUp& e) {
                throw BlowUp(std::string(e.what()) + " (seed " + std::to_string(cfg.seed) + ", substream " +
                                 std::to_string(t) + ")",
                             e.trajectory(), e.step(), e.mode());
            }
            for (std::size_t k = 0; k < N; ++k) {
                p.x[k].add(u[k]);
                p.x2[k].add(u[k] * u[k]);
            }
        }
        partial[c] = std::move(p);
    });

    InvarianceReport rep;
    rep.trajectories = cfg.trajectories;
    rep.steps = steps;
    rep.expected_violations = kTwoSidedThreeSigma * static_cast<double>(N);
    for (std::size_t k = 0; k < N; ++k) {
        RunningStats x, x2;
        for (const auto& p : partial) {
            x.merge(p.x[k]);
            x2.merge(p.x2[k]);
        }
        const double M = static_cast<double>(x.count);
        const double var = x.variance();
        // sample variance = (M / (M-1)) (mean(x^2) - mean(x)^2); its standard
        // error is dominated by that of mean(x^2)
        const double se_var = x2.std_error() * M / (M - 1.0);
        const double target = marginal_variance((*I)[k], params);
        ModeStatistics ms{(*I)[k], x.mean, var, target, se_var > 0.0 ? (var - target) / se_var : 0.0,
                          x.std_error() > 0.0 ? x.mean / x.std_error() : 0.0};
        if (std::abs(ms.zscore) > 3.0) ++rep.violations;
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(ms.zscore));
        rep.modes.push_back(ms);
    }
    return rep;
}

/// Relative drift of energy (i = 0) and enstrophy (i = 1) along a noiseless
/// trajectory: max over steps of |E(t) - E(0)| / E(0).
struct InvariantDrift {
    double energy = 0.0;
    double enstrophy = 0.0;
};

inline InvariantDrift deterministic_drift(const SpectralField& u0, double dt, double T, const FlowParams& params,
                                          DynamicsOptions opts = {}) {
    opts.noise = false;
    Stepper stepper(u0.level(), dt, params, opts);
    SpectralField u = u0;
    const RngStream unused(0);
    const auto& I = u.indices();
    auto invariants = [&](const SpectralField& f) {
        CompensatedSum e, z;
        for (std::size_t k = 0; k < f.size(); ++k) {
            e += f[k] * f[k];
            z += static_cast<double>(I[k].norm2()) * f[k] * f[k];
        }
        return std::pair{e.value(), z.value()};
    };
    const auto [e0, z0] = invariants(u);
    detail::require(e0 > 0.0, "deterministic_drift: zero initial field");
    InvariantDrift d;
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t s = 0; s < steps; ++s) {
        stepper.advance(u.coeffs(), unused, static_cast<std::uint32_t>(s));
        const auto [e, z] = invariants(u);
        d.energy = std::max(d.energy, std::abs(e - e0) / e0);
        d.enstrophy = std::max(d.enstrophy, std::abs(z - z0) / z0);
    }
    return d;
}

}  // namespace galerkin
