#pragma once

// Verification batteries and the command runner behind the CLI.
//
// Commands: lattice, conserve, rates, ibp, kolmogorov, simulate, assumption.
// Exit codes: 0 all contracts pass, 1 a contract fails, 2 usage error,
// 3 numerical blow-up.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "galerkin/dynamics.hpp"
#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/kolmogorov.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/measure.hpp"
#include "galerkin/rng.hpp"
#include "galerkin/truncation.hpp"
#include "galerkin/triads.hpp"
#include "galerkin/version.hpp"

namespace galerkin {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitBlowUp = 3 };

/// Malformed configuration: unknown key, wrong type, out-of-range value.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct TestRecord {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    Json extra = Json::object();
};

inline Json to_json(const TestRecord& t) {
    Json j{{"name", t.name}, {"statistic", t.statistic}, {"threshold", t.threshold}, {"pass", t.pass}};
    for (auto& [k, v] : t.extra.items()) j[k] = v;
    return j;
}

inline bool all_pass(const std::vector<TestRecord>& tests) {
    return std::all_of(tests.begin(), tests.end(), [](const TestRecord& t) { return t.pass; });
}

// ---------------------------------------------------------------------------
// batteries

/// Random field with independent N(0, 1) coefficients.
inline SpectralField random_field(int n, const RngStream& stream) {
    SpectralField u(n);
    stream.fill_normals(u.coeffs(), 0, Purpose::test);
    return u;
}

/// Max relative conservation residual over `fields` random fields per (n, i).
inline std::vector<TestRecord> conservation_battery(const std::vector<int>& ns, const std::vector<int>& is,
                                                    std::size_t fields, const FlowParams& params, std::uint64_t seed,
                                                    double tol) {
    std::vector<TestRecord> out;
    for (int n : ns) {
        const auto table = shared_triad_table(n);
        for (int i : is) {
            detail::require(i == 0 || i == 1, "conservation_residual: i must be 0 or 1, got " + std::to_string(i));
            double worst = 0.0;
            for (std::size_t f = 0; f < fields; ++f) {
                const auto u = random_field(n, RngStream(derive_seed(seed, static_cast<std::uint64_t>(n)), static_cast<std::uint32_t>(f)));
                const auto chk = conservation_check(u, table->eval_B(u), table->eval_C(u, params), i);
                worst = std::max(worst, chk.relative());
            }
            out.push_back({"conservation n=" + std::to_string(n) + " i=" + std::to_string(i), worst, tol, worst <= tol,
                           Json{{"n", n}, {"i", i}, {"fields", fields}, {"beta", params.beta()}}});
        }
    }
    return out;
}

/// Seed used for re-running a marginal Monte Carlo item.
inline std::uint64_t rerun_seed(std::uint64_t seed) { return derive_seed(seed, 0x5EEDull, 1); }

/// Monte Carlo item with the re-run policy: an item whose |mean| exceeds
/// 3 standard errors is re-run once with a fresh seed and judged on the
/// re-run alone.
template <class Estimate>
TestRecord mc_item(const std::string& name, std::uint64_t seed, Estimate&& estimate) {
    MCEstimate e = estimate(seed);
    Json extra{{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}, {"seed", seed}};
    if (!e.within(3.0)) {
        const auto s2 = rerun_seed(seed);
        const MCEstimate r = estimate(s2);
        extra["rerun"] = Json{{"mean", r.mean}, {"std_error", r.std_error}, {"seed", s2}, {"first_z", e.z()}};
        e = r;
    }
    return {name, e.z(), 3.0, e.within(3.0), extra};
}

inline std::vector<TestRecord> ibp_battery(int n, const FlowParams& params, std::size_t samples, std::uint64_t seed) {
    std::vector<TestRecord> out;
    const auto battery = standard_battery();
    for (std::size_t b = 0; b < battery.size(); ++b) {
        const auto& item = battery[b];
        auto rec = mc_item("ibp " + item.name, derive_seed(seed, b, static_cast<std::uint64_t>(n)), [&](std::uint64_t s) {
            return ibp_residual(item.phi, item.ibp_index, n, params, samples, s);
        });
        if (item.phi.is_polynomial())
            rec.extra["exact"] = ibp_residual_exact(item.phi.as_polynomial(), item.ibp_index, params);
        out.push_back(std::move(rec));
    }
    // the two closed-form cases
    const WaveIndex k{1, 0};
    for (int p : {1, 2}) {
        const double r = ibp_residual_exact(Polynomial::variable(k, p), k, params);
        out.push_back({"ibp exact u_(1,0)" + std::string(p == 2 ? "^2" : ""), std::abs(r), 0.0, r == 0.0, Json{{"exact", r}}});
    }
    return out;
}

inline std::vector<TestRecord> invariance_battery(int n, const FlowParams& params, std::size_t samples,
                                                  std::uint64_t seed) {
    std::vector<TestRecord> out;
    const auto battery = standard_battery();
    const std::string tag = " n=" + std::to_string(n) + " nu=" + Json(params.nu()).dump() +
                            " beta=" + Json(params.beta()).dump();
    for (std::size_t b = 0; b < battery.size(); ++b) {
        const auto& item = battery[b];
        auto rec = mc_item("invariance " + item.name + tag,
                           derive_seed(seed, b, static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(params.beta() * 10)),
                           [&](std::uint64_t s) { return invariance_mc(item.phi, n, params, samples, s); });
        if (item.phi.is_polynomial()) rec.extra["exact"] = invariance_exact(item.phi.as_polynomial(), n, params);
        out.push_back(std::move(rec));
    }
    const double ex = invariance_exact(Polynomial::variable({1, 0}, 2), n, params);
    out.push_back({"invariance exact u_(1,0)^2" + tag, std::abs(ex), 0.0, ex == 0.0, Json{{"exact", ex}}});
    return out;
}

struct CommutatorSummary {
    double max_relative = 0.0;     ///< over all draws
    double max_fd_relative = 0.0;  ///< finite-difference cross-check of d_k (K^n phi)
    std::size_t draws = 0;
};

/// Random polynomials (degree <= 3, 1 to 3 coordinates), random k in I_n and
/// u ~ mu^n. The left side is cross-checked against a five-point difference
/// of apply_K, exact up to rounding for these polynomials of degree <= 4.
inline CommutatorSummary commutator_battery(int n, const FlowParams& params, std::size_t draws, std::uint64_t seed) {
    CommutatorSummary s;
    s.draws = draws;
    const auto I = shared_index_set(n);
    const MeasureSampler sampler(n, params);
    for (std::size_t d = 0; d < draws; ++d) {
        const RngStream stream(derive_seed(seed, d));
        const auto p = random_cubic_polynomial(n, 1 + static_cast<int>(d % 3), stream);
        const auto phi = CylinderFunction::polynomial(p);
        WaveIndex k = phi.support().front();
        if (d % 2 == 1) {
            const auto pick = static_cast<std::size_t>(stream.uniform(1000) * static_cast<double>(I->size()));
            k = (*I)[std::min(pick, I->size() - 1)];
        }
        const auto u = sampler.sample(stream);
        const auto chk = commutator_check(phi, k, u, params);
        s.max_relative = std::max(s.max_relative, chk.relative());

        const double lhs = kolmogorov_polynomial(p, n, params).derivative(k).evaluate(u);
        const double h = 1e-3 * (1.0 + std::abs(u.at(k)));
        auto K_at = [&](double shift) {
            SpectralField v = u;
            v.set(k, u.at(k) + shift);
            return apply_K(phi, v, params);
        };
        const double kp2 = K_at(2 * h), kp1 = K_at(h), km1 = K_at(-h), km2 = K_at(-2 * h);
        const double fd = (-kp2 + 8 * kp1 - 8 * km1 + km2) / (12 * h);
        // rounding in the stencil scales with the magnitude of its terms
        const double stencil = (std::abs(kp2) + 8 * std::abs(kp1) + 8 * std::abs(km1) + std::abs(km2)) / (12 * h);
        const double scale = chk.scale + stencil;
        if (scale > 0.0) s.max_fd_relative = std::max(s.max_fd_relative, std::abs(fd - lhs) / scale);
    }
    return s;
}

struct RatePoint {
    int n;
    double s;
    Bracket value;
};

struct RateStudy {
    DriftKind kind;
    double s;
    std::vector<RatePoint> points;
    double slope = 0.0;  ///< least-squares slope of log(value) against log(n)
};

inline double loglog_slope(const std::vector<RatePoint>& pts) {
    const double m = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        const double x = std::log(static_cast<double>(p.n)), y = std::log(p.value.value());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline RateStudy rate_study(DriftKind kind, const std::vector<int>& ns, double s, const FlowParams& params,
                            double rel_tol) {
    RateStudy r{kind, s, {}, 0.0};
    for (int n : ns) r.points.push_back({n, s, truncation_norm(kind, n, s, params, rel_tol)});
    const bool positive = std::all_of(r.points.begin(), r.points.end(), [](const RatePoint& p) { return p.value.value() > 0.0; });
    if (r.points.size() >= 2 && positive) r.slope = loglog_slope(r.points);
    return r;
}

/// C: fitted slope <= max_slope.
inline std::vector<TestRecord> rate_tests_C(const RateStudy& r, double max_slope) {
    const std::string name = "rate C slope s=" + Json(r.s).dump();
    const bool zero = std::all_of(r.points.begin(), r.points.end(), [](const RatePoint& p) { return p.value.upper == 0.0; });
    if (zero) return {{name, 0.0, max_slope, true, Json{{"identically_zero", true}}}};  // beta = 0
    return {{name, r.slope, max_slope, r.slope <= max_slope}};
}

/// B: values below c log(n) n^{-2 eps} with c fixed by the upper bracket at
/// the first n, and strictly decreasing brackets.
inline std::vector<TestRecord> rate_tests_B(const RateStudy& r, double eps) {
    std::vector<TestRecord> out;
    const auto& p0 = r.points.front();
    const double shape0 = std::log(static_cast<double>(p0.n)) * std::pow(p0.n, -2.0 * eps);
    const double c = p0.value.upper / shape0;
    double worst = 0.0;
    Json per = Json::array();
    for (const auto& p : r.points) {
        const double bound = c * std::log(static_cast<double>(p.n)) * std::pow(p.n, -2.0 * eps);
        worst = std::max(worst, p.value.upper / bound);
        per.push_back(Json{{"n", p.n}, {"upper", p.value.upper}, {"bound", bound}});
    }
    out.push_back({"rate B bound c log(n) n^(-2 eps) s=" + Json(r.s).dump(), worst, 1.0, worst <= 1.0,
                   Json{{"c", c}, {"eps", eps}, {"points", per}}});
    bool decreasing = true;
    double ratio = 0.0;
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        decreasing = decreasing && r.points[i].value.upper < r.points[i - 1].value.lower;
        ratio = std::max(ratio, r.points[i].value.upper / r.points[i - 1].value.lower);
    }
    out.push_back({"rate B decreasing s=" + Json(r.s).dump(), ratio, 1.0, decreasing, Json{{"slope", r.slope}}});
    return out;
}

inline std::vector<TestRecord> assumption_tests(const FlowParams& params, const AssumptionReport& rep) {
    const double rel = rep.s2_bracket.width() / rep.s2_bracket.lower;
    return {{"S(2) bracket relative width", rel, kAssumptionS2Tolerance, rel <= kAssumptionS2Tolerance,
             Json{{"lower", rep.s2_bracket.lower}, {"upper", rep.s2_bracket.upper}}},
            {"nu^3 > 40 S(2) sigma^2 / pi^2", rep.margin, 0.0, rep.holds,
             Json{{"sigma", params.sigma()}, {"nu", params.nu()}, {"threshold_upper", rep.threshold.upper},
                  {"nu_min_lower", rep.nu_min.lower}, {"nu_min_upper", rep.nu_min.upper}}}};
}

// ---------------------------------------------------------------------------
// configuration

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"lattice", "conserve", "rates", "ibp", "kolmogorov", "simulate", "assumption"};
    return c;
}

/// Default configuration of a command; every accepted key appears here.
inline Json default_config(const std::string& command) {
    Json base{{"sigma", 1.0}, {"nu", 3.0}, {"beta", 1.0}, {"seed", 1}, {"output", "."}};
    Json extra;
    if (command == "lattice")
        extra = {{"ns", {1, 2, 4, 8, 16, 32}}, {"s_values", {1.5, 2.0, 3.0}}, {"rel_tol", 1e-6}};
    else if (command == "conserve")
        extra = {{"ns", {2, 4, 8, 16}}, {"i", {0, 1}}, {"fields", 1000}, {"tol", 1e-11}};
    else if (command == "rates")
        extra = {{"kind", "both"}, {"ns", {4, 8, 16, 32}}, {"s_B", 1.5}, {"s_C", 1.0}, {"eps", 0.4},
                 {"rel_tol", 1e-3}, {"max_slope_C", -0.85}};
    else if (command == "ibp")
        extra = {{"n", 4}, {"samples", 100000}};
    else if (command == "kolmogorov")
        extra = {{"ns", {2, 4}}, {"samples", 100000}, {"commutator_n", 4}, {"commutator_draws", 1000},
                 {"commutator_tol", 1e-10}, {"fd_tol", 1e-6}};
    else if (command == "simulate")
        extra = {{"n", 4}, {"dt", 1e-3}, {"T", 1.0}, {"trajectories", 10000}, {"disable_B", false}, {"disable_C", false}};
    else if (command == "assumption")
        extra = Json::object();
    else
        throw ConfigError("unknown command '" + command + "'");
    for (auto& [k, v] : extra.items()) base[k] = v;
    return base;
}

/// Defaults overlaid with `overrides`; unknown keys and type mismatches are errors.
inline Json resolve_config(const std::string& command, const Json& overrides) {
    Json cfg = default_config(command);
    if (overrides.is_null()) return cfg;
    if (!overrides.is_object()) throw ConfigError("configuration must be a JSON object");
    for (auto& [k, v] : overrides.items()) {
        if (!cfg.contains(k)) throw ConfigError("unknown configuration key '" + k + "' for command " + command);
        const auto& d = cfg[k];
        const bool ok = (d.is_number() && v.is_number()) || (d.is_boolean() && v.is_boolean()) ||
                        (d.is_string() && v.is_string()) || (d.is_array() && v.is_array());
        if (!ok) throw ConfigError("configuration key '" + k + "' has the wrong type");
        cfg[k] = v;
    }
    return cfg;
}

namespace detail {

inline double get_real(const Json& c, const std::string& k) { return c.at(k).get<double>(); }

inline int get_int(const Json& c, const std::string& k, int lo, int hi) {
    const auto& v = c.at(k);
    if (!v.is_number_integer()) throw ConfigError("'" + k + "' must be an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi)
        throw ConfigError("'" + k + "' = " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    return static_cast<int>(x);
}

inline std::size_t get_count(const Json& c, const std::string& k, std::size_t lo) {
    const auto& v = c.at(k);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(lo))
        throw ConfigError("'" + k + "' must be an integer >= " + std::to_string(lo));
    return v.get<std::size_t>();
}

inline std::uint64_t get_seed(const Json& c) {
    const auto& v = c.at("seed");
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("'seed' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::vector<int> get_levels(const Json& c, const std::string& k, int lo = 1, int hi = 256) {
    std::vector<int> out;
    for (const auto& v : c.at(k)) {
        if (!v.is_number_integer()) throw ConfigError("'" + k + "' entries must be integers");
        const auto x = v.get<long long>();
        if (x < lo || x > hi) throw ConfigError("'" + k + "' entry " + std::to_string(x) + " out of range");
        out.push_back(static_cast<int>(x));
    }
    if (out.empty()) throw ConfigError("'" + k + "' must not be empty");
    return out;
}

inline double get_positive(const Json& c, const std::string& k) {
    const double x = get_real(c, k);
    if (!(std::isfinite(x) && x > 0.0)) throw ConfigError("'" + k + "' must be > 0");
    return x;
}

inline FlowParams get_params(const Json& c) {
    try {
        return FlowParams(get_real(c, "sigma"), get_real(c, "nu"), get_real(c, "beta"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

inline std::string csv_preamble(const std::string& command, const Json& cfg) {
    return "# " + std::string(kVersionString) + " " + command + "\n# config " + cfg.dump() + "\n";
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace detail

/// Everything a command produced.
struct CommandResult {
    std::vector<TestRecord> tests;
    std::string csv;  ///< empty when the command has no numeric table
    Json summary = Json::object();
};

/// Validates the whole configuration before any computation starts.
inline void validate_config(const std::string& command, const Json& cfg) {
    using namespace detail;
    get_params(cfg);
    get_seed(cfg);
    if (!cfg.at("output").is_string()) throw ConfigError("'output' must be a string");
    if (command == "lattice") {
        get_levels(cfg, "ns", 1, 4096);
        for (const auto& s : cfg.at("s_values"))
            if (!s.is_number() || !(s.get<double>() > 1.0)) throw ConfigError("'s_values' entries must exceed 1");
        get_positive(cfg, "rel_tol");
    } else if (command == "conserve") {
        get_levels(cfg, "ns", 1, 64);
        for (const auto& i : cfg.at("i"))
            if (!i.is_number_integer() || (i.get<int>() != 0 && i.get<int>() != 1))
                throw ConfigError("'i' entries must be 0 or 1 (got " + i.dump() + ")");
        get_count(cfg, "fields", 1);
        get_positive(cfg, "tol");
    } else if (command == "rates") {
        const auto kind = cfg.at("kind").get<std::string>();
        if (kind != "B" && kind != "C" && kind != "both") throw ConfigError("'kind' must be B, C or both");
        if (get_levels(cfg, "ns", 1, 128).size() < 2) throw ConfigError("'ns' needs at least two levels");
        if (!(get_real(cfg, "s_B") > 1.0)) throw ConfigError("'s_B' must exceed 1");
        if (!(get_real(cfg, "s_C") > 0.0)) throw ConfigError("'s_C' must exceed 0");
        get_positive(cfg, "eps");
        get_positive(cfg, "rel_tol");
    } else if (command == "ibp") {
        get_int(cfg, "n", 2, 64);
        get_count(cfg, "samples", 2);
    } else if (command == "kolmogorov") {
        get_levels(cfg, "ns", 2, 64);
        get_count(cfg, "samples", 2);
        get_int(cfg, "commutator_n", 1, 64);
        get_count(cfg, "commutator_draws", 1);
        get_positive(cfg, "commutator_tol");
        get_positive(cfg, "fd_tol");
    } else if (command == "simulate") {
        SimConfig sc;
        sc.n = get_int(cfg, "n", 1, 64);
        sc.dt = get_positive(cfg, "dt");
        sc.T = get_positive(cfg, "T");
        sc.trajectories = get_count(cfg, "trajectories", 2);
        try {
            sc.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
}

/// Runs a command on a resolved, validated configuration.
inline CommandResult execute(const std::string& command, const Json& cfg) {
    using namespace detail;
    const FlowParams params = get_params(cfg);
    const std::uint64_t seed = get_seed(cfg);
    CommandResult res;

    if (command == "lattice") {
        std::ostringstream csv;
        csv << "kind,n,s,value,lower,upper\n";
        for (int n : get_levels(cfg, "ns", 1, 4096)) {
            const auto count = enumerate_indices(n).size();
            csv << "index_count," << n << ",," << count << ',' << count << ',' << count << '\n';
        }
        const double tol = get_real(cfg, "rel_tol");
        for (const auto& sv : cfg.at("s_values")) {
            const double s = sv.get<double>();
            const auto S = lattice_sum_S(s, tol);
            csv << "S," << S.cutoff << ',' << fmt(s) << ',' << fmt(S.value()) << ',' << fmt(S.bracket.lower) << ','
                << fmt(S.bracket.upper) << '\n';
            const double rel = S.bracket.width() / S.bracket.lower;
            res.tests.push_back({"S(" + fmt(s) + ") bracket relative width", rel, tol, rel <= tol,
                                 Json{{"lower", S.bracket.lower}, {"upper", S.bracket.upper}, {"cutoff", S.cutoff}}});
        }
        res.csv = csv.str();
    } else if (command == "conserve") {
        std::vector<int> is;
        for (const auto& i : cfg.at("i")) is.push_back(i.get<int>());
        res.tests = conservation_battery(get_levels(cfg, "ns", 1, 64), is, get_count(cfg, "fields", 1), params, seed,
                                         get_real(cfg, "tol"));
        std::ostringstream csv;
        csv << "n,i,fields,max_relative_residual\n";
        for (const auto& t : res.tests)
            csv << t.extra["n"].get<int>() << ',' << t.extra["i"].get<int>() << ',' << t.extra["fields"].get<std::size_t>()
                << ',' << fmt(t.statistic) << '\n';
        res.csv = csv.str();
    } else if (command == "rates") {
        const auto kind = cfg.at("kind").get<std::string>();
        const auto ns = get_levels(cfg, "ns", 1, 128);
        const double tol = get_real(cfg, "rel_tol");
        std::ostringstream csv;
        csv << "kind,n,s,value,lower,upper\n";
        auto emit = [&](const RateStudy& r) {
            for (const auto& p : r.points)
                csv << to_string(r.kind) << ',' << p.n << ',' << fmt(p.s) << ',' << fmt(p.value.value()) << ','
                    << fmt(p.value.lower) << ',' << fmt(p.value.upper) << '\n';
            res.summary["slope_" + to_string(r.kind)] = r.slope;
        };
        if (kind != "C") {
            const auto r = rate_study(DriftKind::B, ns, get_real(cfg, "s_B"), params, tol);
            emit(r);
            for (auto& t : rate_tests_B(r, get_real(cfg, "eps"))) res.tests.push_back(t);
        }
        if (kind != "B") {
            const auto r = rate_study(DriftKind::C, ns, get_real(cfg, "s_C"), params, tol);
            emit(r);
            for (auto& t : rate_tests_C(r, get_real(cfg, "max_slope_C"))) res.tests.push_back(t);
        }
        res.csv = csv.str();
    } else if (command == "ibp") {
        res.tests = ibp_battery(get_int(cfg, "n", 2, 64), params, get_count(cfg, "samples", 2), seed);
    } else if (command == "kolmogorov") {
        for (int n : get_levels(cfg, "ns", 2, 64))
            for (auto& t : invariance_battery(n, params, get_count(cfg, "samples", 2), seed)) res.tests.push_back(t);
        const auto cs = commutator_battery(get_int(cfg, "commutator_n", 1, 64), params,
                                           get_count(cfg, "commutator_draws", 1), seed);
        const double tol = get_real(cfg, "commutator_tol"), fd_tol = get_real(cfg, "fd_tol");
        res.tests.push_back({"commutator relative residual", cs.max_relative, tol, cs.max_relative <= tol,
                             Json{{"draws", cs.draws}}});
        res.tests.push_back({"commutator finite-difference cross-check", cs.max_fd_relative, fd_tol,
                             cs.max_fd_relative <= fd_tol, Json{{"draws", cs.draws}}});
    } else if (command == "simulate") {
        SimConfig sc;
        sc.n = get_int(cfg, "n", 1, 64);
        sc.dt = get_real(cfg, "dt");
        sc.T = get_real(cfg, "T");
        sc.seed = seed;
        sc.trajectories = get_count(cfg, "trajectories", 2);
        sc.options.convection = !cfg.at("disable_B").get<bool>();
        sc.options.coriolis = !cfg.at("disable_C").get<bool>();
        const auto rep = invariance_experiment(sc, params);
        std::ostringstream csv;
        csv << "k1,k2,emp_mean,emp_var,target_var,zscore\n";
        for (const auto& m : rep.modes)
            csv << m.k.k1 << ',' << m.k.k2 << ',' << fmt(m.emp_mean) << ',' << fmt(m.emp_var) << ','
                << fmt(m.target_var) << ',' << fmt(m.zscore) << '\n';
        res.csv = csv.str();
        res.tests.push_back({"variance 3-sigma violations", static_cast<double>(rep.violations),
                             std::ceil(rep.expected_violations), rep.pass(),
                             Json{{"modes", rep.modes.size()}, {"max_abs_z", rep.max_abs_z},
                                  {"expected_violations", rep.expected_violations}}});
        res.summary = Json{{"steps", rep.steps}, {"trajectories", rep.trajectories}, {"max_abs_z", rep.max_abs_z}};
    } else if (command == "assumption") {
        const auto rep = assumption_check(params);
        res.tests = assumption_tests(params, rep);
        res.summary = Json{{"s2_lower", rep.s2_bracket.lower}, {"s2_upper", rep.s2_bracket.upper},
                           {"margin", rep.margin}, {"holds", rep.holds}};
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return res;
}

inline Json report_json(const std::string& command, const Json& cfg, const CommandResult& res) {
    Json tests = Json::array();
    for (const auto& t : res.tests) tests.push_back(to_json(t));
    return Json{{"version", kVersionString}, {"command", command}, {"config", cfg},
                {"pass", all_pass(res.tests)}, {"summary", res.summary}, {"tests", tests}};
}

/// Resolves and validates the configuration, runs the command and writes
/// <output>/<command>.json (and .csv when there is a table). Returns the
/// exit code; diagnostics go to `log`.
inline int run(const std::string& command, const Json& overrides, std::ostream& log = std::cerr) {
    Json cfg;
    try {
        cfg = resolve_config(command, overrides);
        validate_config(command, cfg);
    } catch (const std::exception& e) {
        log << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    CommandResult res;
    try {
        res = execute(command, cfg);
    } catch (const BlowUp& e) {
        log << "blow-up: " << e.what() << '\n';
        return kExitBlowUp;
    } catch (const InvalidArgument& e) {
        log << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DivergentSeries& e) {
        log << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    const std::filesystem::path dir = cfg.at("output").get<std::string>();
    std::filesystem::create_directories(dir);
    {
        std::ofstream js(dir / (command + ".json"));
        js << report_json(command, cfg, res).dump(2) << '\n';
        if (!js) {
            log << "error: cannot write " << (dir / (command + ".json")).string() << '\n';
            return kExitUsage;
        }
    }
    if (!res.csv.empty()) {
        std::ofstream cs(dir / (command + ".csv"));
        cs << detail::csv_preamble(command, cfg) << res.csv;
    }
    for (const auto& t : res.tests)
        log << (t.pass ? "PASS " : "FAIL ") << t.name << "  statistic=" << detail::fmt(t.statistic)
            << " threshold=" << detail::fmt(t.threshold) << '\n';
    return all_pass(res.tests) ? kExitPass : kExitFail;
}

}  // namespace galerkin
