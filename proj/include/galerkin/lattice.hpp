#pragma once

// Wavenumber lattice Z^2_*, the Galerkin index sets I_n and the lattice
// sums S(s) = sum_{k != 0} |k|^{-2s}.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/summation.hpp"

namespace galerkin {

/// Integer wavenumber (k1, k2). Valid modes are nonzero; intermediate
/// values such as k - l may be zero and are checked where they matter.
struct WaveIndex {
    int k1 = 0;
    int k2 = 0;

    constexpr bool is_zero() const { return k1 == 0 && k2 == 0; }
    /// |k|^2 in integer arithmetic.
    constexpr std::int64_t norm2() const {
        return std::int64_t{k1} * k1 + std::int64_t{k2} * k2;
    }
    double norm() const { return std::sqrt(static_cast<double>(norm2())); }

    constexpr WaveIndex operator-() const { return {-k1, -k2}; }
    friend constexpr WaveIndex operator+(WaveIndex a, WaveIndex b) { return {a.k1 + b.k1, a.k2 + b.k2}; }
    friend constexpr WaveIndex operator-(WaveIndex a, WaveIndex b) { return {a.k1 - b.k1, a.k2 - b.k2}; }
    friend constexpr bool operator==(WaveIndex, WaveIndex) = default;
    friend constexpr auto operator<=>(WaveIndex, WaveIndex) = default;
};

/// k . l
constexpr std::int64_t dot(WaveIndex a, WaveIndex b) {
    return std::int64_t{a.k1} * b.k1 + std::int64_t{a.k2} * b.k2;
}

/// k^perp . l with k^perp = (-k2, k1).
constexpr std::int64_t perp_dot(WaveIndex a, WaveIndex b) {
    return std::int64_t{a.k1} * b.k2 - std::int64_t{a.k2} * b.k1;
}

inline std::string to_string(WaveIndex k) {
    return "(" + std::to_string(k.k1) + "," + std::to_string(k.k2) + ")";
}

/// Membership in Z^2_+ = {k1 > 0} u {k1 = 0, k2 > 0}.
inline bool is_positive_half(WaveIndex k) {
    detail::require(!k.is_zero(), "is_positive_half: zero wavenumber");
    return k.k1 > 0 || (k.k1 == 0 && k.k2 > 0);
}

/// Canonical order: (|k|^2, k1, k2) ascending.
constexpr bool canonical_less(WaveIndex a, WaveIndex b) {
    if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
    if (a.k1 != b.k1) return a.k1 < b.k1;
    return a.k2 < b.k2;
}

/// I_n = {k in Z^2_*: |k| <= n} in canonical order, with O(1) lookup.
class IndexSet {
public:
    explicit IndexSet(int n) : level_(n) {
        detail::require(n >= 1, "enumerate_indices: level must be >= 1, got " + std::to_string(n));
        const std::int64_t n2 = std::int64_t{n} * n;
        for (int a = -n; a <= n; ++a)
            for (int b = -n; b <= n; ++b) {
                const WaveIndex k{a, b};
                if (!k.is_zero() && k.norm2() <= n2) members_.push_back(k);
            }
        std::sort(members_.begin(), members_.end(), canonical_less);
        const std::size_t side = 2 * static_cast<std::size_t>(n) + 1;
        lookup_.assign(side * side, -1);
        for (std::size_t i = 0; i < members_.size(); ++i)
            lookup_[slot(members_[i])] = static_cast<int>(i);
    }

    int level() const { return level_; }
    std::size_t size() const { return members_.size(); }
    const WaveIndex& operator[](std::size_t i) const { return members_[i]; }
    std::span<const WaveIndex> members() const { return members_; }
    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

    /// Canonical position of k, or -1 when k is zero or outside I_n.
    int position(WaveIndex k) const {
        if (std::abs(k.k1) > level_ || std::abs(k.k2) > level_) return -1;
        return lookup_[slot(k)];
    }
    bool contains(WaveIndex k) const { return position(k) >= 0; }

private:
    std::size_t slot(WaveIndex k) const {
        const std::size_t side = 2 * static_cast<std::size_t>(level_) + 1;
        return static_cast<std::size_t>(k.k1 + level_) * side + static_cast<std::size_t>(k.k2 + level_);
    }

    int level_;
    std::vector<WaveIndex> members_;
    std::vector<int> lookup_;
};

inline IndexSet enumerate_indices(int n) { return IndexSet(n); }

/// Process-wide cache of index sets; the sets themselves are immutable.
inline std::shared_ptr<const IndexSet> shared_index_set(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const IndexSet>> cache;
    detail::require(n >= 1, "index set level must be >= 1, got " + std::to_string(n));
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const IndexSet>(n);
    return slot;
}

/// Number of points of Z^2 (origin included) in the closed disc of radius r.
inline std::int64_t lattice_points_in_disc(int r) {
    std::int64_t count = 0;
    const std::int64_t r2 = std::int64_t{r} * r;
    for (int a = -r; a <= r; ++a) {
        const auto rem = r2 - std::int64_t{a} * a;
        const auto h = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(rem))));
        std::int64_t hh = h;
        while (hh * hh > rem) --hh;
        while ((hh + 1) * (hh + 1) <= rem) ++hh;
        count += 2 * hh + 1;
    }
    return count;
}

/// sum_{k in I_N} |k|^{-2s}, accumulated row by row with compensation.
inline double lattice_partial_sum(double s, int cutoff) {
    detail::require(cutoff >= 0, "lattice_partial_sum: negative cutoff");
    CompensatedSum acc;
    const std::int64_t r2 = std::int64_t{cutoff} * cutoff;
    for (int a = -cutoff; a <= cutoff; ++a)
        for (int b = -cutoff; b <= cutoff; ++b) {
            const std::int64_t q = std::int64_t{a} * a + std::int64_t{b} * b;
            if (q == 0 || q > r2) continue;
            acc += std::pow(static_cast<double>(q), -s);
        }
    return acc.value();
}

struct LatticeSum {
    Bracket bracket;   ///< certified enclosure of S(s)
    double partial;    ///< sum over I_cutoff
    int cutoff;
    double value() const { return bracket.value(); }
};

namespace detail {

/// Enclosure of sum_{|k| > N} |k|^{-2s} from Stieltjes integration against
/// the lattice counting function A(r), using pi (r -+ sqrt2/2)^2 <= A(r) <= pi (r + sqrt2/2)^2.
inline Bracket lattice_tail_bracket(double s, int cutoff, std::int64_t points_in_disc) {
    const double c = std::numbers::sqrt2 / 2.0;
    const double N = cutoff;
    const double quad = std::pow(N, 2.0 - 2.0 * s) / (2.0 * s - 2.0);
    const double lin = 2.0 * c * std::pow(N, 1.0 - 2.0 * s) / (2.0 * s - 1.0);
    const double cst = c * c * std::pow(N, -2.0 * s) / (2.0 * s);
    const double boundary = std::pow(N, -2.0 * s) * static_cast<double>(points_in_disc);
    const double pref = 2.0 * s * std::numbers::pi;
    const double lo = pref * (quad - lin + cst) - boundary;
    const double hi = pref * (quad + lin + cst) - boundary;
    return {std::max(0.0, lo), hi};
}

/// Relative bracket width achieved at a given cutoff, using S(s) >= 4 as the scale.
inline double lattice_relative_width(double s, double N) {
    const double c = std::numbers::sqrt2 / 2.0;
    return 2.0 * s * std::numbers::pi * 4.0 * c * std::pow(N, 1.0 - 2.0 * s) / (2.0 * s - 1.0) / 4.0;
}

}  // namespace detail

/// S(s) with a certified bracket of relative width <= rel_tol.
///
/// The cutoff radius is chosen from the a priori width of the annulus
/// bound; cutoffs beyond `max_cutoff` are refused rather than silently
/// returning a looser bracket.
inline LatticeSum lattice_sum_S(double s, double rel_tol, int max_cutoff = 8192) {
    if (!(s > 1.0)) throw DivergentSeries("lattice_sum_S: series diverges for s <= 1 (s = " + std::to_string(s) + ")");
    detail::require(rel_tol > 0.0, "lattice_sum_S: rel_tol must be positive");
    // width(N) ~ N^{1-2s}; solve width(N) <= rel_tol against the scale S >= 4.
    const double w1 = detail::lattice_relative_width(s, 1.0);
    double target = std::pow(w1 / rel_tol, 1.0 / (2.0 * s - 1.0));
    target = std::max(2.0, std::ceil(target));
    if (target > max_cutoff)
        throw InvalidArgument("lattice_sum_S: rel_tol " + std::to_string(rel_tol) + " at s = " + std::to_string(s) +
                              " needs cutoff " + std::to_string(target) + " > " + std::to_string(max_cutoff));
    const int N = static_cast<int>(target);
    const double partial = lattice_partial_sum(s, N);
    const Bracket tail = detail::lattice_tail_bracket(s, N, lattice_points_in_disc(N));
    return {{partial + tail.lower, partial + tail.upper}, partial, N};
}

}  // namespace galerkin
