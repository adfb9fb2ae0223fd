#pragma once

// Cylinder test functions phi(u) = f(u_{k_1}, ..., u_{k_m}).
//
// Three representations:
//  - polynomial: symbolic, derivatives of every order;
//  - analytic: sums of products of univariate atoms
//        x^p sin(w x + theta) exp(-c x^2),
//    derivatives up to order 3 in closed form;
//  - custom: user callables, derivatives only as far as supplied.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"
#include "galerkin/polynomial.hpp"

namespace galerkin {

/// x^power * sin(freq x + phase) * exp(-decay x^2); a pure power uses
/// freq = 0, phase = pi/2.
struct Atom {
    WaveIndex k;
    int power = 0;
    double freq = 0.0;
    double phase = std::numbers::pi / 2;
    double decay = 0.0;

    /// Derivatives of orders 0..3 at x.
    std::array<double, 4> jet(double x) const {
        using J = std::array<double, 4>;
        J pw{};
        {
            double fall = 1.0;  // p (p-1) ... (p-j+1)
            for (int j = 0; j < 4 && j <= power; ++j) {
                pw[static_cast<std::size_t>(j)] = fall * std::pow(x, power - j);
                fall *= power - j;
            }
        }
        J tr{};
        {
            const double a = freq * x + phase;
            double wj = 1.0;
            for (int j = 0; j < 4; ++j) {
                tr[static_cast<std::size_t>(j)] = wj * std::sin(a + j * std::numbers::pi / 2);
                wj *= freq;
            }
        }
        J ga{};
        {
            const double g = std::exp(-decay * x * x);
            const double c = decay;
            ga = {g, -2.0 * c * x * g, (4.0 * c * c * x * x - 2.0 * c) * g,
                  (-8.0 * c * c * c * x * x * x + 12.0 * c * c * x) * g};
        }
        return leibniz(leibniz(pw, tr), ga);
    }

private:
    static std::array<double, 4> leibniz(const std::array<double, 4>& f, const std::array<double, 4>& g) {
        static constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
        std::array<double, 4> h{};
        for (int n = 0; n < 4; ++n)
            for (int j = 0; j <= n; ++j)
                h[static_cast<std::size_t>(n)] +=
                    binom[n][j] * f[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(n - j)];
        return h;
    }
};

/// coeff * product of atoms on distinct coordinates.
struct AnalyticTerm {
    double coeff = 1.0;
    std::vector<Atom> atoms;
};

class CylinderFunction {
public:
    using Values = std::span<const double>;
    using ValueFn = std::function<double(Values)>;
    using GradFn = std::function<std::vector<double>(Values)>;
    using HessFn = std::function<std::vector<double>(Values)>;  // row-major m x m

    static CylinderFunction polynomial(Polynomial p) {
        CylinderFunction f;
        f.support_ = p.variables();
        for (auto& [m, c] : p.terms()) {
            AnalyticTerm t{c, {}};
            for (auto& [k, pw] : m) t.atoms.push_back(Atom{k, pw});
            f.terms_.push_back(std::move(t));
        }
        f.poly_ = std::move(p);
        return f;
    }

    static CylinderFunction coordinate(WaveIndex k) { return polynomial(Polynomial::variable(k)); }

    static CylinderFunction analytic(std::vector<AnalyticTerm> terms) {
        CylinderFunction f;
        std::set<WaveIndex> sup;
        for (auto& t : terms) {
            std::set<WaveIndex> seen;
            for (auto& a : t.atoms) {
                detail::require(!a.k.is_zero(), "CylinderFunction: zero wavenumber in atom");
                detail::require(a.power >= 0 && a.decay >= 0.0, "CylinderFunction: invalid atom parameters");
                detail::require(seen.insert(a.k).second, "CylinderFunction: repeated coordinate within a term");
                sup.insert(a.k);
            }
        }
        f.support_.assign(sup.begin(), sup.end());
        f.terms_ = std::move(terms);
        return f;
    }

    /// User-supplied function of the support coordinates (in the given
    /// order). Derivatives beyond those supplied are unavailable.
    static CylinderFunction custom(std::vector<WaveIndex> support, ValueFn value, GradFn grad = {}, HessFn hess = {}) {
        detail::require(static_cast<bool>(value), "CylinderFunction::custom: value function required");
        detail::require(!hess || grad, "CylinderFunction::custom: Hessian without gradient");
        std::set<WaveIndex> uniq(support.begin(), support.end());
        detail::require(uniq.size() == support.size(), "CylinderFunction::custom: repeated support index");
        for (auto k : support) detail::require(!k.is_zero(), "CylinderFunction::custom: zero wavenumber");
        CylinderFunction f;
        f.support_ = std::move(support);
        f.custom_ = Custom{std::move(value), std::move(grad), std::move(hess)};
        return f;
    }

    const std::vector<WaveIndex>& support() const { return support_; }
    bool is_polynomial() const { return poly_.has_value(); }
    const Polynomial& as_polynomial() const {
        detail::require(poly_.has_value(), "CylinderFunction: not a polynomial");
        return *poly_;
    }
    bool in_support(WaveIndex k) const { return std::find(support_.begin(), support_.end(), k) != support_.end(); }

    int max_derivative_order() const {
        if (!custom_) return 3;
        return custom_->hess ? 2 : custom_->grad ? 1 : 0;
    }

    void require_support_in(const IndexSet& I) const {
        for (auto k : support_)
            detail::require(I.contains(k), "cylinder function support index " + to_string(k) + " outside I_" +
                                               std::to_string(I.level()));
    }

    double value(const SpectralField& u) const { return derivative({}, u); }
    double partial(WaveIndex k, const SpectralField& u) const { return derivative(std::array{k}, u); }
    double partial2(WaveIndex k, WaveIndex l, const SpectralField& u) const { return derivative(std::array{k, l}, u); }
    double partial3(WaveIndex k, WaveIndex l, WaveIndex m, const SpectralField& u) const {
        return derivative(std::array{k, l, m}, u);
    }

    /// Mixed partial derivative along the listed coordinates (order <= 3).
    double derivative(std::span<const WaveIndex> vars, const SpectralField& u) const {
        detail::require(vars.size() <= 3, "CylinderFunction: derivative order above 3");
        if (static_cast<int>(vars.size()) > max_derivative_order())
            throw InvalidArgument("CylinderFunction: derivative of order " + std::to_string(vars.size()) +
                                  " not available for this function");
        for (auto k : vars)
            if (!in_support(k)) return 0.0;
        if (custom_) return custom_derivative(vars, u);
        double acc = 0.0;
        for (const auto& t : terms_) {
            double prod = t.coeff;
            std::size_t matched = 0;
            for (const auto& a : t.atoms) {
                const auto order = static_cast<std::size_t>(std::count(vars.begin(), vars.end(), a.k));
                matched += order;
                prod *= a.jet(u.at(a.k))[order];
                if (prod == 0.0) break;
            }
            if (matched == vars.size()) acc += prod;
        }
        return acc;
    }

    /// d phi / d u_k as a cylinder function (polynomials only).
    CylinderFunction derivative_function(WaveIndex k) const {
        detail::require(poly_.has_value(), "CylinderFunction: derivative_function only supports polynomials");
        return polynomial(poly_->derivative(k));
    }

private:
    struct Custom {
        ValueFn value;
        GradFn grad;
        HessFn hess;
    };

    std::size_t slot(WaveIndex k) const {
        return static_cast<std::size_t>(std::find(support_.begin(), support_.end(), k) - support_.begin());
    }

    double custom_derivative(std::span<const WaveIndex> vars, const SpectralField& u) const {
        std::vector<double> x(support_.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = u.at(support_[i]);
        if (vars.empty()) return custom_->value(x);
        if (vars.size() == 1) return custom_->grad(x).at(slot(vars[0]));
        return custom_->hess(x).at(slot(vars[0]) * support_.size() + slot(vars[1]));
    }

    std::vector<WaveIndex> support_;
    std::vector<AnalyticTerm> terms_;
    std::optional<Polynomial> poly_;
    std::optional<Custom> custom_;
};

}  // namespace galerkin
