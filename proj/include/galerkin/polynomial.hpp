#pragma once

// Sparse real polynomials in the coordinates u_k, with symbolic
// differentiation and exact Gaussian moments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "galerkin/errors.hpp"
#include "galerkin/field.hpp"
#include "galerkin/lattice.hpp"

namespace galerkin {

/// Product of powers u_k^p, sorted by k, all powers >= 1.
using Monomial = std::vector<std::pair<WaveIndex, int>>;

/// (p - 1)!! for even p, 0 for odd p: E[x^p] / v^{p/2} for x ~ N(0, v).
inline double gaussian_moment_factor(int p) {
    if (p % 2 != 0) return 0.0;
    double f = 1.0;
    for (int j = p - 1; j > 1; j -= 2) f *= j;
    return f;
}

/// E[x^p] for x ~ N(0, v).
inline double gaussian_moment(int p, double v) {
    if (p % 2 != 0) return 0.0;
    return gaussian_moment_factor(p) * std::pow(v, p / 2);
}

class Polynomial {
public:
    Polynomial() = default;

    static Polynomial constant(double c) {
        Polynomial p;
        if (c != 0.0) p.terms_[{}] = c;
        return p;
    }

    static Polynomial variable(WaveIndex k, int power = 1) {
        detail::require(!k.is_zero(), "Polynomial::variable: zero wavenumber");
        detail::require(power >= 0, "Polynomial::variable: negative power");
        Polynomial p;
        if (power == 0)
            p.terms_[{}] = 1.0;
        else
            p.terms_[{{k, power}}] = 1.0;
        return p;
    }

    static Polynomial monomial(double c, Monomial m) {
        std::sort(m.begin(), m.end(), [](auto& a, auto& b) { return a.first < b.first; });
        Monomial merged;
        for (auto& [k, p] : m) {
            detail::require(!k.is_zero(), "Polynomial::monomial: zero wavenumber");
            detail::require(p >= 0, "Polynomial::monomial: negative power");
            if (p == 0) continue;
            if (!merged.empty() && merged.back().first == k)
                merged.back().second += p;
            else
                merged.emplace_back(k, p);
        }
        Polynomial out;
        if (c != 0.0) out.terms_[merged] = c;
        return out;
    }

    const std::map<Monomial, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (auto& [m, c] : terms_) {
            int t = 0;
            for (auto& [k, p] : m) t += p;
            d = std::max(d, t);
        }
        return d;
    }

    std::vector<WaveIndex> variables() const {
        std::set<WaveIndex> vars;
        for (auto& [m, c] : terms_)
            for (auto& [k, p] : m) vars.insert(k);
        return {vars.begin(), vars.end()};
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Polynomial& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial out;
        for (auto& [ma, ca] : a.terms_)
            for (auto& [mb, cb] : b.terms_) out.add_term(multiply(ma, mb), ca * cb);
        return out;
    }

    Polynomial derivative(WaveIndex k) const {
        Polynomial out;
        for (auto& [m, c] : terms_) {
            auto it = std::find_if(m.begin(), m.end(), [&](auto& e) { return e.first == k; });
            if (it == m.end()) continue;
            Monomial dm = m;
            auto& e = dm[static_cast<std::size_t>(it - m.begin())];
            const int p = e.second;
            if (--e.second == 0) dm.erase(dm.begin() + (it - m.begin()));
            out.add_term(dm, c * p);
        }
        return out;
    }

    double evaluate(const std::function<double(WaveIndex)>& coord) const {
        double acc = 0.0;
        for (auto& [m, c] : terms_) {
            double t = c;
            for (auto& [k, p] : m) t *= ipow(coord(k), p);
            acc += t;
        }
        return acc;
    }

    double evaluate(const SpectralField& u) const {
        return evaluate([&](WaveIndex k) { return u.at(k); });
    }

    /// Exact expectation under independent centred Gaussians with variances var(k).
    double gaussian_expectation(const std::function<double(WaveIndex)>& var) const {
        double acc = 0.0;
        for (auto& [m, c] : terms_) {
            double t = c;
            for (auto& [k, p] : m) {
                t *= gaussian_moment(p, var(k));
                if (t == 0.0) break;
            }
            acc += t;
        }
        return acc;
    }

    /// E[x_k * P] / var(k), with the power of x_k lowered before the
    /// variance is applied (E[x^{p+1}]/v = p!! v^{(p-1)/2}).
    double gaussian_expectation_times_coordinate_over_variance(WaveIndex k,
                                                               const std::function<double(WaveIndex)>& var) const {
        double acc = 0.0;
        for (auto& [m, c] : terms_) {
            int pk = 0;
            for (auto& [j, p] : m)
                if (j == k) pk = p;
            if (pk % 2 == 0) continue;  // odd total power of x_k
            double t = c * gaussian_moment_factor(pk + 1) * std::pow(var(k), (pk - 1) / 2);
            for (auto& [j, p] : m) {
                if (j == k) continue;
                t *= gaussian_moment(p, var(j));
                if (t == 0.0) break;
            }
            acc += t;
        }
        return acc;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string s;
        for (auto& [m, c] : terms_) {
            if (!s.empty()) s += " + ";
            s += std::to_string(c);
            for (auto& [k, p] : m) s += "*u" + galerkin::to_string(k) + (p > 1 ? "^" + std::to_string(p) : "");
        }
        return s;
    }

private:
    static double ipow(double x, int p) {
        double r = 1.0;
        for (int i = 0; i < p; ++i) r *= x;
        return r;
    }

    static Monomial multiply(const Monomial& a, const Monomial& b) {
        Monomial out;
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
                out.push_back(a[i++]);
            else if (i == a.size() || b[j].first < a[i].first)
                out.push_back(b[j++]);
            else {
                out.emplace_back(a[i].first, a[i].second + b[j].second);
                ++i;
                ++j;
            }
        }
        return out;
    }

    void add_term(const Monomial& m, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    std::map<Monomial, double> terms_;
};

}  // namespace galerkin
