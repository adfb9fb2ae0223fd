#pragma once

#include <cmath>
#include <algorithm>

namespace galerkin {

/// Neumaier's variant of Kahan summation. Accumulation order is the caller's.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    CompensatedSum& operator+=(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }
    CompensatedSum& operator-=(double x) { return *this += -x; }

    double value() const { return sum_ + comp_; }
    explicit operator double() const { return value(); }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Certified enclosure [lower, upper] of a real quantity.
struct Bracket {
    double lower = 0.0;
    double upper = 0.0;

    double value() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
    bool contains(double x) const { return lower <= x && x <= upper; }
    /// Relative width measured against the smaller end in magnitude.
    double relative_width() const {
        const double scale = std::min(std::abs(lower), std::abs(upper));
        return scale > 0.0 ? width() / scale : (width() == 0.0 ? 0.0 : INFINITY);
    }

    Bracket& operator+=(const Bracket& o) {
        lower += o.lower;
        upper += o.upper;
        return *this;
    }
    friend Bracket operator+(Bracket a, const Bracket& b) { return a += b; }
    friend Bracket operator*(double c, Bracket b) {
        if (c >= 0.0) return {c * b.lower, c * b.upper};
        return {c * b.upper, c * b.lower};
    }
};

}  // namespace galerkin
