// Exact mean-square Galerkin truncation errors of the convection and
// Coriolis terms in negative Sobolev norms.

#include <cmath>
#include <cstdio>

#include "galerkin/galerkin.hpp"

using namespace galerkin;

int main() {
    const FlowParams params(1.0, 3.0, 1.0);
    std::printf("%4s %14s %14s %14s\n", "n", "B (s=1.5)", "C (s=1)", "n log n^-0.8");
    for (int n : {4, 8, 16}) {
        const auto b = truncation_norm(DriftKind::B, n, 1.5, params, 1e-3);
        const auto c = truncation_norm(DriftKind::C, n, 1.0, params, 1e-8);
        std::printf("%4d %14.6e %14.6e %14.6e\n", n, b.value(), c.value(), std::log(n) * std::pow(n, -0.8));
    }
    const auto k = WaveIndex{1, 0};
    std::printf("\nper mode k=%s:\n", to_string(k).c_str());
    for (int n : {2, 4, 8, 16, 32})
        std::printf("  n=%-3d E|B_k - B_k^n|^2 = %.6e   E|C_k - C_k^n|^2 = %.6e\n", n,
                    truncation_error_B_exact(k, n, params, 1e-6).value(),
                    truncation_error_C_exact(k, n, params, 1e-8).value());
}
