// Energy and enstrophy balance of the truncated drift on random fields.
//
//   conservation_demo [n] [beta]

#include <cstdio>
#include <cstdlib>

#include "galerkin/galerkin.hpp"

using namespace galerkin;

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 8;
    const double beta = argc > 2 ? std::atof(argv[2]) : 1.0;
    const FlowParams params(1.0, 3.0, beta);
    const TriadTable table(n);
    std::printf("n=%d  |I_n|=%zu  nonzero triads=%zu  beta=%g\n", n, table.indices().size(), table.nonzeros(), beta);
    std::printf("%6s %14s %14s %14s %14s\n", "field", "energy", "rel", "enstrophy", "rel");
    for (std::uint32_t f = 0; f < 8; ++f) {
        SpectralField u(n);
        RngStream(2024, f).fill_normals(u.coeffs(), 0, Purpose::test);
        const auto B = table.eval_B(u), C = table.eval_C(u, params);
        const auto e = conservation_check(u, B, C, 0), z = conservation_check(u, B, C, 1);
        std::printf("%6u %14.3e %14.3e %14.3e %14.3e\n", f, e.residual, e.relative(), z.residual, z.relative());
    }
}
