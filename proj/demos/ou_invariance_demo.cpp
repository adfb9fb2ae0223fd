// Time-T variances of the stochastic Galerkin system started from the
// Gaussian measure, with and without the nonlinear terms.
//
//   ou_invariance_demo [trajectories]

#include <cstdio>
#include <cstdlib>

#include "galerkin/galerkin.hpp"

using namespace galerkin;

namespace {

void report(const char* label, const InvarianceReport& rep) {
    std::printf("%s: %zu of %zu modes beyond 3 std errors, max |z| = %.2f\n", label, rep.violations, rep.modes.size(),
                rep.max_abs_z);
    for (std::size_t i = 0; i < rep.modes.size() && i < 8; ++i) {
        const auto& m = rep.modes[i];
        std::printf("  %-8s var %.5f  target %.5f  z %+.2f\n", to_string(m.k).c_str(), m.emp_var, m.target_var,
                    m.zscore);
    }
}

}  // namespace

int main(int argc, char** argv) {
    SimConfig cfg;
    cfg.n = 4;
    cfg.dt = 1e-2;
    cfg.T = 1.0;
    cfg.trajectories = argc > 1 ? static_cast<std::size_t>(std::atol(argv[1])) : 4000;
    const FlowParams params(1.0, 3.0, 1.0);

    cfg.options = {false, false, true};
    report("OU only", invariance_experiment(cfg, params));
    cfg.options = {true, true, true};
    report("full drift", invariance_experiment(cfg, params));
}
