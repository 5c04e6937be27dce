#pragma once
// Log-Laplace dual for the competition-free (gamma = 0) system: v solves
//   dv/dt = alpha*(M v - v) - beta*v^2   componentwise,
// so that E^x exp(-<X_t, y>) = exp(-<x, v_t>) with v_0 = y and M the
// transpose of the forward migration kernel (symmetric kernels are their own
// transpose). Fixed-step classical RK4; the right side is smooth and
// dissipative.

#include <stdexcept>
#include <vector>

#include "kernel.hpp"

namespace reglab {

struct DualOdePath {
    std::vector<double> times;
    std::vector<Config> values;
};

inline DualOdePath dual_ode_solve(const Config& y0, double alpha, const MigrationKernel& kernel,
                                  double beta, double t_end, const std::vector<double>& record_times,
                                  double step = 1e-4) {
    const int n = kernel.n_sites();
    if (static_cast<int>(y0.size()) != n)
        throw std::invalid_argument("dual_ode_solve: y0 size does not match kernel");
    for (double v : y0)
        if (v < 0.0) throw std::invalid_argument("dual_ode_solve: y0 must be nonnegative");
    for (double t : record_times)
        if (t < 0.0 || t > t_end + 1e-12)
            throw std::invalid_argument("dual_ode_solve: record time outside [0, t_end]");

    Config v = y0, k1(n), k2(n), k3(n), k4(n), tmp(n), mv(n);
    auto rhs = [&](const Config& state, Config& out) {
        kernel.apply(state, mv);
        for (int i = 0; i < n; ++i)
            out[i] = alpha * (mv[i] - state[i]) - beta * state[i] * state[i];
    };

    DualOdePath path;
    double t = 0.0;
    for (double rt : record_times) {
        while (t < rt - 1e-15) {
            const double h = std::min(step, rt - t);
            rhs(v, k1);
            for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
            rhs(tmp, k2);
            for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
            rhs(tmp, k3);
            for (int i = 0; i < n; ++i) tmp[i] = v[i] + h * k3[i];
            rhs(tmp, k4);
            for (int i = 0; i < n; ++i) {
                v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if (v[i] < 0.0) v[i] = 0.0;  // guard against terminal-step round-off
            }
            t += h;
        }
        path.times.push_back(rt);
        path.values.push_back(v);
    }
    return path;
}

}  // namespace reglab
