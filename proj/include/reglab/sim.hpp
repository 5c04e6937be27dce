#pragma once
// Path simulation of the lattice system, coupled pairs sharing driving noise,
// and the scalar immigration diffusion. Every draw is keyed by
// (seed, replicate, step, site), so paths are bitwise reproducible no matter
// how replicates are scheduled.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "schemes.hpp"
#include "weights.hpp"

namespace reglab {

inline constexpr double kBlowupGuard = 1e6;  // sigma-norm abort threshold

struct SimConfig {
    double dt = 1e-3;
    double t_end = 10.0;                // rounded up to a whole number of steps
    std::vector<double> record_times;   // sorted, within [0, t_end]; snapped to steps
    Scheme scheme = Scheme::FullTruncationEM;
    std::uint64_t seed = 0;
    std::uint64_t replicate_index = 0;

    void validate() const {
        if (!(dt > 0.0) || !(dt <= t_end)) throw std::invalid_argument("SimConfig: need 0 < dt <= t_end");
        double prev = 0.0;
        for (double t : record_times) {
            if (!(t >= 0.0) || t > t_end + 0.5 * dt)
                throw std::invalid_argument("SimConfig: record times must lie in [0, t_end]");
            if (t < prev) throw std::invalid_argument("SimConfig: record times must be sorted");
            prev = t;
        }
    }

    std::int64_t n_steps() const { return static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9)); }
    std::int64_t step_of(double t) const { return static_cast<std::int64_t>(std::llround(t / dt)); }
};

struct PathRecord {
    std::vector<double> times;
    std::vector<Config> configurations;
    std::optional<double> absorbed_at;   // total mass first hit exactly 0
    std::optional<double> exceeded_at;   // sigma-norm blow-up guard or box budget
    // Finite-mass runs only: the box each configuration lives on and the
    // coordinates of the initial box's origin site within it.
    std::vector<Lattice> boxes;
    std::vector<std::vector<int>> origins;

    double total_mass_at(std::size_t k) const {
        double s = 0.0;
        for (double v : configurations.at(k)) s += v;
        return s;
    }
};

namespace detail {

inline void check_initial(const Config& x, std::size_t n_sites) {
    if (x.size() != n_sites)
        throw std::invalid_argument("simulate: initial configuration size does not match lattice");
    for (double v : x)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("simulate: initial values must be finite and >= 0");
}

[[noreturn]] inline void throw_nan(std::int64_t step, std::size_t site) {
    throw std::runtime_error("simulate: NaN at step " + std::to_string(step) + ", site " +
                             std::to_string(site));
}

}  // namespace detail

inline PathRecord simulate_lattice(const Config& initial, const ModelParams& params,
                                   const MigrationKernel& kernel, const DriftSpec& drift,
                                   const DiffusionSpec& diff, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = kernel.lattice.n_sites();
    detail::check_initial(initial, n);
    const auto weights = liggett_spitzer_weights(kernel, 1.0);

    PathRecord rec;
    Config x = initial, inflow(n), next(n);
    const std::int64_t steps = cfg.n_steps();
    std::size_t ri = 0;  // next record time to emit
    bool zero = true;
    for (double v : x) zero = zero && v == 0.0;
    if (zero) rec.absorbed_at = 0.0;

    for (std::int64_t step = 0; step <= steps; ++step) {
        while (ri < cfg.record_times.size() && cfg.step_of(cfg.record_times[ri]) == step) {
            rec.times.push_back(cfg.record_times[ri]);
            rec.configurations.push_back(x);
            ++ri;
        }
        if (step == steps) break;
        if (zero) continue;  // zero is absorbing: skip the arithmetic, keep recording

        kernel.apply(x, inflow);
        for (std::size_t i = 0; i < n; ++i) {
            rng::Stream s(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step), i);
            next[i] = step_site(x[i], inflow[i], params.alpha, drift, diff, cfg.dt, cfg.scheme, s);
            if (std::isnan(next[i])) detail::throw_nan(step, i);
        }
        x.swap(next);

        double total = 0.0;
        for (double v : x) total += v;
        if (total == 0.0 && !rec.absorbed_at) {
            rec.absorbed_at = (step + 1) * cfg.dt;
            zero = true;
        }
        if (sigma_norm(x, weights) > kBlowupGuard) {
            rec.exceeded_at = (step + 1) * cfg.dt;
            return rec;  // abort; later record times are dropped
        }
    }
    return rec;
}

// Two paths driven by identical per-(site, step) streams. With ordered initial
// states and ordered drifts this realizes the monotone coupling; violations
// that appear are discretization artifacts and are left in the output for the
// analysis module to report.
inline std::pair<PathRecord, PathRecord> simulate_coupled_pair(
    const Config& x1_init, const Config& x2_init, const ModelParams& params,
    const MigrationKernel& kernel, const DriftSpec& drift1, const DriftSpec& drift2,
    const DiffusionSpec& diff, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = kernel.lattice.n_sites();
    detail::check_initial(x1_init, n);
    if (x2_init.size() != x1_init.size())
        throw std::invalid_argument("simulate_coupled_pair: mismatched lattice shapes");
    detail::check_initial(x2_init, n);
    const auto weights = liggett_spitzer_weights(kernel, 1.0);

    PathRecord r1, r2;
    Config x1 = x1_init, x2 = x2_init, in1(n), in2(n), nx1(n), nx2(n);
    const std::int64_t steps = cfg.n_steps();
    std::size_t ri = 0;

    for (std::int64_t step = 0; step <= steps; ++step) {
        while (ri < cfg.record_times.size() && cfg.step_of(cfg.record_times[ri]) == step) {
            r1.times.push_back(cfg.record_times[ri]);
            r2.times.push_back(cfg.record_times[ri]);
            r1.configurations.push_back(x1);
            r2.configurations.push_back(x2);
            ++ri;
        }
        if (step == steps) break;

        kernel.apply(x1, in1);
        kernel.apply(x2, in2);
        for (std::size_t i = 0; i < n; ++i) {
            // identically keyed streams so both paths see the same draws
            rng::Stream sa(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step), i);
            rng::Stream sb(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step), i);
            nx1[i] = step_site(x1[i], in1[i], params.alpha, drift1, diff, cfg.dt, cfg.scheme, sa);
            nx2[i] = step_site(x2[i], in2[i], params.alpha, drift2, diff, cfg.dt, cfg.scheme, sb);
            if (std::isnan(nx1[i]) || std::isnan(nx2[i])) detail::throw_nan(step, i);
        }
        x1.swap(nx1);
        x2.swap(nx2);

        auto total = [](const Config& c) {
            double s = 0.0;
            for (double v : c) s += v;
            return s;
        };
        if (total(x1) == 0.0 && !r1.absorbed_at) r1.absorbed_at = (step + 1) * cfg.dt;
        if (total(x2) == 0.0 && !r2.absorbed_at) r2.absorbed_at = (step + 1) * cfg.dt;
        if (sigma_norm(x1, weights) > kBlowupGuard || sigma_norm(x2, weights) > kBlowupGuard) {
            const double t = (step + 1) * cfg.dt;
            if (sigma_norm(x1, weights) > kBlowupGuard) r1.exceeded_at = t;
            if (sigma_norm(x2, weights) > kBlowupGuard) r2.exceeded_at = t;
            break;
        }
    }
    return {std::move(r1), std::move(r2)};
}

// Scalar immigration diffusion dV = alpha*(theta - V)dt + h(V)dt + sqrt(2g)dB,
// i.e. a single site whose migration inflow is frozen at theta.
inline PathRecord simulate_immigration_diffusion(double theta, double v0,
                                                 const ModelParams& params, const DriftSpec& drift,
                                                 const DiffusionSpec& diff, const SimConfig& cfg) {
    if (!(theta >= 0.0)) throw std::invalid_argument("simulate_immigration_diffusion: theta >= 0");
    if (!(v0 >= 0.0) || !std::isfinite(v0))
        throw std::invalid_argument("simulate_immigration_diffusion: v0 must be finite and >= 0");
    cfg.validate();

    PathRecord rec;
    double v = v0;
    const std::int64_t steps = cfg.n_steps();
    std::size_t ri = 0;
    for (std::int64_t step = 0; step <= steps; ++step) {
        while (ri < cfg.record_times.size() && cfg.step_of(cfg.record_times[ri]) == step) {
            rec.times.push_back(cfg.record_times[ri]);
            rec.configurations.push_back({v});
            ++ri;
        }
        if (step == steps) break;
        rng::Stream s(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step), 0);
        v = step_site(v, theta, params.alpha, drift, diff, cfg.dt, cfg.scheme, s);
        if (std::isnan(v)) detail::throw_nan(step, 0);
        // zero is only absorbing when there is no immigration
        if (theta == 0.0 && v == 0.0 && !rec.absorbed_at) rec.absorbed_at = (step + 1) * cfg.dt;
        if (v > kBlowupGuard) {
            rec.exceeded_at = (step + 1) * cfg.dt;
            return rec;
        }
    }
    return rec;
}

// The maximal process: started from the constant configuration N at every site.
inline PathRecord maximal_process_run(double N, const ModelParams& params,
                                      const MigrationKernel& kernel, const DriftSpec& drift,
                                      const DiffusionSpec& diff, const SimConfig& cfg) {
    if (!(N > 0.0)) throw std::invalid_argument("maximal_process_run: N must be > 0");
    Config initial(kernel.lattice.n_sites(), N);
    return simulate_lattice(initial, params, kernel, drift, diff, cfg);
}

}  // namespace reglab
