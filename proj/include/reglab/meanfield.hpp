#pragma once
// Mean-field particle system: M exchangeable particles, each stepped like a
// lattice site whose migration inflow is the current empirical mean. The only
// coupling between particles is through that mean.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "rng.hpp"
#include "schemes.hpp"
#include "sim.hpp"

namespace reglab {

struct MeanFieldEnsemble {
    std::size_t particle_count = 0;
    std::vector<double> particles;       // final snapshot
    std::vector<double> times;
    std::vector<double> empirical_mean;  // one per recorded time
    std::vector<std::vector<double>> snapshots;  // all particles per recorded time
};

// initial_sampler draws one particle's start value from a dedicated stream
// (class 1, so simulation draws are never reused).
inline MeanFieldEnsemble simulate_meanfield_particles(
    std::size_t M, const std::function<double(rng::Stream&)>& initial_sampler,
    const ModelParams& params, const DriftSpec& drift, const DiffusionSpec& diff,
    const SimConfig& cfg) {
    if (M < 2) throw std::invalid_argument("simulate_meanfield_particles: need M >= 2");
    cfg.validate();

    MeanFieldEnsemble ens;
    ens.particle_count = M;
    std::vector<double> x(M), next(M);
    for (std::size_t i = 0; i < M; ++i) {
        rng::Stream s(cfg.seed, cfg.replicate_index, 0, i, 1);
        x[i] = initial_sampler(s);
        if (!(x[i] >= 0.0) || !std::isfinite(x[i]))
            throw std::invalid_argument("simulate_meanfield_particles: sampler must return >= 0");
    }

    const std::int64_t steps = cfg.n_steps();
    std::size_t ri = 0;
    for (std::int64_t step = 0; step <= steps; ++step) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(M);
        while (ri < cfg.record_times.size() && cfg.step_of(cfg.record_times[ri]) == step) {
            ens.times.push_back(cfg.record_times[ri]);
            ens.empirical_mean.push_back(mean);
            ens.snapshots.push_back(x);
            ++ri;
        }
        if (step == steps) break;
        for (std::size_t i = 0; i < M; ++i) {
            rng::Stream s(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step), i);
            next[i] = step_site(x[i], mean, params.alpha, drift, diff, cfg.dt, cfg.scheme, s);
            if (std::isnan(next[i])) detail::throw_nan(step, i);
        }
        x.swap(next);
    }
    ens.particles = std::move(x);
    return ens;
}

}  // namespace reglab
