#pragma once
// Finite-mass runs on an expanding Truncate box. The box grows whenever the
// outer boundary band carries a non-negligible share of the mass, so migration
// never leaks mass out of the simulated window; absorption (total mass exactly
// zero) is detected and the run is cut short. Site streams are keyed by
// physical coordinates relative to the starting box, so draws at a site are
// unchanged by box growth.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kernel.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "schemes.hpp"
#include "sim.hpp"

namespace reglab {

struct BoxGrowthPolicy {
    double growth_factor = 0.25;   // fractional side growth per trigger
    double leak_threshold = 1e-6;  // band mass fraction that triggers growth
    int boundary_width = 2;
    std::size_t max_sites = std::size_t(1) << 20;  // memory budget
};

namespace detail {

// Pack signed per-axis coordinates into one stream key; 64/d bits per axis.
inline std::uint64_t pack_site_key(const std::vector<int>& rel) {
    const int d = static_cast<int>(rel.size());
    if (d < 1 || d > 4) throw std::invalid_argument("finite-mass runs support 1 <= dim <= 4");
    const int bits = 64 / d;
    std::uint64_t key = 0;
    for (int a = 0; a < d; ++a) {
        const std::uint64_t biased =
            static_cast<std::uint64_t>(static_cast<std::int64_t>(rel[a])) + (1ull << (bits - 1));
        if (bits < 64 && biased >= (1ull << bits))
            throw std::overflow_error("finite-mass site coordinate out of key range");
        key = bits == 64 ? biased : (key << bits) | biased;
    }
    return key;
}

inline std::vector<std::size_t> boundary_band(const Lattice& lat, int width) {
    std::vector<std::size_t> band;
    for (std::size_t i = 0; i < lat.n_sites(); ++i) {
        const auto c = lat.coords_of(i);
        for (std::size_t a = 0; a < c.size(); ++a) {
            if (c[a] < width || c[a] >= lat.sides[a] - width) {
                band.push_back(i);
                break;
            }
        }
    }
    return band;
}

}  // namespace detail

inline PathRecord simulate_finite_mass(const Config& initial, const ModelParams& params,
                                       const MigrationKernel& kernel0, const DriftSpec& drift,
                                       const DiffusionSpec& diff, const SimConfig& cfg,
                                       const BoxGrowthPolicy& policy = {}) {
    cfg.validate();
    if (kernel0.lattice.boundary != Boundary::Truncate)
        throw std::invalid_argument("simulate_finite_mass: needs a Truncate box");
    detail::check_initial(initial, kernel0.lattice.n_sites());

    Lattice box = kernel0.lattice;
    MigrationKernel kernel = kernel0;
    Config x = initial;
    // coordinates of the initial box's (0,...,0) corner within the current box
    std::vector<int> origin(box.dim, 0);
    auto band = detail::boundary_band(box, policy.boundary_width);

    PathRecord rec;
    const std::int64_t steps = cfg.n_steps();
    std::size_t ri = 0;

    double total = 0.0;
    for (double v : x) total += v;
    bool zero = total == 0.0;
    if (zero) rec.absorbed_at = 0.0;

    auto record = [&](double t) {
        rec.times.push_back(t);
        rec.configurations.push_back(x);
        rec.boxes.push_back(box);
        rec.origins.push_back(origin);
    };

    auto grow = [&]() -> bool {  // false when the memory budget is exhausted
        std::vector<int> new_sides(box.dim);
        std::size_t n_new = 1;
        for (int a = 0; a < box.dim; ++a) {
            new_sides[a] = std::max(
                static_cast<int>(std::ceil(box.sides[a] * (1.0 + policy.growth_factor))),
                box.sides[a] + 2);
            n_new *= static_cast<std::size_t>(new_sides[a]);
        }
        if (n_new > policy.max_sites) return false;
        Lattice nbox(box.dim, new_sides, Boundary::Truncate);
        Config nx(nbox.n_sites(), 0.0);
        std::vector<int> offset(box.dim);
        for (int a = 0; a < box.dim; ++a) offset[a] = (new_sides[a] - box.sides[a]) / 2;
        for (std::size_t i = 0; i < box.n_sites(); ++i) {
            auto c = box.coords_of(i);
            for (int a = 0; a < box.dim; ++a) c[a] += offset[a];
            nx[nbox.index_of(c)] = x[i];
        }
        for (int a = 0; a < box.dim; ++a) origin[a] += offset[a];
        box = nbox;
        kernel = build_kernel(kernel0.stencil, box);
        x = std::move(nx);
        band = detail::boundary_band(box, policy.boundary_width);
        return true;
    };

    Config inflow, next;
    for (std::int64_t step = 0; step <= steps; ++step) {
        while (ri < cfg.record_times.size() && cfg.step_of(cfg.record_times[ri]) == step) {
            record(cfg.record_times[ri]);
            ++ri;
        }
        if (step == steps) break;
        if (zero) continue;

        // grow until the boundary band is clean (normally at most once)
        for (;;) {
            double band_mass = 0.0;
            for (std::size_t i : band) band_mass += x[i];
            if (band_mass <= policy.leak_threshold * total) break;
            if (!grow()) {
                rec.exceeded_at = step * cfg.dt;
                return rec;
            }
        }

        const std::size_t n = box.n_sites();
        inflow.assign(n, 0.0);
        next.assign(n, 0.0);
        kernel.apply(x, inflow);
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] == 0.0 && inflow[i] == 0.0) continue;  // stays exactly zero
            auto c = box.coords_of(i);
            for (int a = 0; a < box.dim; ++a) c[a] -= origin[a];
            rng::Stream s(cfg.seed, cfg.replicate_index, static_cast<std::uint64_t>(step),
                          detail::pack_site_key(c));
            next[i] = step_site(x[i], inflow[i], params.alpha, drift, diff, cfg.dt, cfg.scheme, s);
            if (std::isnan(next[i])) detail::throw_nan(step, i);
        }
        x.swap(next);

        total = 0.0;
        for (double v : x) total += v;
        if (total == 0.0) {
            rec.absorbed_at = (step + 1) * cfg.dt;
            zero = true;
        } else if (total > kBlowupGuard) {  // total mass dominates the sigma-norm
            rec.exceeded_at = (step + 1) * cfg.dt;
            return rec;
        }
    }
    return rec;
}

}  // namespace reglab
