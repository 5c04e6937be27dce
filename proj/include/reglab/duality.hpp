#pragma once
// Monte Carlo duality machinery: Laplace functionals of the lattice process,
// the self-duality gap between a run and its transpose-kernel dual, and the
// finite-mass dual characterization of the upper invariant measure.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "finite_mass.hpp"
#include "kernel.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "stats.hpp"

namespace reglab {

// MC average of exp(-weight * <X_t, lambda>) over independent replicates.
// The weight is explicit so the gamma = 0 route (weight 1/beta, checked
// against the dual ODE) can reuse the machinery.
inline McEstimate laplace_functional_scaled(const Config& initial, const Config& lambda, double t,
                                            const ModelParams& params,
                                            const MigrationKernel& kernel, double weight,
                                            const SimConfig& base_cfg, std::size_t replicates) {
    if (replicates < 2) throw std::invalid_argument("laplace_functional: need >= 2 replicates");
    if (lambda.size() != initial.size())
        throw std::invalid_argument("laplace_functional: lambda/initial size mismatch");
    for (double v : lambda)
        if (!(v >= 0.0)) throw std::invalid_argument("laplace_functional: lambda must be >= 0");
    const auto drift = drift_from(params);
    const auto diff = diffusion_from(params);

    auto weigh = [&](const Config& x) {
        double dot = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * lambda[i];
        return std::exp(-weight * dot);
    };

    if (t == 0.0) return {weigh(initial), 0.0, replicates, base_cfg.seed};

    std::vector<double> vals(replicates);
    SimConfig cfg = base_cfg;
    cfg.t_end = t;
    cfg.record_times = {t};
    for (std::size_t r = 0; r < replicates; ++r) {
        cfg.replicate_index = r;
        const auto rec = simulate_lattice(initial, params, kernel, drift, diff, cfg);
        vals[r] = weigh(rec.configurations.back());
    }
    return mc_stats(vals, base_cfg.seed);
}

inline McEstimate laplace_functional_mc(const Config& initial, const Config& lambda, double t,
                                        const ModelParams& params, const MigrationKernel& kernel,
                                        const SimConfig& base_cfg, std::size_t replicates) {
    if (params.gamma == 0.0 || params.beta == 0.0)
        throw std::invalid_argument("laplace_functional_mc: gamma/beta scaling degenerates");
    return laplace_functional_scaled(initial, lambda, t, params, kernel,
                                     params.gamma / params.beta, base_cfg, replicates);
}

struct DualityGap {
    double gap = 0.0;
    double combined_se = 0.0;
    McEstimate forward;  // started from x, weighted by y
    McEstimate dual;     // started from y on the transpose kernel, weighted by x
    bool pass() const { return std::fabs(gap) <= 3.0 * combined_se; }
};

// Self-duality: E^x exp(-c<X_t, y>) vs E^y exp(-c<X'_t, x>) with X' run on the
// transpose kernel; the two sides use disjoint derived seeds.
inline DualityGap self_duality_gap(const Config& x, const Config& y, double t,
                                   const ModelParams& params, const MigrationKernel& kernel,
                                   const SimConfig& base_cfg, std::size_t replicates) {
    const auto tk = transpose_kernel(kernel);
    SimConfig cf = base_cfg, cd = base_cfg;
    cf.seed = rng::derive_seed(base_cfg.seed, 1);
    cd.seed = rng::derive_seed(base_cfg.seed, 2);
    DualityGap g;
    g.forward = laplace_functional_mc(x, y, t, params, kernel, cf, replicates);
    g.dual = laplace_functional_mc(y, x, t, params, tk, cd, replicates);
    g.gap = g.forward.estimate - g.dual.estimate;
    g.combined_se = std::sqrt(g.forward.standard_error * g.forward.standard_error +
                              g.dual.standard_error * g.dual.standard_error);
    return g;
}

struct DualAbsorption {
    McEstimate estimate;       // absorption frequency by T_max
    McEstimate estimate_half;  // absorption frequency by T_max / 2
    bool stabilized = false;   // rise over the second half <= 2 SE
};

namespace detail {

// Re-centre a finite-support configuration into a fresh Truncate box with the
// given margin per side, returning the box and embedded configuration.
inline std::pair<Lattice, Config> embed_in_box(const Config& lambda, const Lattice& lat,
                                               int margin) {
    std::vector<int> lo(lat.dim, 0), hi(lat.dim, 0);
    bool any = false;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] == 0.0) continue;
        const auto c = lat.coords_of(i);
        for (int a = 0; a < lat.dim; ++a) {
            if (!any || c[a] < lo[a]) lo[a] = c[a];
            if (!any || c[a] > hi[a]) hi[a] = c[a];
        }
        any = true;
    }
    std::vector<int> sides(lat.dim);
    for (int a = 0; a < lat.dim; ++a) sides[a] = hi[a] - lo[a] + 1 + 2 * margin;
    Lattice box(lat.dim, sides, Boundary::Truncate);
    Config emb(box.n_sites(), 0.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] == 0.0) continue;
        auto c = lat.coords_of(i);
        for (int a = 0; a < lat.dim; ++a) c[a] = c[a] - lo[a] + margin;
        emb[box.index_of(c)] = lambda[i];
    }
    return {std::move(box), std::move(emb)};
}

}  // namespace detail

// Absorption frequency of finite-mass dual runs started from lambda on the
// transpose kernel; estimates the Laplace transform of the upper invariant
// measure at lambda.
inline DualAbsorption extinction_prob_dual(const Config& lambda, const ModelParams& params,
                                           const MigrationKernel& kernel, double T_max,
                                           const SimConfig& base_cfg, std::size_t replicates,
                                           const BoxGrowthPolicy& policy = {}) {
    if (replicates < 2) throw std::invalid_argument("extinction_prob_dual: need >= 2 replicates");
    if (!(T_max > 0.0)) throw std::invalid_argument("extinction_prob_dual: T_max must be > 0");
    for (double v : lambda)
        if (!(v >= 0.0)) throw std::invalid_argument("extinction_prob_dual: lambda must be >= 0");

    const auto tk = transpose_kernel(kernel);
    auto [box, emb] = detail::embed_in_box(lambda, kernel.lattice, policy.boundary_width + 2);
    const auto dual_kernel = build_kernel(tk.stencil, box);
    const auto drift = drift_from(params);
    const auto diff = diffusion_from(params);

    SimConfig cfg = base_cfg;
    cfg.t_end = T_max;
    cfg.record_times = {};
    std::vector<double> hit_full(replicates), hit_half(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        cfg.replicate_index = r;
        const auto rec = simulate_finite_mass(emb, params, dual_kernel, drift, diff, cfg, policy);
        const bool absorbed = rec.absorbed_at.has_value();
        hit_full[r] = absorbed ? 1.0 : 0.0;
        hit_half[r] = absorbed && *rec.absorbed_at <= 0.5 * T_max ? 1.0 : 0.0;
    }
    DualAbsorption out;
    out.estimate = mc_stats(hit_full, base_cfg.seed);
    out.estimate_half = mc_stats(hit_half, base_cfg.seed);
    // The rise is the fraction absorbed in (T/2, T]; judge it against its own
    // binomial SE (estimate's SE degenerates to 0 when every replicate absorbs).
    const double rise = out.estimate.estimate - out.estimate_half.estimate;
    const double n = static_cast<double>(replicates);
    const double rise_se = std::sqrt(std::max(0.0, rise * (1.0 - rise)) / n);
    out.stabilized = rise <= 2.0 * rise_se;
    return out;
}

// Extinction probability of the dominating supercritical Feller diffusion
// (drift gamma*K*x, diffusion 2*beta*x): a certified lower bound on the
// absorption frequency of logistic finite-mass runs.
inline double feller_extinction_bound(double total_mass, const ModelParams& params) {
    if (!(total_mass >= 0.0))
        throw std::invalid_argument("feller_extinction_bound: mass must be >= 0");
    if (params.beta == 0.0) throw std::invalid_argument("feller_extinction_bound: beta = 0");
    return std::exp(-params.gamma * params.capacity * total_mass / params.beta);
}

}  // namespace reglab
