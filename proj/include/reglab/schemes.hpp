#pragma once
// Single-site time steppers. FullTruncationEM evaluates drift/diffusion at
// max(x,0) and clamps the result at 0; SplitExactFeller (linear g only) does a
// Strang split: half drift ODE step, exact Feller noise transition, half drift
// step. The exact transition keeps the zero atom, so finite-mass runs can be
// absorbed exactly.

#include <cmath>
#include <stdexcept>
#include <string>

#include "model.hpp"
#include "rng.hpp"

namespace reglab {

enum class Scheme { FullTruncationEM, SplitExactFeller };

inline std::string to_string(Scheme s) {
    return s == Scheme::FullTruncationEM ? "full-truncation-em" : "split-exact-feller";
}

inline Scheme parse_scheme(const std::string& name) {
    if (name == "full-truncation-em" || name == "em") return Scheme::FullTruncationEM;
    if (name == "split-exact-feller" || name == "split") return Scheme::SplitExactFeller;
    throw std::invalid_argument("unknown scheme: " + name);
}

namespace detail {

inline void check_step_inputs(double x, double inflow, double dt) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::domain_error("step_site: state must be finite and >= 0");
    if (!(inflow >= 0.0) || !std::isfinite(inflow))
        throw std::domain_error("step_site: inflow must be finite and >= 0");
    if (!(dt > 0.0)) throw std::domain_error("step_site: dt must be > 0");
}

// One RK4 step of x' = alpha*(inflow - x) + h(x) over tau, clamped at 0.
inline double drift_ode_step(double x, double inflow, double alpha, const DriftSpec& drift,
                             double tau) {
    auto f = [&](double v) {
        const double vp = std::max(v, 0.0);
        return alpha * (inflow - vp) + drift.h(vp);
    };
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * tau * k1);
    const double k3 = f(x + 0.5 * tau * k2);
    const double k4 = f(x + tau * k3);
    const double raw = x + tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // max() would swallow a NaN; let it surface so callers can report it
    return std::isnan(raw) ? raw : std::max(0.0, raw);
}

}  // namespace detail

// Exact transition of dX = sqrt(2 beta X) dB over dt: a Poisson(x/(beta*dt))
// mixture of Gamma summands scaled by beta*dt. Mean x, variance 2*beta*x*dt,
// zero atom exp(-x/(beta*dt)).
inline double feller_exact_transition(double x, double beta, double dt, rng::Stream& stream) {
    if (std::isnan(x)) return x;
    if (x == 0.0 || beta == 0.0) return x;
    const double lambda = x / (beta * dt);
    const std::uint64_t n = stream.poisson(lambda);
    if (n == 0) return 0.0;
    return beta * dt * stream.gamma(static_cast<double>(n));
}

inline double step_site_em(double x, double inflow, double alpha, const DriftSpec& drift,
                           const DiffusionSpec& diff, double dt, double normal_draw) {
    detail::check_step_inputs(x, inflow, dt);
    const double xp = std::max(x, 0.0);
    const double drift_term = alpha * (inflow - x) + drift.h(xp);
    const double noise = std::sqrt(2.0 * diff.g(xp) * dt) * normal_draw;
    const double raw = x + drift_term * dt + noise;
    return std::isnan(raw) ? raw : std::max(0.0, raw);
}

inline double step_site_split(double x, double inflow, double alpha, const DriftSpec& drift,
                              const DiffusionSpec& diff, double dt, rng::Stream& stream) {
    detail::check_step_inputs(x, inflow, dt);
    if (diff.kind != DiffusionKind::FellerLinear)
        throw std::invalid_argument("step_site_split: requires linear (Feller) diffusion");
    double v = detail::drift_ode_step(x, inflow, alpha, drift, 0.5 * dt);
    v = feller_exact_transition(v, diff.beta, dt, stream);
    return detail::drift_ode_step(v, inflow, alpha, drift, 0.5 * dt);
}

// Dispatcher used by the simulators: one stream per (site, step); the EM
// branch consumes exactly one normal draw from it.
inline double step_site(double x, double inflow, double alpha, const DriftSpec& drift,
                        const DiffusionSpec& diff, double dt, Scheme scheme,
                        rng::Stream& stream) {
    if (scheme == Scheme::FullTruncationEM)
        return step_site_em(x, inflow, alpha, drift, diff, dt, stream.normal());
    return step_site_split(x, inflow, alpha, drift, diff, dt, stream);
}

}  // namespace reglab
