#pragma once
// Equilibrium density of the scalar immigration diffusion
//   dV = alpha*(theta - V)dt + h(V)dt + sqrt(2 g(V))dB :
// unnormalized density Phi_theta(y) = (1/g(y)) * exp(int_{y0}^y
// [alpha*(theta-x)+h(x)]/g(x) dx) with basepoint y0 the last zero of h, and
// the normalized law Gamma_theta with its moments and CDF. Logistic drift
// with linear g has a closed-form exponent; anything else goes through
// nested quadrature.

#include <cmath>
#include <stdexcept>

#include "model.hpp"
#include "quadrature.hpp"
#include "roots.hpp"

namespace reglab {

// y0 = max{y > 0 : h(y) = 0}, or 0 when h < 0 on all of (0, inf).
// Custom drifts are scanned on a log-spaced grid (0.5% resolution) so zeros
// at any scale between 1e-8 and scan_max are caught.
inline double drift_last_zero(const DriftSpec& drift, double scan_max = 1e4) {
    switch (drift.kind) {
        case DriftKind::Logistic: return drift.capacity;
        case DriftKind::LinearGrowth: return 0.0;
        case DriftKind::Custom: break;
    }
    const double lo = 1e-8;
    const int n = 6000;
    const double step = std::log(scan_max / lo) / n;
    double last = 0.0, next = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo * std::exp(step * i);
        if (drift.h(x) > 0.0) {
            last = x;
            next = (i < n) ? lo * std::exp(step * (i + 1)) : x;
        }
    }
    if (last == 0.0) return 0.0;
    if (drift.h(next) > 0.0)
        throw std::domain_error("drift_last_zero: h still positive at scan limit");
    return brent([&](double x) { return drift.h(x); }, last, next, 1e-12);
}

namespace detail {

// log of g(y)*Phi_theta(y), i.e. the exponent integral alone.
template <class Drift, class Diff>
double phi_exponent(double y, double theta, double alpha, const Drift& drift, const Diff& diff,
                    double basepoint) {
    if (drift.kind == DriftKind::Logistic && diff.kind == DiffusionKind::FellerLinear) {
        const double b = basepoint, g = drift.gamma, K = drift.capacity, beta = diff.beta;
        return (alpha * theta / beta) * std::log(y / b) +
               ((g * K - alpha) / beta) * (y - b) - (g / (2.0 * beta)) * (y * y - b * b);
    }
    auto integrand = [&](double x) { return (alpha * (theta - x) + drift.h(x)) / diff.g(x); };
    auto r = integrate(integrand, basepoint, y, {1e-11, 1e-11, 2000});
    return r.value;
}

}  // namespace detail

inline double phi_basepoint(const DriftSpec& drift) {
    const double y0 = drift_last_zero(drift);
    return y0 > 0.0 ? y0 : 1.0;
}

inline double phi_log_density_at(double y, double theta, const ModelParams& p,
                                 const DriftSpec& drift, const DiffusionSpec& diff,
                                 double basepoint) {
    if (!(y > 0.0)) throw std::domain_error("phi_density: y must be > 0");
    const double gy = diff.g(y);
    if (!(gy > 0.0)) throw std::domain_error("phi_density: g vanishes at y");
    return -std::log(gy) + detail::phi_exponent(y, theta, p.alpha, drift, diff, basepoint);
}

inline double phi_log_density(double y, double theta, const ModelParams& p,
                              const DriftSpec& drift, const DiffusionSpec& diff) {
    return phi_log_density_at(y, theta, p, drift, diff, phi_basepoint(drift));
}

inline double phi_density(double y, double theta, const ModelParams& p, const DriftSpec& drift,
                          const DiffusionSpec& diff) {
    return std::exp(phi_log_density(y, theta, p, drift, diff));
}

struct GammaTheta {
    double theta = 0.0;
    double normalizer = 0.0;   // C_theta = 1 / int Phi
    double log_norm = 0.0;     // log int Phi
    double mean = 0.0;
    double variance = 0.0;
    double quad_error = 0.0;   // accumulated quadrature error estimate
    ModelParams params;
    DriftSpec drift;
    DiffusionSpec diffusion;
    double shift = 0.0;        // internal: max of log Phi used for scaling
    double basepoint = 1.0;    // internal: exponent anchor y0
    double support_hi = 0.0;   // internal: log density underflows past here

    double density(double y) const {
        return normalizer *
               std::exp(phi_log_density_at(y, theta, params, drift, diffusion, basepoint));
    }

    double cdf(double y) const {
        if (y <= 0.0) return 0.0;
        // Past support_hi the density is below double underflow; integrating
        // over the full range would let the quadrature miss the mass.
        const double hi = std::min(y, support_hi);
        auto r = integrate(
            [&](double x) {
                return std::exp(phi_log_density_at(x, theta, params, drift, diffusion, basepoint) -
                                shift);
            },
            0.0, hi, {1e-12, 1e-9, 2000});
        const double c = r.value * std::exp(shift) * normalizer;
        return std::min(1.0, std::max(0.0, c));
    }
};

inline GammaTheta gamma_theta_stats(double theta, const ModelParams& p, const DriftSpec& drift,
                                    const DiffusionSpec& diff,
                                    const QuadratureSpec& spec = {1e-12, 1e-10, 4000}) {
    if (!(theta > 0.0)) throw std::domain_error("gamma_theta_stats: theta must be > 0");
    GammaTheta gt;
    gt.theta = theta;
    gt.params = p;
    gt.drift = drift;
    gt.diffusion = diff;

    const double basepoint = phi_basepoint(drift);
    gt.basepoint = basepoint;
    auto logphi = [&](double y) {
        return phi_log_density_at(y, theta, p, drift, diff, basepoint);
    };

    // scale by the max of log Phi over a log-spaced scan so the quadratures
    // work near 1 regardless of parameters
    double shift = -1e308;
    for (int i = 0; i <= 400; ++i) {
        shift = std::max(shift, logphi(std::exp(-12.0 + 18.0 * i / 400.0)));
    }
    // extend past the scan window until the log density has underflowed
    double hi = std::exp(6.0);
    while (logphi(hi) - shift > -746.0 && hi < 1e17) {
        hi *= 2.0;
        shift = std::max(shift, logphi(hi));
    }
    gt.shift = shift;
    gt.support_hi = hi;

    auto scaled = [&](double y) { return std::exp(logphi(y) - shift); };
    auto z = integrate_semi_infinite(scaled, 0.0, spec);
    if (!z.converged)
        throw QuadratureError("gamma_theta_stats: normalizer quadrature did not converge");
    auto m1 = integrate_semi_infinite([&](double y) { return y * scaled(y); }, 0.0, spec);
    auto m2 = integrate_semi_infinite([&](double y) { return y * y * scaled(y); }, 0.0, spec);
    gt.log_norm = shift + std::log(z.value);
    gt.normalizer = std::exp(-gt.log_norm);
    gt.mean = m1.value / z.value;
    gt.variance = m2.value / z.value - gt.mean * gt.mean;
    gt.quad_error = (z.error + m1.error + m2.error) * std::exp(shift) * gt.normalizer;
    if (!(std::isfinite(gt.mean) && std::isfinite(gt.variance)))
        throw QuadratureError("gamma_theta_stats: nonfinite moments");
    return gt;
}

}  // namespace reglab
