#pragma once
// The fixed-point function f(theta) whose positive root theta* is the mean of
// the nontrivial equilibrium in the survival regime:
//   f(theta) = int_0^inf (h(y)/g(y)) * exp(theta * int_{y0}^y alpha/g)
//                                   * exp(int_{y0}^y (-alpha*x+h(x))/g dx) dy.
// f is strictly decreasing with f(0+) equal to the general extinction
// integral; a positive root exists iff that integral is positive.

#include <cmath>
#include <optional>
#include <string>

#include "criteria.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "stationary.hpp"

namespace reglab {

inline double f_of_theta(double theta, const ModelParams& p, const DriftSpec& drift,
                         const DiffusionSpec& diff,
                         const QuadratureSpec& spec = {1e-12, 1e-10, 4000}) {
    if (!(theta > 0.0)) throw std::domain_error("f_of_theta: theta must be > 0");
    const double y0 = drift_last_zero(drift);
    const bool closed = drift.kind == DriftKind::Logistic && diff.kind == DiffusionKind::FellerLinear;
    if (closed && !(y0 > 0.0))
        throw std::domain_error("f_of_theta: logistic drift needs capacity > 0");

    auto log_weight = [&](double y) {
        if (closed) {
            const double g = drift.gamma, K = drift.capacity, beta = diff.beta;
            return (p.alpha * theta / beta) * std::log(y / y0) +
                   ((g * K - p.alpha) / beta) * (y - y0) - (g / (2.0 * beta)) * (y * y - y0 * y0);
        }
        const double base = y0 > 0.0 ? y0 : 1.0;
        const double a_part =
            integrate([&](double x) { return p.alpha / diff.g(x); }, base, y, {1e-11, 1e-11, 2000})
                .value;
        const double e_part = integrate([&](double x) { return (-p.alpha * x + drift.h(x)) / diff.g(x); },
                                        base, y, {1e-11, 1e-11, 2000})
                                  .value;
        return theta * a_part + e_part;
    };
    auto integrand = [&](double y) {
        const double lw = log_weight(y);
        return lw < -745.0 ? 0.0 : drift.h(y) / diff.g(y) * std::exp(lw);
    };

    double value = 0.0;
    if (y0 > 0.0) {
        auto lo = integrate(integrand, 0.0, y0, spec);
        if (!lo.converged) throw QuadratureError("f_of_theta: quadrature did not converge below y0");
        value += lo.value;
    }
    auto hi = integrate_semi_infinite(integrand, y0, spec);
    if (!hi.converged) throw QuadratureError("f_of_theta: quadrature did not converge beyond y0");
    return value + hi.value;
}

struct FixedPointResult {
    std::optional<double> theta_star;
    CriterionResult criterion;
    int evaluations = 0;
    double residual = 0.0;
    std::string diagnostics;
};

inline FixedPointResult meanfield_fixed_point(const ModelParams& p, const DriftSpec& drift,
                                              const DiffusionSpec& diff, double tol = 1e-6) {
    FixedPointResult res;
    res.criterion = extinction_criterion_general(p, drift, diff);
    if (res.criterion.extinct) {
        res.diagnostics = "extinct regime: no positive fixed point";
        return res;
    }
    int evals = 0;
    auto f = [&](double th) {
        ++evals;
        return f_of_theta(th, p, drift, diff);
    };
    const double lo = 1e-6;
    const double start = drift.kind == DriftKind::Logistic && drift.capacity > 0.0 ? drift.capacity : 1.0;
    double hi = start;
    const double hi_max = std::ldexp(start, 20);  // doubling cap at 2^20 * K
    if (f(lo) <= 0.0) {
        // survival says f(0+) > 0; an immediate nonpositive value means theta*
        // is below resolution
        res.diagnostics = "f(1e-6) <= 0 despite survival criterion";
        res.evaluations = evals;
        return res;
    }
    while (hi <= hi_max && f(hi) > 0.0) hi *= 2.0;
    if (hi > hi_max) {
        res.diagnostics = "no sign change of f below 2^20 * K";
        res.evaluations = evals;
        return res;
    }
    const double theta = brent(f, lo, hi, tol);
    res.theta_star = theta;
    res.residual = f(theta);
    res.evaluations = evals;
    return res;
}

}  // namespace reglab
