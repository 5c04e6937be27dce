#pragma once
// Mean-field extinction criteria and the critical capacity.
//
// General form: I = int_0^inf (h(y)/g(y)) * exp(int_{y0}^y (-alpha*x+h(x))/g(x) dx) dy,
// local extinction iff I <= 0.
// Logistic/linear-g specialization: V = int_0^inf exp(K*gamma*y - gamma*beta*y^2/2)
// * alpha*e^{-alpha*y} dy, local extinction iff V <= 1. The critical capacity
// K-bar is the unique K with V(K) = 1.

#include <cmath>
#include <stdexcept>
#include <string>

#include "model.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "stationary.hpp"

namespace reglab {

struct CriterionResult {
    double integral_value = 0.0;
    bool extinct = false;        // integral <= threshold (0 general, 1 logistic)
    double error_estimate = 0.0;
    bool indeterminate = false;  // |integral - threshold| < error_estimate
    double threshold = 0.0;
};

inline CriterionResult extinction_criterion_logistic(const ModelParams& p,
                                                     const QuadratureSpec& spec = {1e-12, 1e-10,
                                                                                   4000}) {
    if (!(p.alpha > 0.0 && p.beta > 0.0 && p.gamma > 0.0))
        throw std::invalid_argument("extinction_criterion_logistic: alpha, beta, gamma must be > 0");
    if (p.capacity < 0.0)
        throw std::invalid_argument("extinction_criterion_logistic: capacity must be >= 0");
    const double a = p.alpha, gb = p.gamma * p.beta, Kg = p.capacity * p.gamma;
    auto r = integrate_semi_infinite(
        [&](double y) { return a * std::exp((Kg - a) * y - 0.5 * gb * y * y); }, 0.0, spec);
    if (!r.converged)
        throw QuadratureError("extinction_criterion_logistic: quadrature did not converge");
    CriterionResult out;
    out.integral_value = r.value;
    out.threshold = 1.0;
    out.extinct = r.value <= 1.0;
    out.error_estimate = r.error;
    out.indeterminate = std::fabs(r.value - 1.0) < r.error;
    return out;
}

// Sign pattern required of h: nonnegative up to its last zero y0, nonpositive
// and not identically zero beyond.
inline void check_hump_shape(const DriftSpec& drift, double y0, double scan_max = 1e3) {
    const int n = 2000;
    bool some_negative = false;
    for (int i = 1; i <= n; ++i) {
        const double x = scan_max * i / n;
        const double hx = drift.h(x);
        if (x < y0 - 1e-9 && hx < -1e-12 * std::max(1.0, std::fabs(y0)))
            throw std::invalid_argument("extinction_criterion_general: h negative below its last zero");
        if (x > y0 + 1e-9 && hx > 1e-12)
            throw std::invalid_argument("extinction_criterion_general: h positive beyond its last zero");
        if (x > y0 && hx < 0.0) some_negative = true;
    }
    if (!some_negative)
        throw std::invalid_argument("extinction_criterion_general: h vanishes beyond y0");
}

inline CriterionResult extinction_criterion_general(const ModelParams& p, const DriftSpec& drift,
                                                    const DiffusionSpec& diff,
                                                    const QuadratureSpec& spec = {1e-12, 1e-10,
                                                                                  4000}) {
    const double y0 = drift_last_zero(drift);
    check_hump_shape(drift, y0);

    auto exponent = [&](double y) {
        if (drift.kind == DriftKind::Logistic && diff.kind == DiffusionKind::FellerLinear) {
            const double g = drift.gamma, K = drift.capacity, beta = diff.beta;
            return ((g * K - p.alpha) / beta) * (y - y0) -
                   (g / (2.0 * beta)) * (y * y - y0 * y0);
        }
        return integrate([&](double x) { return (-p.alpha * x + drift.h(x)) / diff.g(x); }, y0, y,
                         {1e-11, 1e-11, 2000})
            .value;
    };
    auto integrand = [&](double y) {
        const double gy = diff.g(y);
        if (!(gy > 0.0)) throw std::domain_error("extinction_criterion_general: g vanishes");
        const double e = exponent(y);
        return e < -745.0 ? 0.0 : drift.h(y) / gy * std::exp(e);
    };

    // split at the sign change of h
    double value = 0.0, err = 0.0;
    if (y0 > 0.0) {
        auto lo = integrate(integrand, 0.0, y0, spec);
        if (!lo.converged)
            throw QuadratureError("extinction_criterion_general: quadrature did not converge");
        value += lo.value;
        err += lo.error;
    }
    auto hi = integrate_semi_infinite(integrand, y0, spec);
    if (!hi.converged)
        throw QuadratureError("extinction_criterion_general: quadrature did not converge");
    value += hi.value;
    err += hi.error;

    CriterionResult out;
    out.integral_value = value;
    out.threshold = 0.0;
    out.extinct = value <= 0.0;
    out.error_estimate = err;
    out.indeterminate = std::fabs(value) < err;
    return out;
}

struct CapacityResult {
    double k_bar = 0.0;
    int iterations = 0;
    double residual = 0.0;  // V(k_bar) - 1
};

inline CapacityResult critical_capacity(double alpha, double beta, double gamma,
                                        double tol = 1e-6) {
    if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0))
        throw std::invalid_argument("critical_capacity: rates must be > 0");
    int evals = 0;
    auto excess = [&](double K) {
        ++evals;
        ModelParams p{alpha, beta, gamma, K};
        return extinction_criterion_logistic(p).integral_value - 1.0;
    };
    double hi = 1.0;
    if (!expand_bracket(excess, 0.0, hi, 1e3))
        throw RootError("critical_capacity: no bracket below K = 1000 (pathological rates)");
    CapacityResult res;
    res.k_bar = brent(excess, 0.0, hi, tol);
    res.iterations = evals;
    res.residual = excess(res.k_bar);
    return res;
}

}  // namespace reglab
