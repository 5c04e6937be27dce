#pragma once
// Model definitions: rates (alpha, beta, gamma, K), drift h, diffusion g, and
// the grid-based validator for the standing assumptions
//   A1: h(0)=g(0)=0, h upward Lipschitz, g>0 on (0,inf), limsup sqrt(g)/x finite
//   A2: h concave and negative beyond some x0 with a convergent tail integral
//       of 1/(-h)
//   A3: implied by A2 (finite entrance envelope from infinity).

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace reglab {

struct ModelParams {
    double alpha = 1.0;     // migration rate
    double beta = 1.0;      // branching rate
    double gamma = 1.0;     // competition rate
    double capacity = 1.0;  // K

    void validate() const {
        for (double v : {alpha, beta, gamma, capacity})
            if (!(std::isfinite(v) && v >= 0.0))
                throw std::invalid_argument("ModelParams: rates must be finite and >= 0");
    }
};

enum class DriftKind { Logistic, LinearGrowth, Custom };

struct DriftSpec {
    DriftKind kind = DriftKind::Logistic;
    double gamma = 1.0, capacity = 1.0;  // Logistic: h(x) = gamma*x*(capacity-x)
    double c = 0.0;                      // LinearGrowth: h(x) = c*x
    std::function<double(double)> custom_h;
    double lipschitz_up = 0.0;  // estimate filled by validate_assumptions
    bool concave = true;

    double h(double x) const {
        switch (kind) {
            case DriftKind::Logistic: return gamma * x * (capacity - x);
            case DriftKind::LinearGrowth: return c * x;
            case DriftKind::Custom: return custom_h(x);
        }
        return 0.0;
    }

    static DriftSpec logistic(double gamma, double capacity) {
        DriftSpec d;
        d.kind = DriftKind::Logistic;
        d.gamma = gamma;
        d.capacity = capacity;
        d.lipschitz_up = gamma * capacity;  // sup of h' on [0,inf) is h'(0)
        d.concave = true;
        return d;
    }
    static DriftSpec linear_growth(double c) {
        DriftSpec d;
        d.kind = DriftKind::LinearGrowth;
        d.c = c;
        d.lipschitz_up = std::max(c, 0.0);
        d.concave = true;
        return d;
    }
    static DriftSpec custom(std::function<double(double)> h, bool concave = false) {
        DriftSpec d;
        d.kind = DriftKind::Custom;
        d.custom_h = std::move(h);
        d.concave = concave;
        return d;
    }
};

enum class DiffusionKind { FellerLinear, Custom };

struct DiffusionSpec {
    DiffusionKind kind = DiffusionKind::FellerLinear;
    double beta = 1.0;  // FellerLinear: g(x) = beta*x
    std::function<double(double)> custom_g;
    double growth_bound = 0.0;

    double g(double x) const {
        return kind == DiffusionKind::FellerLinear ? beta * x : custom_g(x);
    }

    static DiffusionSpec feller(double beta) {
        DiffusionSpec s;
        s.kind = DiffusionKind::FellerLinear;
        s.beta = beta;
        s.growth_bound = std::sqrt(beta);  // sqrt(beta*x)/x <= sqrt(beta) for x >= 1
        return s;
    }
    static DiffusionSpec custom(std::function<double(double)> g) {
        DiffusionSpec s;
        s.kind = DiffusionKind::Custom;
        s.custom_g = std::move(g);
        return s;
    }
};

inline DriftSpec drift_from(const ModelParams& p) { return DriftSpec::logistic(p.gamma, p.capacity); }
inline DiffusionSpec diffusion_from(const ModelParams& p) { return DiffusionSpec::feller(p.beta); }

struct AssumptionReport {
    bool a1 = false, a2 = false, a3 = false;
    double lipschitz_estimate = 0.0;   // sup of positive slopes of h on the grid
    double x0_estimate = 0.0;          // last zero of h
    double integral_value = 0.0;       // int 1/(-h) from just past x0 to the grid end
    double tail_bound = 0.0;           // bound on the remainder (NaN: grid evidence only)
    std::string notes;
};

// Grid-based evidence on [0, x_max]; closed forms are used for the tail where
// the drift kind permits. Throws when h(0) or g(0) is nonzero.
inline AssumptionReport validate_assumptions(const DriftSpec& drift, const DiffusionSpec& diff,
                                             double x_max = 0.0) {
    if (x_max <= 0.0)
        x_max = 100.0 * std::max(1.0, drift.kind == DriftKind::Logistic ? drift.capacity : 1.0);
    const int n = 10000;
    const double dx = x_max / n;

    if (std::fabs(drift.h(0.0)) > 1e-12) throw std::invalid_argument("validate_assumptions: h(0) != 0");
    if (std::fabs(diff.g(0.0)) > 1e-12) throw std::invalid_argument("validate_assumptions: g(0) != 0");

    AssumptionReport rep;

    // A1: positive-part slope bound for h; g > 0 on (0, x_max]; sqrt(g)/x
    // bounded over the top decade of the grid.
    double max_slope = 0.0;
    bool g_positive = true;
    double growth = 0.0;
    double prev_h = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double x = i * dx;
        const double hx = drift.h(x);
        max_slope = std::max(max_slope, (hx - prev_h) / dx);
        prev_h = hx;
        const double gx = diff.g(x);
        if (!(gx > 0.0)) g_positive = false;
        if (x >= 0.9 * x_max) growth = std::max(growth, std::sqrt(std::max(gx, 0.0)) / x);
    }
    rep.lipschitz_estimate = std::max(max_slope, 0.0);
    rep.a1 = g_positive && std::isfinite(rep.lipschitz_estimate) && std::isfinite(growth);

    // A2: concavity by second differences, then the sign pattern and the tail
    // integral of 1/(-h).
    bool concave = true;
    for (int i = 1; i < n; ++i) {
        const double x = i * dx;
        const double second = drift.h(x - dx) - 2.0 * drift.h(x) + drift.h(x + dx);
        if (second > 1e-9 * std::max(1.0, std::fabs(drift.h(x)))) concave = false;
    }
    // last sign change of h on the grid
    double x0 = 0.0;
    bool negative_beyond = true;
    for (int i = 1; i <= n; ++i) {
        const double x = i * dx;
        if (drift.h(x) > 0.0) x0 = x;
    }
    if (x0 > 0.0) {  // refine by bisection on [x0, x0+dx]
        double lo = x0, hi = std::min(x0 + dx, x_max);
        for (int it = 0; it < 60 && drift.h(hi) < 0.0; ++it) {
            const double mid = 0.5 * (lo + hi);
            (drift.h(mid) > 0.0 ? lo : hi) = mid;
        }
        x0 = 0.5 * (lo + hi);
    }
    rep.x0_estimate = x0;
    const double x1 = x0 + std::max(0.05 * std::max(x0, 1.0), 2.0 * dx);
    for (double x = x1; x <= x_max; x += dx)
        if (drift.h(x) >= 0.0) negative_beyond = false;

    double integral = 0.0;
    bool integral_ok = negative_beyond;
    if (negative_beyond) {
        const int m = 20000;
        const double step = (x_max - x1) / m;
        for (int i = 0; i <= m; ++i) {
            const double x = x1 + i * step;
            const double w = (i == 0 || i == m) ? 0.5 : 1.0;
            const double mh = -drift.h(x);
            if (!(mh > 0.0)) { integral_ok = false; break; }
            integral += w * step / mh;
        }
    }
    rep.integral_value = integral;

    // Tail beyond x_max: closed form per kind, otherwise a power-law
    // extrapolation flagged as grid evidence.
    double tail = std::numeric_limits<double>::quiet_NaN();
    bool tail_finite = false;
    switch (drift.kind) {
        case DriftKind::Logistic:
            if (drift.gamma > 0.0) {
                const double K = drift.capacity;
                tail = K > 0.0 ? std::log(x_max / (x_max - K)) / (drift.gamma * K)
                               : 1.0 / (drift.gamma * x_max);
                tail_finite = true;
            }
            break;
        case DriftKind::LinearGrowth:
            tail_finite = false;  // 1/(-cx) tail diverges for any c
            break;
        case DriftKind::Custom: {
            const double y1 = -drift.h(0.5 * x_max), y2 = -drift.h(x_max);
            if (y1 > 0.0 && y2 > 0.0) {
                const double p = std::log(y2 / y1) / std::log(2.0);
                if (p > 1.05) {  // superlinear growth of -h: tail converges
                    tail = x_max / (y2 * (p - 1.0));
                    tail_finite = true;
                    rep.notes += "custom drift: tail bound is a power-law extrapolation "
                                 "(grid evidence only); ";
                }
            }
            break;
        }
    }
    rep.tail_bound = tail;
    rep.a2 = concave && negative_beyond && integral_ok && tail_finite;
    rep.a3 = rep.a2;  // concave majorant of a concave h is h itself
    if (!concave) rep.notes += "h not concave on grid; ";
    if (!negative_beyond) rep.notes += "h not negative beyond x0 on grid; ";
    if (!tail_finite) rep.notes += "tail integral of 1/(-h) not certified finite; ";
    return rep;
}

}  // namespace reglab
