#pragma once
// Entrance envelope from infinity: y*(t) solves t = int_{y*}^inf 1/(-hhat)
// with hhat the concave majorant of the drift (the drift itself when already
// concave). Logistic drift has the closed form K/(1 - e^{-gamma*K*t}); K = 0
// degenerates to 1/(gamma*t). E X_t(i) started from "infinity" is bounded by
// y*(t).

#include <cmath>
#include <stdexcept>

#include "model.hpp"
#include "quadrature.hpp"
#include "roots.hpp"
#include "stationary.hpp"

namespace reglab {

inline double envelope_from_infinity(double t, const DriftSpec& drift) {
    if (!(t > 0.0)) throw std::domain_error("envelope_from_infinity: t must be > 0");
    if (drift.kind == DriftKind::Logistic) {
        const double g = drift.gamma, K = drift.capacity;
        if (!(g > 0.0)) throw std::invalid_argument("envelope_from_infinity: gamma must be > 0");
        if (K == 0.0) return 1.0 / (g * t);
        const double e = std::expm1(-g * K * t);  // = e^{-gKt} - 1
        return -K / e;
    }
    if (!drift.concave)
        throw std::invalid_argument("envelope_from_infinity: drift must be concave (or supply a majorant)");
    const double x0 = drift_last_zero(drift);
    // T(y) = int_y^inf 1/(-h), strictly decreasing in y on (x0, inf)
    auto big_t = [&](double y) {
        auto r = integrate_semi_infinite(
            [&](double z) {
                const double mh = -drift.h(z);
                return mh > 0.0 ? 1.0 / mh : 0.0;
            },
            y, {1e-11, 1e-9, 4000});
        if (!r.converged)
            throw QuadratureError("envelope_from_infinity: entrance integral diverges (A3 fails)");
        return r.value;
    };
    // bracket: walk right until T < t, left toward x0 until T > t
    double hi = std::max(2.0 * std::max(x0, 1.0), 1.0);
    while (big_t(hi) > t) {
        hi *= 2.0;
        if (hi > 1e12) throw RootError("envelope_from_infinity: no finite envelope found");
    }
    double lo = hi;
    while (big_t(lo) < t) {
        lo = x0 + 0.5 * (lo - x0);
        if (lo - x0 < 1e-12) break;
    }
    return brent([&](double y) { return big_t(y) - t; }, lo, hi, 1e-9);
}

}  // namespace reglab
