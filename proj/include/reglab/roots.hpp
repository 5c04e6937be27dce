#pragma once
// Bracketed scalar root finding: Brent's method plus a geometric bracket
// expander for monotone functions.

#include <cmath>
#include <stdexcept>

namespace reglab {

struct RootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class F>
double brent(F&& f, double a, double b, double tol = 1e-12, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw RootError("brent: endpoints do not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::fabs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw RootError("brent: iteration limit reached");
}

// Grows b geometrically until f changes sign on [a, b] or b exceeds b_max.
// Returns true when a bracket was found.
template <class F>
bool expand_bracket(F&& f, double a, double& b, double b_max, double factor = 2.0) {
    const double fa = f(a);
    while (b <= b_max) {
        if ((f(b) > 0.0) != (fa > 0.0) || f(b) == 0.0) return true;
        b *= factor;
    }
    return false;
}

}  // namespace reglab
