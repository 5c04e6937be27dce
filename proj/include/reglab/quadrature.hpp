#pragma once
// Globally adaptive Gauss-Kronrod (G7,K15) quadrature with the usual QUADPACK
// error scaling, plus a rational map for semi-infinite domains. Integrands
// with super-polynomial decay underflow to 0 well before the mapped endpoint,
// so no explicit tail cut is needed.

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace reglab {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

namespace detail {

// K15 nodes/weights and embedded G7 weights.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
    double value, error;
};

template <class F>
PanelEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::fabs(resk);
    double fv[15];
    fv[7] = fc;
    for (int j = 0; j < 7; ++j) {
        const double absc = hl * kXgk[j];
        const double f1 = f(c - absc), f2 = f(c + absc);
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::fabs(fv[j] - mean) + std::fabs(fv[14 - j] - mean));
    resasc *= hl;
    double err = std::fabs((resk - resg) * hl);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {resk * hl, err};
}

}  // namespace detail

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    struct Seg {
        double a, b, value, error;
        bool operator<(const Seg& o) const { return error < o.error; }
    };
    std::priority_queue<Seg> heap;
    auto first = detail::gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value, toterr = first.error;
    QuadResult res;
    res.subdivisions = 1;
    while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)) &&
           res.subdivisions < spec.max_subdivisions) {
        const Seg worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++res.subdivisions;
    }
    res.value = total;
    res.error = toterr;
    res.converged = toterr <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
    return res;
}

// Integral over (a, infinity) via y = a + u/(1-u).
template <class F>
QuadResult integrate_semi_infinite(F&& f, double a, const QuadratureSpec& spec = {}) {
    auto mapped = [&f, a](double u) {
        const double om = 1.0 - u;
        const double y = a + u / om;
        const double fy = f(y);
        return fy == 0.0 ? 0.0 : fy / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, spec);
}

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Convenience wrapper that insists on convergence.
template <class F>
QuadResult integrate_or_throw(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    auto r = integrate(std::forward<F>(f), a, b, spec);
    if (!r.converged)
        throw QuadratureError("quadrature: subdivision budget exhausted, error " +
                              std::to_string(r.error));
    return r;
}

}  // namespace reglab
