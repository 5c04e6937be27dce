#pragma once
// Post-processing reports: coupling-violation statistics, local-extinction
// trend detection, the upper-invariant-measure table, and positivity checks.
// Verdict thresholds are always multiples of sample standard errors.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "envelope.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "stats.hpp"

namespace reglab {

struct ViolationReport {
    double max_violation = 0.0;
    double q999_violation = 0.0;     // 99.9th percentile
    double fraction_positive = 0.0;  // share of site-time cells with violation > 0
    std::size_t cells = 0;
};

// Collect (X1 - X2)+ over all sites and record times of one coupled pair.
inline void append_violations(const PathRecord& a, const PathRecord& b,
                              std::vector<double>& out) {
    if (a.configurations.size() != b.configurations.size())
        throw std::invalid_argument("coupling_violation_report: record count mismatch");
    for (std::size_t k = 0; k < a.configurations.size(); ++k) {
        const auto& xa = a.configurations[k];
        const auto& xb = b.configurations[k];
        if (xa.size() != xb.size())
            throw std::invalid_argument("coupling_violation_report: shape mismatch");
        for (std::size_t i = 0; i < xa.size(); ++i) out.push_back(std::max(0.0, xa[i] - xb[i]));
    }
}

inline ViolationReport violation_stats(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("violation_stats: no cells");
    ViolationReport rep;
    rep.cells = v.size();
    std::size_t positive = 0;
    for (double x : v) positive += x > 0.0 ? 1 : 0;
    rep.fraction_positive = static_cast<double>(positive) / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    rep.max_violation = v.back();
    const std::size_t k =
        std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(0.999 * v.size())) - 1);
    rep.q999_violation = v[std::max<std::size_t>(k, 0)];
    return rep;
}

inline ViolationReport coupling_violation_report(const PathRecord& a, const PathRecord& b) {
    std::vector<double> v;
    append_violations(a, b, v);
    return violation_stats(std::move(v));
}

struct TrendReport {
    bool nondecreasing = false;  // within 2 SE step to step
    double terminal_value = 0.0;
    double terminal_se = 0.0;
    bool consistent_with_extinction = false;  // nondecreasing and terminal >= 0.95
};

// Series of MC estimates of E[exp(-X_t(0))] at increasing times.
inline TrendReport local_extinction_trend(const std::vector<double>& times,
                                          const std::vector<McEstimate>& estimates) {
    if (times.size() != estimates.size())
        throw std::invalid_argument("local_extinction_trend: times/estimates mismatch");
    if (times.size() < 3)
        throw std::invalid_argument("local_extinction_trend: need at least 3 time points");
    TrendReport rep;
    rep.nondecreasing = true;
    for (std::size_t k = 0; k + 1 < estimates.size(); ++k) {
        if (!(times[k + 1] > times[k]))
            throw std::invalid_argument("local_extinction_trend: times must be increasing");
        const double se = std::hypot(estimates[k].standard_error, estimates[k + 1].standard_error);
        if (estimates[k + 1].estimate < estimates[k].estimate - 2.0 * se) rep.nondecreasing = false;
    }
    rep.terminal_value = estimates.back().estimate;
    rep.terminal_se = estimates.back().standard_error;
    rep.consistent_with_extinction = rep.nondecreasing && rep.terminal_value >= 0.95;
    return rep;
}

struct UpperInvariantCell {
    double N = 0.0;
    double t = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double se = 0.0;
};

struct UpperInvariantReport {
    std::vector<UpperInvariantCell> table;  // row-major over (N, t)
    bool monotone_in_N = false;             // mean nondecreasing in N at fixed t (2 SE)
    bool monotone_in_t = false;             // mean nonincreasing in t at largest N (2 SE)
    bool envelope_ok = false;               // mean <= envelope(t) + 3 SE everywhere
    std::string violation;                  // first violating grid cell, if any
    double nu_bar_mean = 0.0;               // cell at largest N, largest t
    double nu_bar_variance = 0.0;
};

// samples[i][j] holds origin-marginal draws for N_grid[i] at t_grid[j].
inline UpperInvariantReport upper_invariant_estimate(
    const std::vector<double>& N_grid, const std::vector<double>& t_grid,
    const std::vector<std::vector<std::vector<double>>>& samples, const DriftSpec& drift) {
    if (N_grid.size() < 3 || t_grid.size() < 3)
        throw std::invalid_argument("upper_invariant_estimate: need >= 3 points per axis");
    if (samples.size() != N_grid.size())
        throw std::invalid_argument("upper_invariant_estimate: samples/N grid mismatch");

    UpperInvariantReport rep;
    std::vector<std::vector<McEstimate>> est(N_grid.size());
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        if (samples[i].size() != t_grid.size())
            throw std::invalid_argument("upper_invariant_estimate: samples/t grid mismatch");
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const auto s = mc_stats(samples[i][j]);
            double ss = 0.0;
            for (double v : samples[i][j]) ss += (v - s.estimate) * (v - s.estimate);
            const double var = ss / static_cast<double>(samples[i][j].size() - 1);
            est[i].push_back(s);
            rep.table.push_back({N_grid[i], t_grid[j], s.estimate, var, s.standard_error});
        }
    }

    auto cell_name = [&](std::size_t i, std::size_t j) {
        return "N=" + std::to_string(N_grid[i]) + ",t=" + std::to_string(t_grid[j]);
    };
    rep.monotone_in_N = true;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        for (std::size_t i = 0; i + 1 < N_grid.size(); ++i) {
            const double se = std::hypot(est[i][j].standard_error, est[i + 1][j].standard_error);
            if (est[i + 1][j].estimate < est[i][j].estimate - 2.0 * se) {
                rep.monotone_in_N = false;
                if (rep.violation.empty()) rep.violation = cell_name(i + 1, j);
            }
        }
    }
    rep.monotone_in_t = true;
    const std::size_t last = N_grid.size() - 1;
    for (std::size_t j = 0; j + 1 < t_grid.size(); ++j) {
        const double se = std::hypot(est[last][j].standard_error, est[last][j + 1].standard_error);
        if (est[last][j + 1].estimate > est[last][j].estimate + 2.0 * se) {
            rep.monotone_in_t = false;
            if (rep.violation.empty()) rep.violation = cell_name(last, j + 1);
        }
    }
    rep.envelope_ok = true;
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const double env = envelope_from_infinity(t_grid[j], drift);
            if (est[i][j].estimate > env + 3.0 * est[i][j].standard_error) {
                rep.envelope_ok = false;
                if (rep.violation.empty()) rep.violation = cell_name(i, j);
            }
        }
    }
    rep.nu_bar_mean = rep.table.back().mean;
    rep.nu_bar_variance = rep.table.back().variance;
    return rep;
}

struct PositivityResult {
    bool all_positive = false;
    double zero_site_fraction = 0.0;
};

inline PositivityResult positivity_check(const PathRecord& path, double t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("positivity_check: t0 must be > 0");
    std::optional<std::size_t> idx;
    for (std::size_t k = 0; k < path.times.size(); ++k)
        if (std::fabs(path.times[k] - t0) <= 1e-12) idx = k;
    if (!idx) throw std::invalid_argument("positivity_check: t0 not among record times");
    const auto& x = path.configurations[*idx];
    std::size_t zeros = 0;
    for (double v : x) zeros += v == 0.0 ? 1 : 0;
    return {zeros == 0, static_cast<double>(zeros) / static_cast<double>(x.size())};
}

}  // namespace reglab
