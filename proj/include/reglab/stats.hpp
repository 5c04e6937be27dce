#pragma once
// Small Monte Carlo statistics helpers shared by the duality and analysis
// modules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace reglab {

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

// Sample mean with its standard error s/sqrt(n) (unbiased sample sd).
inline McEstimate mc_stats(const std::vector<double>& xs, std::uint64_t seed = 0) {
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("mc_stats: need at least 2 replicates");
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n)), n, seed};
}

// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace reglab
