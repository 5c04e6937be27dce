#pragma once
// Stochastic-order test between lattice marginals and mean-field particles
// using a fixed menu of increasing concave test functions:
// {1 - e^{-lambda x}} for caller-chosen lambdas and {min(x, c)} for
// c in {K/2, K, 2K}.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stats.hpp"

namespace reglab {

struct OrderTestEntry {
    std::string test_function;
    double lhs_mean = 0.0;
    double rhs_mean = 0.0;
    double combined_se = 0.0;
    bool pass = false;  // lhs <= rhs + 3 * combined_se
};

struct OrderTestReport {
    std::vector<OrderTestEntry> entries;
    bool overall = false;
};

inline OrderTestReport icv_order_test(const std::vector<double>& lattice_marginals,
                                      const std::vector<double>& meanfield_samples,
                                      const std::vector<double>& lambdas, double capacity) {
    constexpr std::size_t kMinSamples = 1000;
    if (lattice_marginals.size() < kMinSamples || meanfield_samples.size() < kMinSamples)
        throw std::invalid_argument("icv_order_test: need at least 1000 samples per side");

    OrderTestReport rep;
    rep.overall = true;
    auto run = [&](const std::string& name, const std::function<double(double)>& f) {
        std::vector<double> l(lattice_marginals.size()), m(meanfield_samples.size());
        for (std::size_t i = 0; i < l.size(); ++i) l[i] = f(lattice_marginals[i]);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = f(meanfield_samples[i]);
        const auto ls = mc_stats(l), ms = mc_stats(m);
        OrderTestEntry e;
        e.test_function = name;
        e.lhs_mean = ls.estimate;
        e.rhs_mean = ms.estimate;
        e.combined_se = std::sqrt(ls.standard_error * ls.standard_error +
                                  ms.standard_error * ms.standard_error);
        e.pass = e.lhs_mean <= e.rhs_mean + 3.0 * e.combined_se;
        rep.overall = rep.overall && e.pass;
        rep.entries.push_back(std::move(e));
    };

    for (double lam : lambdas) {
        if (!(lam > 0.0)) throw std::invalid_argument("icv_order_test: lambdas must be > 0");
        run("1-exp(-" + std::to_string(lam) + "*x)",
            [lam](double x) { return 1.0 - std::exp(-lam * x); });
    }
    for (double c : {0.5 * capacity, capacity, 2.0 * capacity}) {
        if (!(c > 0.0)) throw std::invalid_argument("icv_order_test: capacity must be > 0");
        run("min(x," + std::to_string(c) + ")", [c](double x) { return std::min(x, c); });
    }
    return rep;
}

}  // namespace reglab
