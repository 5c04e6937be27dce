#pragma once
// Summable weight profiles sigma and the constant c_ls with
// sum_i sigma_i m(i,j) <= c_ls * sigma_j for every column j. On a finite
// lattice any positive profile works; c_ls is a diagnostic, not a constraint.

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "kernel.hpp"

namespace reglab {

struct SigmaWeights {
    std::vector<double> sigma;
    double c_ls = 1.0;
};

// sigma_i = exp(-decay_rate * d(i)) with d the graph distance from the origin
// in the symmetrized support of the kernel. decay_rate = 0 gives the uniform
// profile. Sites the support graph never reaches get distance n_sites, which
// keeps sigma strictly positive.
inline SigmaWeights liggett_spitzer_weights(const MigrationKernel& k, double decay_rate) {
    if (decay_rate < 0.0)
        throw std::invalid_argument("liggett_spitzer_weights: decay_rate must be >= 0");
    const int n = k.n_sites();
    std::vector<int> dist(n, -1);
    std::deque<int> q{0};
    dist[0] = 0;
    // symmetrize: i~j when m(i,j)>0 or m(j,i)>0
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int kk = k.row_ptr[i]; kk < k.row_ptr[i + 1]; ++kk) {
            const int j = k.col[kk];
            if (j == i) continue;
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    while (!q.empty()) {
        const int i = q.front();
        q.pop_front();
        for (int j : adj[i])
            if (dist[j] < 0) {
                dist[j] = dist[i] + 1;
                q.push_back(j);
            }
    }
    SigmaWeights w;
    w.sigma.resize(n);
    for (int i = 0; i < n; ++i) {
        const int d = dist[i] < 0 ? n : dist[i];
        w.sigma[i] = std::exp(-decay_rate * d);
    }
    // c_ls = max over columns of (sum_i sigma_i m(i,j)) / sigma_j
    std::vector<double> colsum(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int kk = k.row_ptr[i]; kk < k.row_ptr[i + 1]; ++kk)
            colsum[k.col[kk]] += w.sigma[i] * k.val[kk];
    w.c_ls = 0.0;
    for (int j = 0; j < n; ++j) w.c_ls = std::max(w.c_ls, colsum[j] / w.sigma[j]);
    return w;
}

inline double sigma_norm(const Config& x, const SigmaWeights& w) {
    if (x.size() != w.sigma.size())
        throw std::invalid_argument("sigma_norm: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w.sigma[i] * std::fabs(x[i]);
    return s;
}

}  // namespace reglab
