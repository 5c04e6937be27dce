#pragma once
// Translation-invariant migration kernels. m(i,j) is the weight site i places
// on the mass at site j; the migration drift at i is alpha*(sum_j m(i,j)x_j -
// x_i). Kernels are built from an offset stencil and realized sparsely (CSR).

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "lattice.hpp"

namespace reglab {

struct Stencil {
    // offset -> weight; offsets are dim-length integer vectors
    std::vector<std::pair<std::vector<int>, double>> entries;
};

struct MigrationKernel {
    Lattice lattice;
    Stencil stencil;
    std::vector<int> row_ptr;   // size n_sites+1
    std::vector<int> col;
    std::vector<double> val;
    std::vector<double> row_sums;

    int n_sites() const { return lattice.n_sites(); }

    // inflow(i) = sum_j m(i,j) x(j)
    void apply(const Config& x, Config& out) const {
        const int n = static_cast<int>(row_ptr.size()) - 1;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            out[i] = s;
        }
    }

    double entry(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == j) return val[k];
        return 0.0;
    }
};

namespace detail {

inline void check_stencil(const Stencil& st, int dim) {
    if (st.entries.empty()) throw std::invalid_argument("build_kernel: empty stencil");
    double sum = 0.0;
    std::map<std::vector<int>, bool> seen;
    for (const auto& [off, w] : st.entries) {
        if (static_cast<int>(off.size()) != dim)
            throw std::invalid_argument("build_kernel: stencil offset dimension mismatch");
        if (!(w >= 0.0)) throw std::invalid_argument("build_kernel: negative stencil weight");
        if (seen[off]) throw std::invalid_argument("build_kernel: duplicate stencil offset");
        seen[off] = true;
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("build_kernel: stencil weights must sum to 1");
}

// Forward reachability from the origin over the stencil's support. On a
// torus the kernel is translation invariant, so full forward reach from one
// site is equivalent to irreducibility.
inline bool torus_irreducible(const Lattice& lat, const Stencil& st) {
    const int n = lat.n_sites();
    std::vector<char> seen(n, 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int i = q.front();
        q.pop_front();
        for (const auto& [off, w] : st.entries) {
            if (w <= 0.0) continue;
            const int j = lat.shift(i, off);
            if (j >= 0 && !seen[j]) {
                seen[j] = 1;
                ++count;
                q.push_back(j);
            }
        }
    }
    return count == n;
}

}  // namespace detail

inline MigrationKernel build_kernel(const Stencil& st, const Lattice& lat) {
    detail::check_stencil(st, lat.dim);
    const int n = lat.n_sites();
    MigrationKernel k;
    k.lattice = lat;
    k.stencil = st;
    k.row_ptr.assign(n + 1, 0);
    k.row_sums.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        k.row_ptr[i] = static_cast<int>(k.col.size());
        // merge offsets that wrap onto the same target (small tori)
        std::map<int, double> row;
        for (const auto& [off, w] : st.entries) {
            if (w <= 0.0) continue;
            const int j = lat.shift(i, off);
            if (j >= 0) row[j] += w;
        }
        for (const auto& [j, w] : row) {
            k.col.push_back(j);
            k.val.push_back(w);
            k.row_sums[i] += w;
        }
    }
    k.row_ptr[n] = static_cast<int>(k.col.size());
    if (lat.boundary == Boundary::Torus) {
        for (double rs : k.row_sums)
            if (std::fabs(rs - 1.0) > 1e-12)
                throw std::logic_error("build_kernel: torus row sum != 1");
        if (n > 1 && !detail::torus_irreducible(lat, st))
            throw std::invalid_argument("build_kernel: stencil support not irreducible on torus");
    }
    return k;
}

inline MigrationKernel transpose_kernel(const MigrationKernel& k) {
    const int n = k.n_sites();
    MigrationKernel t;
    t.lattice = k.lattice;
    for (const auto& [off, w] : k.stencil.entries) {
        auto neg = off;
        for (auto& v : neg) v = -v;
        t.stencil.entries.emplace_back(std::move(neg), w);
    }
    // transpose the realized matrix directly (authoritative for Truncate)
    std::vector<int> counts(n, 0);
    for (int i = 0; i < n; ++i)
        for (int kk = k.row_ptr[i]; kk < k.row_ptr[i + 1]; ++kk) ++counts[k.col[kk]];
    t.row_ptr.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) t.row_ptr[j + 1] = t.row_ptr[j] + counts[j];
    t.col.assign(k.col.size(), 0);
    t.val.assign(k.val.size(), 0.0);
    std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int i = 0; i < n; ++i)
        for (int kk = k.row_ptr[i]; kk < k.row_ptr[i + 1]; ++kk) {
            const int j = k.col[kk];
            t.col[next[j]] = i;
            t.val[next[j]] = k.val[kk];
            ++next[j];
        }
    // keep each row sorted by column so double transpose is bitwise identity
    t.row_sums.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        std::vector<std::pair<int, double>> row;
        for (int kk = t.row_ptr[j]; kk < t.row_ptr[j + 1]; ++kk)
            row.emplace_back(t.col[kk], t.val[kk]);
        std::sort(row.begin(), row.end());
        int kk = t.row_ptr[j];
        for (const auto& [cc, vv] : row) {
            t.col[kk] = cc;
            t.val[kk] = vv;
            t.row_sums[j] += vv;
            ++kk;
        }
    }
    return t;
}

}  // namespace reglab
