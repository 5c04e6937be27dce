#pragma once
// Finite boxes of Z^d with periodic (Torus) or absorbing-edge (Truncate)
// boundary. Site indices are row-major over the box, origin at coordinate 0.

#include <numeric>
#include <stdexcept>
#include <vector>

namespace reglab {

using Config = std::vector<double>;  // nonnegative mass per site

enum class Boundary { Torus, Truncate };

struct Lattice {
    int dim = 1;
    std::vector<int> sides;
    Boundary boundary = Boundary::Torus;

    Lattice() = default;
    Lattice(int d, std::vector<int> s, Boundary b) : dim(d), sides(std::move(s)), boundary(b) {
        if (dim < 1) throw std::invalid_argument("Lattice: dim must be >= 1");
        if (static_cast<int>(sides.size()) != dim)
            throw std::invalid_argument("Lattice: sides must list one extent per axis");
        for (int s_i : sides)
            if (s_i < 1) throw std::invalid_argument("Lattice: side extents must be >= 1");
    }

    int n_sites() const {
        long long n = 1;
        for (int s : sides) n *= s;
        if (n > (1LL << 31) - 1) throw std::invalid_argument("Lattice: too many sites");
        return static_cast<int>(n);
    }

    std::vector<int> coords_of(int idx) const {
        std::vector<int> c(dim);
        for (int a = dim - 1; a >= 0; --a) {
            c[a] = idx % sides[a];
            idx /= sides[a];
        }
        return c;
    }

    int index_of(const std::vector<int>& c) const {
        int idx = 0;
        for (int a = 0; a < dim; ++a) idx = idx * sides[a] + c[a];
        return idx;
    }

    // Site reached from idx by integer offset, or -1 when the move leaves a
    // Truncate box. Torus wraps coordinatewise.
    int shift(int idx, const std::vector<int>& offset) const {
        auto c = coords_of(idx);
        for (int a = 0; a < dim; ++a) {
            int v = c[a] + offset[a];
            if (boundary == Boundary::Torus) {
                v %= sides[a];
                if (v < 0) v += sides[a];
            } else if (v < 0 || v >= sides[a]) {
                return -1;
            }
            c[a] = v;
        }
        return index_of(c);
    }
};

}  // namespace reglab
