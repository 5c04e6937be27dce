#pragma once
// Counter-based RNG: Philox4x64-10 plus the distribution samplers used by the
// simulators. Every draw is a pure function of (seed, replicate, step, site,
// stream_class, draw_index), which is what makes replicate-parallel runs
// bit-reproducible and lets coupled pairs share noise exactly.

#include <cstdint>
#include <cmath>
#include <array>
#include <stdexcept>

namespace reglab::rng {

struct Philox4x64Key { std::uint64_t k0, k1; };

// One 4x64 block, 10 rounds, Random123-compatible constants.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               Philox4x64Key key) {
    constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
    auto mulhilo = [](std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        return static_cast<std::uint64_t>(p);
    };
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, hi1;
        const std::uint64_t lo0 = mulhilo(M0, ctr[0], hi0);
        const std::uint64_t lo1 = mulhilo(M1, ctr[2], hi1);
        ctr = {hi1 ^ ctr[1] ^ key.k0, lo1, hi0 ^ ctr[3] ^ key.k1, lo0};
        key.k0 += W0;
        key.k1 += W1;
    }
    return ctr;
}

// splitmix64 finalizer; used to derive sub-seeds (per grid point, per side of
// a duality run) from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(master ^ mix64(tag));
}

// Inverse normal CDF, Acklam's rational approximation (|error| < 5e-9 over
// (0,1)); plenty below Monte Carlo resolution and strictly monotone.
inline double normal_ppf(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_ppf: p outside (0,1)");
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Lane stream over philox blocks for one (seed, replicate, step, site, class)
// cell. Lanes are consumed in order; the block index lives in the low 56 bits
// of counter word 2, the stream class in the top 8.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t step,
           std::uint64_t site, std::uint8_t stream_class = 0)
        : key_{seed, replicate},
          base_{step, site, static_cast<std::uint64_t>(stream_class) << 56, 0},
          pos_(4) {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            buf_ = philox4x64(base_, key_);
            ++base_[2];  // block index; class bits are far above any real count
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform on the open interval (0,1): 53-bit mantissa, half-step offset.
    double u01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return normal_ppf(u01()); }

    double exponential(double mean) { return -mean * std::log(u01()); }

    // Poisson: Knuth product method below 10, Hormann's PTRS above.
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 10.0) {
            const double limit = std::exp(-lambda);
            double prod = 1.0;
            std::uint64_t k = 0;
            do {
                ++k;
                prod *= u01();
            } while (prod > limit);
            return k - 1;
        }
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = u01() - 0.5;
            const double v = u01();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                kf * loglam - lambda - std::lgamma(kf + 1.0))
                return static_cast<std::uint64_t>(kf);
        }
    }

    // Gamma(shape, 1) for shape >= 1 by Marsaglia-Tsang squeeze.
    double gamma(double shape) {
        if (shape < 1.0) throw std::domain_error("Stream::gamma: shape < 1 unsupported");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = u01();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    Philox4x64Key key_;
    std::array<std::uint64_t, 4> base_;
    std::array<std::uint64_t, 4> buf_{};
    int pos_;
};

}  // namespace reglab::rng
