#include <catch2/catch_amalgamated.hpp>
#include <reglab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace reglab;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Two-sided KS statistic against a continuous CDF.
double ks_stat(std::vector<double> xs, double (*cdf)(double)) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace

// Known-answer vectors checked against two independent oracles: the
// reference implementation's published test vectors (zero, all-ones and
// pi-digit inputs) and numpy.random.Philox with dtype-exact uint64 inputs
// (numpy advances counter word 0, little-endian with carry, before emitting
// each block, so numpy(counter=C) produces the block for C+1).
TEST_CASE("philox4x64-10 known answers") {
    using A = std::array<std::uint64_t, 4>;
    auto out = rng::philox4x64({0, 0, 0, 0}, {0, 0});
    CHECK(out == A{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL,
                   0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});

    const std::uint64_t m = 0xFFFFFFFFFFFFFFFFULL;
    out = rng::philox4x64({m, m, m, m}, {m, m});
    CHECK(out == A{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL,
                   0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});

    out = rng::philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                           0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                          {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
    CHECK(out == A{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL,
                   0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});

    out = rng::philox4x64({1, 2, 3, 4}, {5, 6});
    CHECK(out == A{0xa39b5519339fe354ULL, 0xaceb1228efc25196ULL,
                   0xa0a2e3c25aa5f4fcULL, 0x08d0cfa9332720dfULL});

    // Adjacent counter (word 0 bumped), same key.
    out = rng::philox4x64({2, 2, 3, 4}, {5, 6});
    CHECK(out == A{0x92ab6a0e75619263ULL, 0xd8ff75bdc6bf8f60ULL,
                   0x450e124938725640ULL, 0x94eb1a7cffd20cbbULL});
}

TEST_CASE("stream determinism and separation") {
    rng::Stream a(42, 7, 3, 11), b(42, 7, 3, 11);
    for (int i = 0; i < 32; ++i) REQUIRE(a.next_u64() == b.next_u64());

    rng::Stream c(42, 8, 3, 11);  // different replicate
    rng::Stream d(42, 7, 4, 11);  // different step
    rng::Stream e(42, 7, 3, 12);  // different site
    rng::Stream f(42, 7, 3, 11, 1);  // different class
    rng::Stream base(42, 7, 3, 11);
    const auto x = base.next_u64();
    CHECK(c.next_u64() != x);
    CHECK(d.next_u64() != x);
    CHECK(e.next_u64() != x);
    CHECK(f.next_u64() != x);
}

TEST_CASE("derive_seed separates tags") {
    const auto s1 = rng::derive_seed(123, 0);
    const auto s2 = rng::derive_seed(123, 1);
    const auto s3 = rng::derive_seed(124, 0);
    CHECK(s1 != s2);
    CHECK(s1 != s3);
    CHECK(rng::derive_seed(123, 0) == s1);
}

TEST_CASE("u01 range and mean") {
    rng::Stream s(1, 0, 0, 0);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.u01();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // SE of the mean is 1/sqrt(12 n) ~ 6.5e-4.
    CHECK(std::fabs(sum / n - 0.5) < 4e-3);
}

TEST_CASE("normal_ppf inverts the normal CDF") {
    // Round trip |Phi(ppf(p)) - p| stays at the approximation's stated error.
    for (double p : {1e-9, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1 - 1e-7}) {
        CHECK(std::fabs(normal_cdf(rng::normal_ppf(p)) - p) < 5e-9);
    }
    CHECK(rng::normal_ppf(0.5) == 0.0);
    CHECK(std::fabs(rng::normal_ppf(0.975) - 1.959964) < 1e-5);
    // 0.2 and 0.8 are not exact binary reflections about 0.5, so allow an ulp.
    CHECK(rng::normal_ppf(0.2) == Catch::Approx(-rng::normal_ppf(0.8)).epsilon(1e-14));
    CHECK(rng::normal_ppf(0.25) == -rng::normal_ppf(0.75));
    CHECK_THROWS_AS(rng::normal_ppf(0.0), std::domain_error);
    CHECK_THROWS_AS(rng::normal_ppf(1.0), std::domain_error);
}

TEST_CASE("normal sampler moments and KS") {
    rng::Stream s(7, 0, 0, 0);
    const int n = 200000;
    std::vector<double> xs(n);
    double m1 = 0, m2 = 0;
    for (auto& x : xs) {
        x = s.normal();
        m1 += x;
        m2 += x * x;
    }
    m1 /= n;
    m2 /= n;
    CHECK(std::fabs(m1) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(m2 - 1.0) < 0.02);
    CHECK(ks_stat(xs, normal_cdf) < 1.6 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("exponential sampler mean") {
    rng::Stream s(9, 0, 0, 0);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += s.exponential(2.5);
    CHECK(std::fabs(sum / n - 2.5) < 5.0 * 2.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("poisson sampler across both regimes") {
    for (double lambda : {0.5, 3.0, 9.9, 10.1, 47.3, 400.0}) {
        rng::Stream s(11, static_cast<std::uint64_t>(lambda * 100), 0, 0);
        const int n = 100000;
        double m1 = 0, m2 = 0;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(s.poisson(lambda));
            m1 += k;
            m2 += k * k;
        }
        m1 /= n;
        m2 = m2 / n - m1 * m1;
        const double se_mean = std::sqrt(lambda / n);
        CHECK(std::fabs(m1 - lambda) < 5.0 * se_mean);
        CHECK(std::fabs(m2 / lambda - 1.0) < 0.05);
    }

    // Point probabilities at lambda = 3 against the closed-form pmf.
    rng::Stream s(13, 0, 0, 0);
    const int n = 200000;
    std::array<int, 10> counts{};
    for (int i = 0; i < n; ++i) {
        const auto k = s.poisson(3.0);
        if (k < counts.size()) ++counts[k];
    }
    for (int k = 0; k < 8; ++k) {
        const double p = std::exp(-3.0 + k * std::log(3.0) - std::lgamma(k + 1.0));
        const double se = std::sqrt(p * (1 - p) / n);
        CHECK(std::fabs(static_cast<double>(counts[k]) / n - p) < 5.0 * se);
    }
}

TEST_CASE("gamma sampler mean and variance") {
    for (double shape : {1.0, 2.5, 200.0}) {
        rng::Stream s(17, static_cast<std::uint64_t>(shape * 10), 0, 0);
        const int n = 100000;
        double m1 = 0, m2 = 0;
        for (int i = 0; i < n; ++i) {
            const double g = s.gamma(shape);
            REQUIRE(g > 0.0);
            m1 += g;
            m2 += g * g;
        }
        m1 /= n;
        m2 = m2 / n - m1 * m1;
        CHECK(std::fabs(m1 - shape) < 5.0 * std::sqrt(shape / n));
        CHECK(std::fabs(m2 / shape - 1.0) < 0.06);
    }
    rng::Stream s(17, 0, 0, 0);
    CHECK_THROWS_AS(s.gamma(0.5), std::domain_error);
}
