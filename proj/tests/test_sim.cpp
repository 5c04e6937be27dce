#include <catch2/catch_amalgamated.hpp>
#include <reglab/finite_mass.hpp>
#include <reglab/meanfield.hpp>
#include <reglab/sim.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace reglab;

namespace {

ModelParams mk(double a, double b, double g, double k) {
    ModelParams p;
    p.alpha = a;
    p.beta = b;
    p.gamma = g;
    p.capacity = k;
    return p;
}

MigrationKernel single_site_kernel() {
    Stencil st;
    st.entries = {{{0}, 1.0}};
    return build_kernel(st, Lattice(1, {1}, Boundary::Torus));
}

MigrationKernel walk_kernel_1d(int sides, Boundary b) {
    Stencil st;
    st.entries = {{{-1}, 0.5}, {{1}, 0.5}};
    return build_kernel(st, Lattice(1, {sides}, b));
}

double logistic_exact(double x0, double gamma, double K, double t) {
    const double e = std::exp(gamma * K * t);
    return K * x0 * e / (K + x0 * (e - 1.0));
}

SimConfig cfg_at(double dt, double t_end, std::vector<double> record, std::uint64_t seed,
                 std::uint64_t rep, Scheme scheme = Scheme::FullTruncationEM) {
    SimConfig c;
    c.dt = dt;
    c.t_end = t_end;
    c.record_times = std::move(record);
    c.scheme = scheme;
    c.seed = seed;
    c.replicate_index = rep;
    return c;
}

}  // namespace

TEST_CASE("lattice run from zero stays zero") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(8, Boundary::Torus);
    auto rec = simulate_lattice(Config(8, 0.0), p, k, drift_from(p), diffusion_from(p),
                                cfg_at(1e-3, 1.0, {0.0, 0.5, 1.0}, 4, 0));
    REQUIRE(rec.times.size() == 3);
    REQUIRE(rec.absorbed_at.has_value());
    CHECK(*rec.absorbed_at == 0.0);
    for (const auto& c : rec.configurations)
        for (double v : c) CHECK(v == 0.0);
}

TEST_CASE("critical Feller lattice mean is conserved and variance matches the exact sampler") {
    // gamma = 0 kills the drift; a single site with identity kernel is a bare
    // Feller diffusion whose exact transition is available as the oracle.
    auto p = mk(1, 1, 0, 0);
    auto k = single_site_kernel();
    auto drift = drift_from(p);
    auto diff = diffusion_from(p);
    const int n = 20000;
    const double T = 1.0;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < n; ++r) {
        auto rec = simulate_lattice({1.0}, p, k, drift, diff,
                                    cfg_at(1e-3, T, {T}, 21, static_cast<std::uint64_t>(r)));
        const double x = rec.configurations.back()[0];
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double se_mean = std::sqrt(2.0 * T / n);  // Var(X_T) = 2*beta*x0*T = 2
    CHECK(std::fabs(mean - 1.0) < 4.0 * se_mean);

    // oracle: one exact transition over the whole horizon
    double osum = 0.0, osumsq = 0.0;
    for (int r = 0; r < n; ++r) {
        rng::Stream s(22, static_cast<std::uint64_t>(r), 0, 0);
        const double x = feller_exact_transition(1.0, 1.0, T, s);
        osum += x;
        osumsq += x * x;
    }
    const double ovar = osumsq / n - (osum / n) * (osum / n);
    CHECK(var == Catch::Approx(2.0).epsilon(0.10));
    CHECK(var == Catch::Approx(ovar).epsilon(0.12));
}

TEST_CASE("lattice paths are bitwise deterministic per (seed, replicate)") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(6, Boundary::Torus);
    auto c = cfg_at(1e-3, 0.5, {0.25, 0.5}, 77, 3);
    auto r1 = simulate_lattice(Config(6, 1.0), p, k, drift_from(p), diffusion_from(p), c);
    auto r2 = simulate_lattice(Config(6, 1.0), p, k, drift_from(p), diffusion_from(p), c);
    REQUIRE(r1.configurations.size() == r2.configurations.size());
    for (std::size_t i = 0; i < r1.configurations.size(); ++i)
        CHECK(r1.configurations[i] == r2.configurations[i]);

    c.replicate_index = 4;
    auto r3 = simulate_lattice(Config(6, 1.0), p, k, drift_from(p), diffusion_from(p), c);
    CHECK(r3.configurations.back() != r1.configurations.back());
}

TEST_CASE("blow-up guard trips on exponential growth") {
    auto p = mk(0, 1, 0, 0);
    auto k = single_site_kernel();
    auto drift = DriftSpec::linear_growth(3.0);
    auto rec = simulate_lattice({2e5}, p, k, drift, diffusion_from(p),
                                cfg_at(1e-3, 10.0, {10.0}, 5, 0));
    REQUIRE(rec.exceeded_at.has_value());
    CHECK(*rec.exceeded_at < 10.0);
}

TEST_CASE("NaN from a pathological drift is reported with step and site") {
    auto p = mk(0, 1, 0, 0);
    auto k = single_site_kernel();
    auto bad = DriftSpec::custom(
        [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; });
    CHECK_THROWS_WITH(
        simulate_lattice({1.0}, p, k, bad, diffusion_from(p), cfg_at(1e-3, 1.0, {1.0}, 5, 0)),
        Catch::Matchers::ContainsSubstring("NaN at step"));
}

TEST_CASE("absorbed lattice runs record exact zeros afterwards") {
    auto p = mk(0, 1, 0, 0);  // critical Feller dies fast from small mass
    auto k = single_site_kernel();
    bool saw_absorption = false;
    for (std::uint64_t r = 0; r < 20 && !saw_absorption; ++r) {
        auto rec = simulate_lattice({0.02}, p, k, drift_from(p), diffusion_from(p),
                                    cfg_at(1e-3, 5.0, {1.0, 2.0, 5.0}, 31, r));
        if (!rec.absorbed_at) continue;
        saw_absorption = true;
        for (std::size_t i = 0; i < rec.times.size(); ++i)
            if (rec.times[i] >= *rec.absorbed_at)
                for (double v : rec.configurations[i]) CHECK(v == 0.0);
    }
    CHECK(saw_absorption);
}

TEST_CASE("coupled pair with identical inputs is bitwise identical") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(4, Boundary::Torus);
    auto [r1, r2] = simulate_coupled_pair(Config(4, 1.0), Config(4, 1.0), p, k, drift_from(p),
                                          drift_from(p), diffusion_from(p),
                                          cfg_at(1e-3, 1.0, {0.5, 1.0}, 9, 0));
    REQUIRE(r1.configurations.size() == r2.configurations.size());
    for (std::size_t i = 0; i < r1.configurations.size(); ++i)
        CHECK(r1.configurations[i] == r2.configurations[i]);
}

TEST_CASE("ordered initial states stay ordered up to scheme artifacts") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(4, Boundary::Torus);
    double worst = 0.0;
    for (std::uint64_t r = 0; r < 30; ++r) {
        auto [r1, r2] = simulate_coupled_pair(Config(4, 0.5), Config(4, 1.0), p, k, drift_from(p),
                                              drift_from(p), diffusion_from(p),
                                              cfg_at(1e-3, 1.0, {0.25, 0.5, 0.75, 1.0}, 10, r));
        for (std::size_t i = 0; i < r1.configurations.size(); ++i)
            for (std::size_t j = 0; j < r1.configurations[i].size(); ++j)
                worst = std::max(worst, r1.configurations[i][j] - r2.configurations[i][j]);
    }
    CHECK(worst <= 1e-2);
}

TEST_CASE("ordered drifts stay ordered up to scheme artifacts") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(4, Boundary::Torus);
    auto d1 = DriftSpec::logistic(1.0, 0.5);
    auto d2 = DriftSpec::logistic(1.0, 1.0);
    double worst = 0.0;
    for (std::uint64_t r = 0; r < 30; ++r) {
        auto [r1, r2] =
            simulate_coupled_pair(Config(4, 0.8), Config(4, 0.8), p, k, d1, d2, diffusion_from(p),
                                  cfg_at(1e-3, 1.0, {0.5, 1.0}, 11, r));
        for (std::size_t i = 0; i < r1.configurations.size(); ++i)
            for (std::size_t j = 0; j < r1.configurations[i].size(); ++j)
                worst = std::max(worst, r1.configurations[i][j] - r2.configurations[i][j]);
    }
    CHECK(worst <= 1e-2);
}

TEST_CASE("coupled pair rejects mismatched shapes") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(4, Boundary::Torus);
    CHECK_THROWS_AS(simulate_coupled_pair(Config(4, 1.0), Config(5, 1.0), p, k, drift_from(p),
                                          drift_from(p), diffusion_from(p),
                                          cfg_at(1e-3, 1.0, {1.0}, 9, 0)),
                    std::invalid_argument);
}

TEST_CASE("immigration diffusion: zero immigration from zero stays zero") {
    auto p = mk(1, 1, 1, 1);
    auto rec = simulate_immigration_diffusion(0.0, 0.0, p, drift_from(p), diffusion_from(p),
                                              cfg_at(1e-3, 1.0, {0.0, 1.0}, 6, 0));
    for (const auto& c : rec.configurations) CHECK(c[0] == 0.0);
    REQUIRE(rec.absorbed_at.has_value());
}

TEST_CASE("noise-free immigration relaxes along the linear ODE") {
    auto p = mk(1, 0, 0, 0);  // beta = 0, h = 0
    const double theta = 2.0, v0 = 0.5, T = 3.0;
    auto rec = simulate_immigration_diffusion(theta, v0, p, drift_from(p), diffusion_from(p),
                                              cfg_at(1e-3, T, {T}, 6, 0));
    const double exact = theta + (v0 - theta) * std::exp(-T);
    CHECK(std::fabs(rec.configurations.back()[0] - exact) / exact < 1e-3);
}

TEST_CASE("mean-field requires at least two particles") {
    auto p = mk(1, 1, 1, 1);
    CHECK_THROWS_AS(
        simulate_meanfield_particles(1, [](rng::Stream&) { return 1.0; }, p, drift_from(p),
                                     diffusion_from(p), cfg_at(1e-3, 1.0, {1.0}, 6, 0)),
        std::invalid_argument);
}

TEST_CASE("mean-field ensemble of zeros stays zero") {
    auto p = mk(1, 1, 1, 1);
    auto ens = simulate_meanfield_particles(16, [](rng::Stream&) { return 0.0; }, p, drift_from(p),
                                            diffusion_from(p), cfg_at(1e-3, 1.0, {0.5, 1.0}, 6, 0));
    for (double m : ens.empirical_mean) CHECK(m == 0.0);
    for (double v : ens.particles) CHECK(v == 0.0);
}

TEST_CASE("noise-free mean-field particles follow the logistic closed form") {
    auto p = mk(1, 0, 1, 1);  // beta = 0: deterministic; mean term cancels
    const double x0 = 0.2, T = 2.0;
    auto ens = simulate_meanfield_particles(8, [&](rng::Stream&) { return x0; }, p, drift_from(p),
                                            diffusion_from(p), cfg_at(1e-3, T, {T}, 6, 0));
    const double exact = logistic_exact(x0, 1.0, 1.0, T);
    CHECK(ens.empirical_mean.back() == Catch::Approx(exact).epsilon(1e-2));
    for (double v : ens.particles) CHECK(v == Catch::Approx(ens.particles[0]).margin(0.0));
}

TEST_CASE("mean-field runs are deterministic per seed") {
    auto p = mk(1, 1, 1, 1);
    auto sampler = [](rng::Stream& s) { return s.u01(); };
    auto c = cfg_at(1e-3, 0.5, {0.5}, 42, 0);
    auto e1 = simulate_meanfield_particles(32, sampler, p, drift_from(p), diffusion_from(p), c);
    auto e2 = simulate_meanfield_particles(32, sampler, p, drift_from(p), diffusion_from(p), c);
    CHECK(e1.particles == e2.particles);
    CHECK(e1.empirical_mean == e2.empirical_mean);
}

TEST_CASE("finite-mass run with zero initial mass is absorbed at time zero") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(9, Boundary::Truncate);
    auto rec = simulate_finite_mass(Config(9, 0.0), p, k, drift_from(p), diffusion_from(p),
                                    cfg_at(1e-3, 1.0, {1.0}, 7, 0));
    REQUIRE(rec.absorbed_at.has_value());
    CHECK(*rec.absorbed_at == 0.0);
}

TEST_CASE("finite-mass requires a Truncate box") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(9, Boundary::Torus);
    CHECK_THROWS_AS(simulate_finite_mass(Config(9, 0.1), p, k, drift_from(p), diffusion_from(p),
                                         cfg_at(1e-3, 1.0, {1.0}, 7, 0)),
                    std::invalid_argument);
}

TEST_CASE("supercritical Feller absorption frequency matches the scale-function value") {
    // LinearGrowth(c) with Feller noise: extinction probability exp(-c*x0/beta).
    auto p = mk(0, 1, 0, 0);
    auto drift = DriftSpec::linear_growth(1.0);
    Stencil st;
    st.entries = {{{0}, 1.0}};
    auto k = build_kernel(st, Lattice(1, {1}, Boundary::Truncate));
    const int n = 400;
    int absorbed = 0;
    for (int r = 0; r < n; ++r) {
        auto rec = simulate_finite_mass({1.0}, p, k, drift, diffusion_from(p),
                                        cfg_at(1e-3, 50.0, {}, 8, static_cast<std::uint64_t>(r)),
                                        BoxGrowthPolicy{});
        if (rec.absorbed_at) {
            ++absorbed;
            CHECK(*rec.absorbed_at <= 50.0);
        }
    }
    const double freq = static_cast<double>(absorbed) / n;
    const double target = std::exp(-1.0);
    const double se = std::sqrt(target * (1.0 - target) / n);
    CHECK(std::fabs(freq - target) < 3.0 * se);
}

TEST_CASE("finite-mass box grows under supercritical spread") {
    auto p = mk(1, 1, 1, 2.0);  // K = 2 > K-bar: survival has positive probability
    auto k = walk_kernel_1d(9, Boundary::Truncate);
    Config x0(9, 0.0);
    x0[4] = 1.0;
    bool grew = false;
    for (std::uint64_t r = 0; r < 10 && !grew; ++r) {
        auto rec = simulate_finite_mass(x0, p, k, drift_from(p), diffusion_from(p),
                                        cfg_at(1e-3, 10.0, {10.0}, 12, r));
        if (rec.absorbed_at) continue;
        REQUIRE(rec.boxes.size() == rec.configurations.size());
        if (!rec.boxes.empty() && rec.boxes.back().sides[0] > 9) grew = true;
    }
    CHECK(grew);
}

TEST_CASE("finite-mass memory budget sets exceeded_at") {
    auto p = mk(1, 1, 1, 2.0);
    auto k = walk_kernel_1d(9, Boundary::Truncate);
    Config x0(9, 0.0);
    x0[4] = 1.0;
    BoxGrowthPolicy tight;
    tight.max_sites = 12;
    bool exceeded = false;
    for (std::uint64_t r = 0; r < 10 && !exceeded; ++r) {
        auto rec = simulate_finite_mass(x0, p, k, drift_from(p), diffusion_from(p),
                                        cfg_at(1e-3, 10.0, {}, 13, r), tight);
        exceeded = rec.exceeded_at.has_value();
    }
    CHECK(exceeded);
}

TEST_CASE("packed site keys separate distinct coordinates") {
    CHECK(detail::pack_site_key({0}) != detail::pack_site_key({1}));
    CHECK(detail::pack_site_key({-3}) != detail::pack_site_key({3}));
    CHECK(detail::pack_site_key({1, 2}) != detail::pack_site_key({2, 1}));
    CHECK(detail::pack_site_key({0, 0, 0}) != detail::pack_site_key({0, 0, 1}));
}

TEST_CASE("maximal process run starts from the constant configuration") {
    auto p = mk(1, 1, 1, 1);
    auto k = walk_kernel_1d(4, Boundary::Torus);
    auto rec = maximal_process_run(2.0, p, k, drift_from(p), diffusion_from(p),
                                   cfg_at(1e-3, 0.5, {0.0, 0.5}, 14, 0));
    REQUIRE(!rec.configurations.empty());
    for (double v : rec.configurations.front()) CHECK(v == 2.0);
    CHECK_THROWS_AS(maximal_process_run(0.0, p, k, drift_from(p), diffusion_from(p),
                                        cfg_at(1e-3, 0.5, {0.5}, 14, 0)),
                    std::invalid_argument);
}

TEST_CASE("euler and split schemes agree on the logistic benchmark mean") {
    auto p = mk(0, 1, 1, 1);
    auto k = single_site_kernel();
    auto drift = drift_from(p);
    auto diff = diffusion_from(p);
    const int n = 30000;
    const double T = 1.0;
    double s_em = 0.0, ss_em = 0.0, s_sp = 0.0, ss_sp = 0.0;
    for (int r = 0; r < n; ++r) {
        auto re = simulate_lattice({1.0}, p, k, drift, diff,
                                   cfg_at(1e-3, T, {T}, 15, static_cast<std::uint64_t>(r)));
        auto rs = simulate_lattice({1.0}, p, k, drift, diff,
                                   cfg_at(1e-3, T, {T}, 16, static_cast<std::uint64_t>(r),
                                          Scheme::SplitExactFeller));
        const double a = re.configurations.back()[0], b = rs.configurations.back()[0];
        s_em += a;
        ss_em += a * a;
        s_sp += b;
        ss_sp += b * b;
    }
    const double m_em = s_em / n, m_sp = s_sp / n;
    const double v_em = ss_em / n - m_em * m_em, v_sp = ss_sp / n - m_sp * m_sp;
    const double comb = std::sqrt(v_em / n + v_sp / n);
    CHECK(std::fabs(m_em - m_sp) < 4.0 * comb);
}
