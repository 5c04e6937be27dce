// reglab: simulation and numerical-analysis toolkit for locally regulated
// branching diffusions on lattice boxes. One binary, subcommand style; model
// structure lives in an INI model file, run shape in flags. Every file output
// is accompanied by a JSON run manifest that embeds the model text, so a
// manifest alone reproduces the run bit-exactly (`reglab rerun`).
//
// Exit codes: 0 success, 2 usage/model error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <reglab/criteria.hpp>
#include <reglab/csv.hpp>
#include <reglab/fixed_point.hpp>
#include <reglab/stationary.hpp>
#include <reglab/duality.hpp>
#include <reglab/finite_mass.hpp>
#include <reglab/manifest.hpp>
#include <reglab/meanfield.hpp>
#include <reglab/model_file.hpp>
#include <reglab/pool.hpp>
#include <reglab/reports.hpp>
#include <reglab/sim.hpp>
#include <reglab/stats.hpp>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;
using namespace reglab;

namespace {

// numerical-failure outcomes that are data, not misuse (exit 3)
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            throw std::invalid_argument("bad number '" + tok + "' in " + what);
        }
    }
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

// Configuration spec: either a single constant ("1.5" -> every site 1.5) or
// comma-separated value@site entries ("2@0,0.5@3" -> zeros elsewhere).
Config parse_config_spec(const std::string& spec, std::size_t n_sites, const std::string& what) {
    const std::string s = detail::trim(spec);
    if (s.find('@') == std::string::npos) {
        double v = 0.0;
        try {
            std::size_t pos = 0;
            v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            throw std::invalid_argument(what + ": bad constant '" + s + "'");
        }
        if (!(v >= 0.0)) throw std::invalid_argument(what + ": values must be >= 0");
        return Config(n_sites, v);
    }
    Config x(n_sites, 0.0);
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        const auto at = tok.find('@');
        if (at == std::string::npos || at == 0 || at + 1 == tok.size())
            throw std::invalid_argument(what + ": expected value@site, got '" + tok + "'");
        double v = 0.0;
        long idx = -1;
        try {
            std::size_t pos = 0;
            v = std::stod(tok.substr(0, at), &pos);
            if (pos != at) throw std::invalid_argument("trailing");
            pos = 0;
            idx = std::stol(tok.substr(at + 1), &pos);
            if (pos != tok.size() - at - 1) throw std::invalid_argument("trailing");
        } catch (...) {
            throw std::invalid_argument(what + ": bad entry '" + tok + "'");
        }
        if (!(v >= 0.0)) throw std::invalid_argument(what + ": values must be >= 0");
        if (idx < 0 || idx >= static_cast<long>(n_sites))
            throw std::invalid_argument(what + ": site index " + std::to_string(idx) +
                                        " outside [0, " + std::to_string(n_sites) + ")");
        x[static_cast<std::size_t>(idx)] = v;
    }
    return x;
}

std::vector<double> default_record(double t_end, bool include_zero) {
    std::vector<double> out;
    for (int k = include_zero ? 0 : 1; k <= 10; ++k) out.push_back(t_end * k / 10.0);
    return out;
}

SimConfig sim_config_from(const json& p) {
    SimConfig cfg;
    cfg.dt = p.at("dt").get<double>();
    cfg.t_end = p.at("t_end").get<double>();
    cfg.record_times = p.at("record").get<std::vector<double>>();
    cfg.scheme = parse_scheme(p.at("scheme").get<std::string>());
    cfg.seed = p.at("seed").get<std::uint64_t>();
    return cfg;
}

json mc_json(const McEstimate& e) {
    return {{"estimate", e.estimate},
            {"standard_error", e.standard_error},
            {"replicates", e.replicates}};
}

const MigrationKernel require_kernel(const ModelFile& mf) {
    if (!mf.lattice || !mf.stencil)
        throw std::invalid_argument("model file must define [lattice] and [kernel] for this command");
    return build_kernel(*mf.stencil, *mf.lattice);
}

void write_summary_csv(const std::string& path, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& by_time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    write_csv_row(out, {"time", "mean", "var", "se"});
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto s = mc_stats(by_time[k]);
        const double n = static_cast<double>(by_time[k].size());
        const double var = s.standard_error * s.standard_error * n;
        write_csv_row(out, {fmt_double(times[k]), fmt_double(s.estimate), fmt_double(var),
                            fmt_double(s.standard_error)});
    }
}

// ---------------------------------------------------------------------------
// capacity

json run_capacity(const json& p) {
    const auto r = critical_capacity(p.at("alpha").get<double>(), p.at("beta").get<double>(),
                                     p.at("gamma").get<double>());
    return {{"k_bar", r.k_bar}, {"residual", r.residual}, {"iterations", r.iterations}};
}

// ---------------------------------------------------------------------------
// criterion

json run_criterion(const ModelFile& mf, const json&) {
    CriterionResult r;
    std::string form;
    if (mf.drift.kind == DriftKind::Logistic && mf.diffusion.kind == DiffusionKind::FellerLinear &&
        mf.drift.gamma == mf.params.gamma && mf.drift.capacity == mf.params.capacity &&
        mf.diffusion.beta == mf.params.beta) {
        r = extinction_criterion_logistic(mf.params);
        form = "logistic";
    } else {
        r = extinction_criterion_general(mf.params, mf.drift, mf.diffusion);
        form = "general";
    }
    return {{"form", form},
            {"extinct", r.extinct},
            {"integral", r.integral_value},
            {"threshold", r.threshold},
            {"error_estimate", r.error_estimate},
            {"indeterminate", r.indeterminate}};
}

// ---------------------------------------------------------------------------
// simulate

json run_simulate(const ModelFile& mf, const json& p, const std::string& out_prefix) {
    const std::string mode = p.at("mode").get<std::string>();
    const std::size_t reps = p.at("replicates").get<std::size_t>();
    const std::size_t workers = p.at("workers").get<std::size_t>();
    SimConfig cfg = sim_config_from(p);
    cfg.validate();
    const std::string csv_path = out_prefix + ".csv";

    json info{{"mode", mode}, {"out_csv", csv_path}};

    if (mode == "lattice" || mode == "finite-mass") {
        const auto kernel = require_kernel(mf);
        if (mode == "finite-mass" && kernel.lattice.boundary != Boundary::Truncate)
            throw std::invalid_argument("simulate --mode finite-mass needs boundary = truncate");
        const Config x0 = parse_config_spec(p.at("initial").get<std::string>(),
                                            kernel.lattice.n_sites(), "--initial");
        // per replicate: the recorded scalar series (origin marginal for
        // lattice runs, total mass for finite-mass runs)
        struct RepOut {
            std::vector<double> series;
            bool absorbed = false;
            double exceeded_at = -1.0;
        };
        auto one = [&](std::size_t r) {
            SimConfig c = cfg;
            c.replicate_index = r;
            PathRecord rec =
                mode == "lattice"
                    ? simulate_lattice(x0, mf.params, kernel, mf.drift, mf.diffusion, c)
                    : simulate_finite_mass(x0, mf.params, kernel, mf.drift, mf.diffusion, c);
            RepOut o;
            if (rec.exceeded_at) {
                o.exceeded_at = *rec.exceeded_at;
                return o;
            }
            o.absorbed = rec.absorbed_at.has_value();
            o.series.reserve(rec.times.size());
            for (std::size_t k = 0; k < rec.times.size(); ++k)
                o.series.push_back(mode == "lattice" ? rec.configurations[k][0]
                                                     : rec.total_mass_at(k));
            return o;
        };
        const auto outs = run_replicates<RepOut>(reps, workers, one);
        std::size_t absorbed = 0;
        for (std::size_t r = 0; r < outs.size(); ++r) {
            if (outs[r].exceeded_at >= 0.0)
                throw NumericalFailure("replicate " + std::to_string(r) +
                                       ": blow-up guard or box budget exceeded at t = " +
                                       std::to_string(outs[r].exceeded_at));
            absorbed += outs[r].absorbed ? 1 : 0;
        }
        std::vector<std::vector<double>> by_time(cfg.record_times.size());
        for (std::size_t k = 0; k < cfg.record_times.size(); ++k) {
            by_time[k].reserve(reps);
            for (const auto& o : outs) by_time[k].push_back(o.series[k]);
        }
        write_summary_csv(csv_path, cfg.record_times, by_time);
        info["absorbed_fraction"] = static_cast<double>(absorbed) / static_cast<double>(reps);
        info["series"] = mode == "lattice" ? "origin marginal" : "total mass";
    } else if (mode == "meanfield") {
        const double v0 = p.at("initial_constant").get<double>();
        if (!(v0 >= 0.0)) throw std::invalid_argument("--initial must be >= 0");
        auto ens = simulate_meanfield_particles(
            reps, [v0](rng::Stream&) { return v0; }, mf.params, mf.drift, mf.diffusion, cfg);
        write_summary_csv(csv_path, ens.times, ens.snapshots);
        info["series"] = "particle marginal";
        info["particles"] = ens.particle_count;
    } else if (mode == "immigration") {
        const double theta = p.at("theta").get<double>();
        const double v0 = p.at("v0").get<double>();
        auto one = [&](std::size_t r) {
            SimConfig c = cfg;
            c.replicate_index = r;
            auto rec = simulate_immigration_diffusion(theta, v0, mf.params, mf.drift,
                                                      mf.diffusion, c);
            if (rec.exceeded_at)
                throw NumericalFailure("replicate " + std::to_string(r) +
                                       ": blow-up guard exceeded at t = " +
                                       std::to_string(*rec.exceeded_at));
            std::vector<double> series(rec.times.size());
            for (std::size_t k = 0; k < series.size(); ++k) series[k] = rec.configurations[k][0];
            return series;
        };
        const auto outs = run_replicates<std::vector<double>>(reps, workers, one);
        std::vector<std::vector<double>> by_time(cfg.record_times.size());
        for (std::size_t k = 0; k < cfg.record_times.size(); ++k)
            for (const auto& s : outs) by_time[k].push_back(s[k]);
        write_summary_csv(csv_path, cfg.record_times, by_time);
        info["series"] = "immigration diffusion";
    } else if (mode == "maximal") {
        const auto kernel = require_kernel(mf);
        const auto n_grid = p.at("n_grid").get<std::vector<double>>();
        for (double N : n_grid)
            if (!(N > 0.0)) throw std::invalid_argument("--n-grid entries must be > 0");
        // long format: one row per (N, t, replicate) with the origin marginal
        struct Row {
            double N, t, value;
            std::size_t rep;
        };
        auto one_level = [&](double N) {
            auto one = [&](std::size_t r) {
                SimConfig c = cfg;
                c.replicate_index = r;
                auto rec = maximal_process_run(N, mf.params, kernel, mf.drift, mf.diffusion, c);
                if (rec.exceeded_at)
                    throw NumericalFailure("N = " + fmt_double(N) + " replicate " +
                                           std::to_string(r) + ": blow-up guard at t = " +
                                           std::to_string(*rec.exceeded_at));
                std::vector<double> series(rec.times.size());
                for (std::size_t k = 0; k < series.size(); ++k)
                    series[k] = rec.configurations[k][0];
                return series;
            };
            return run_replicates<std::vector<double>>(reps, workers, one);
        };
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot write " + csv_path);
        write_csv_row(out, {"N", "t", "replicate", "value"});
        for (double N : n_grid) {
            const auto outs = one_level(N);
            for (std::size_t r = 0; r < outs.size(); ++r)
                for (std::size_t k = 0; k < cfg.record_times.size(); ++k)
                    write_csv_row(out, {fmt_double(N), fmt_double(cfg.record_times[k]),
                                        std::to_string(r), fmt_double(outs[r][k])});
        }
        info["series"] = "origin marginal per (N, t, replicate)";
    } else {
        throw std::invalid_argument("unknown --mode '" + mode + "'");
    }
    return info;
}

// ---------------------------------------------------------------------------
// duality / nu-bar

void require_gamma_beta(const ModelParams& p) {
    if (p.gamma == 0.0 || p.beta == 0.0)
        throw std::invalid_argument("duality commands need gamma > 0 and beta > 0");
}

json run_duality(const ModelFile& mf, const json& p) {
    require_gamma_beta(mf.params);
    const auto kernel = require_kernel(mf);
    SimConfig cfg = sim_config_from(p);
    const Config x = parse_config_spec(p.at("x").get<std::string>(), kernel.lattice.n_sites(), "--x");
    const Config y = parse_config_spec(p.at("y").get<std::string>(), kernel.lattice.n_sites(), "--y");
    const auto g = self_duality_gap(x, y, p.at("t").get<double>(), mf.params, kernel, cfg,
                                    p.at("replicates").get<std::size_t>());
    return {{"gap", g.gap},
            {"combined_se", g.combined_se},
            {"forward", mc_json(g.forward)},
            {"dual", mc_json(g.dual)},
            {"pass", g.pass()}};
}

json run_nu_bar(const ModelFile& mf, const json& p) {
    require_gamma_beta(mf.params);
    const auto kernel = require_kernel(mf);
    SimConfig cfg = sim_config_from(p);
    const Config lambda =
        parse_config_spec(p.at("lambda").get<std::string>(), kernel.lattice.n_sites(), "--lambda");
    double mass = 0.0;
    for (double v : lambda) mass += v;
    const auto r = extinction_prob_dual(lambda, mf.params, kernel, p.at("t_max").get<double>(),
                                        cfg, p.at("replicates").get<std::size_t>());
    return {{"estimate", mc_json(r.estimate)},
            {"estimate_half", mc_json(r.estimate_half)},
            {"stabilized", r.stabilized},
            {"feller_bound", feller_extinction_bound(mass, mf.params)}};
}

// ---------------------------------------------------------------------------
// table: small CSV dumps of the scalar functions behind the criteria

json run_table(const ModelFile& mf, const json& p, const std::string& out_prefix) {
    const std::string which = p.at("which").get<std::string>();
    const double from = p.at("from").get<double>(), to = p.at("to").get<double>();
    const std::size_t steps = p.at("steps").get<std::size_t>();
    if (steps < 2) throw std::invalid_argument("table --steps must be >= 2");
    if (!(from > 0.0 && to > from))
        throw std::invalid_argument("table needs 0 < --from < --to");
    const std::string csv_path = out_prefix + ".csv";
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + csv_path);

    if (which == "f-theta") {
        write_csv_row(out, {"theta", "f"});
        for (std::size_t i = 0; i < steps; ++i) {
            const double th =
                from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
            write_csv_row(out, {fmt_double(th),
                                fmt_double(f_of_theta(th, mf.params, mf.drift, mf.diffusion))});
        }
    } else if (which == "gamma-density") {
        const double theta = p.at("theta").get<double>();
        const auto gt = gamma_theta_stats(theta, mf.params, mf.drift, mf.diffusion);
        write_csv_row(out, {"y", "density"});
        for (std::size_t i = 0; i < steps; ++i) {
            const double y =
                from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
            write_csv_row(out, {fmt_double(y), fmt_double(gt.density(y))});
        }
    } else {
        throw std::invalid_argument("table expects f-theta or gamma-density");
    }
    return {{"out_csv", csv_path}, {"which", which}, {"points", steps}};
}

// ---------------------------------------------------------------------------
// sweep

void apply_param(ModelFile& mf, const std::string& name, double value) {
    if (name == "alpha") mf.params.alpha = value;
    else if (name == "beta") mf.params.beta = value;
    else if (name == "gamma") mf.params.gamma = value;
    else if (name == "capacity") mf.params.capacity = value;
    else throw std::invalid_argument("sweep --param must be alpha|beta|gamma|capacity");
    mf.params.validate();
    // keep specs that mirror the shared rates in sync
    if (mf.drift.kind == DriftKind::Logistic)
        mf.drift = DriftSpec::logistic(mf.params.gamma, mf.params.capacity);
    if (mf.diffusion.kind == DiffusionKind::FellerLinear)
        mf.diffusion = DiffusionSpec::feller(mf.params.beta);
}

json run_sweep(const ModelFile& mf, const json& p, const std::string& out_prefix) {
    const std::string param = p.at("param").get<std::string>();
    const double from = p.at("from").get<double>(), to = p.at("to").get<double>();
    const std::size_t steps = p.at("steps").get<std::size_t>();
    const std::string inner = p.at("inner").get<std::string>();
    const std::uint64_t master = p.at("seed").get<std::uint64_t>();
    const std::size_t workers = p.at("workers").get<std::size_t>();
    if (steps < 1) throw std::invalid_argument("sweep --steps must be >= 1");
    if (inner != "criterion" && inner != "capacity")
        throw std::invalid_argument("sweep inner subcommand must be criterion or capacity");

    auto one = [&](std::size_t i) -> std::vector<std::string> {
        const double v =
            steps == 1 ? from
                       : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
        const std::uint64_t seed = rng::derive_seed(master, i);
        ModelFile local = mf;
        std::vector<std::string> row{param, fmt_double(v), std::to_string(seed)};
        try {
            apply_param(local, param, v);
            if (inner == "criterion") {
                const json r = run_criterion(local, {});
                row.push_back(r.at("extinct").get<bool>() ? "1" : "0");
                row.push_back(fmt_double(r.at("integral").get<double>()));
                row.push_back(fmt_double(r.at("threshold").get<double>()));
                row.emplace_back();
            } else {
                const auto r = critical_capacity(local.params.alpha, local.params.beta,
                                                 local.params.gamma);
                row.push_back(fmt_double(r.k_bar));
                row.push_back(fmt_double(r.residual));
                row.emplace_back();
            }
        } catch (const std::exception& e) {
            row.resize(3);
            row.insert(row.end(), inner == "criterion" ? 3 : 2, "");
            row.emplace_back(e.what());
        }
        return row;
    };
    const auto rows = run_replicates<std::vector<std::string>>(steps, workers, one);

    const std::string csv_path = out_prefix + ".csv";
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + csv_path);
    if (inner == "criterion")
        write_csv_row(out, {"param", "value", "seed", "extinct", "integral", "threshold", "error"});
    else
        write_csv_row(out, {"param", "value", "seed", "k_bar", "residual", "error"});
    std::size_t failed = 0;
    for (const auto& r : rows) {
        write_csv_row(out, r);
        if (!r.back().empty()) ++failed;
    }
    return {{"out_csv", csv_path}, {"points", steps}, {"failed_points", failed}};
}

// ---------------------------------------------------------------------------
// analyze upper-invariant

json run_analyze_upper_invariant(const ModelFile& mf, const json& p) {
    const std::string path = p.at("samples").get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read samples file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("samples file is empty");
    // header: N,t,replicate,value
    std::map<double, std::map<double, std::vector<double>>> cells;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = parse_double_list(line, "samples line " + std::to_string(lineno));
        if (fields.size() != 4)
            throw std::invalid_argument("samples line " + std::to_string(lineno) +
                                        ": expected N,t,replicate,value");
        cells[fields[0]][fields[1]].push_back(fields[3]);
    }
    std::vector<double> N_grid, t_grid;
    for (const auto& [N, _] : cells) N_grid.push_back(N);
    if (cells.empty()) throw std::invalid_argument("samples file has no data rows");
    for (const auto& [t, _] : cells.begin()->second) t_grid.push_back(t);
    std::vector<std::vector<std::vector<double>>> samples;
    for (const auto& [N, by_t] : cells) {
        if (by_t.size() != t_grid.size())
            throw std::invalid_argument("samples file: ragged t grid at N = " + fmt_double(N));
        samples.emplace_back();
        for (const auto& [t, vals] : by_t) samples.back().push_back(vals);
    }
    const auto rep = upper_invariant_estimate(N_grid, t_grid, samples, mf.drift);
    json table = json::array();
    for (const auto& c : rep.table)
        table.push_back({{"N", c.N}, {"t", c.t}, {"mean", c.mean}, {"variance", c.variance},
                         {"se", c.se}});
    return {{"monotone_in_N", rep.monotone_in_N},
            {"monotone_in_t", rep.monotone_in_t},
            {"envelope_ok", rep.envelope_ok},
            {"violation", rep.violation},
            {"nu_bar_mean", rep.nu_bar_mean},
            {"nu_bar_variance", rep.nu_bar_variance},
            {"table", table}};
}

// ---------------------------------------------------------------------------
// dispatch (shared by direct invocation and rerun)

int dispatch(const std::string& sub, const json& params, const std::string& model_text) {
    const auto t0 = std::chrono::steady_clock::now();
    ModelFile mf;
    if (!model_text.empty()) mf = parse_model_file(model_text);

    json result;
    const std::string out_prefix = params.value("out", "");
    const bool file_sub = sub == "simulate" || sub == "sweep" || sub == "table";
    const bool writes_files = file_sub || !out_prefix.empty();
    const std::string prefix =
        out_prefix.empty() ? (file_sub ? (sub == "simulate" ? "run" : sub) : "") : out_prefix;

    if (sub == "capacity") result = run_capacity(params);
    else if (sub == "criterion") result = run_criterion(mf, params);
    else if (sub == "simulate") result = run_simulate(mf, params, prefix);
    else if (sub == "duality") result = run_duality(mf, params);
    else if (sub == "nu-bar") result = run_nu_bar(mf, params);
    else if (sub == "table") result = run_table(mf, params, prefix);
    else if (sub == "sweep") result = run_sweep(mf, params, prefix);
    else if (sub == "analyze upper-invariant") result = run_analyze_upper_invariant(mf, params);
    else throw std::invalid_argument("unknown subcommand '" + sub + "'");

    std::cout << result.dump(2) << "\n";

    if (writes_files) {
        RunManifest m;
        m.model_text = model_text;
        m.model_hash = fnv1a64_hex(model_text);
        m.subcommand = sub;
        m.params = params;
        m.seed = params.value("seed", std::uint64_t{0});
        m.scheme = params.value("scheme", "");
        m.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!prefix.empty()) {
            if (!file_sub) {
                std::ofstream out(prefix + ".json", std::ios::binary);
                if (!out) throw std::invalid_argument("cannot write " + prefix + ".json");
                out << result.dump(2) << "\n";
            }
            write_manifest(prefix + ".manifest.json", m);
        }
    }
    return 0;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("REGLAB_SEED")) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(env, &pos);
            if (pos != std::string(env).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            throw std::invalid_argument("REGLAB_SEED must be an unsigned integer");
        }
    }
    return flag_seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"locally regulated branching diffusions: simulation and analysis"};
    app.require_subcommand(1);

    // ---- capacity
    auto* cap = app.add_subcommand("capacity", "critical capacity K-bar for logistic models");
    double cap_alpha = 1.0, cap_beta = 1.0, cap_gamma = 1.0;
    std::string cap_out;
    cap->add_option("--alpha", cap_alpha, "migration rate")->capture_default_str();
    cap->add_option("--beta", cap_beta, "branching rate")->capture_default_str();
    cap->add_option("--gamma", cap_gamma, "competition rate")->capture_default_str();
    cap->add_option("--out", cap_out, "output prefix (writes .json and .manifest.json)");

    // ---- criterion
    auto* cri = app.add_subcommand("criterion", "extinction/survival criterion for a model file");
    std::string cri_model, cri_out;
    cri->add_option("model", cri_model, "model file")->required();
    cri->add_option("--out", cri_out, "output prefix");

    // ---- simulate
    auto* sim = app.add_subcommand("simulate", "simulate a model and write a summary CSV");
    std::string sim_model, sim_mode = "lattice", sim_record, sim_scheme = "full-truncation-em";
    std::string sim_initial = "1", sim_out = "run", sim_ngrid;
    double sim_dt = 1e-3, sim_tend = 10.0, sim_theta = 1.0, sim_v0 = 0.0;
    std::size_t sim_reps = 10000, sim_workers = 1;
    std::uint64_t sim_seed = 0;
    sim->add_option("model", sim_model, "model file")->required();
    sim->add_option("--mode", sim_mode, "lattice|meanfield|immigration|finite-mass|maximal")
        ->capture_default_str();
    sim->add_option("--dt", sim_dt, "time step")->capture_default_str();
    sim->add_option("--t-end", sim_tend, "horizon")->capture_default_str();
    sim->add_option("--record", sim_record, "comma list of record times (default: 10 even points)");
    sim->add_option("--scheme", sim_scheme, "full-truncation-em|split-exact-feller")
        ->capture_default_str();
    sim->add_option("--seed", sim_seed, "master seed (REGLAB_SEED overrides)")->capture_default_str();
    sim->add_option("--replicates", sim_reps, "replicates (particles for --mode meanfield)")
        ->capture_default_str();
    sim->add_option("--workers", sim_workers, "worker threads")->capture_default_str();
    sim->add_option("--initial", sim_initial, "initial configuration spec")->capture_default_str();
    sim->add_option("--theta", sim_theta, "immigration level (immigration mode)")
        ->capture_default_str();
    sim->add_option("--v0", sim_v0, "initial value (immigration mode)")->capture_default_str();
    sim->add_option("--n-grid", sim_ngrid, "comma list of start levels (maximal mode)");
    sim->add_option("--out", sim_out, "output prefix")->capture_default_str();

    // ---- duality
    auto* dua = app.add_subcommand("duality", "self-duality gap statistic");
    std::string dua_model, dua_x = "1", dua_y = "1", dua_scheme = "full-truncation-em", dua_out;
    double dua_t = 1.0, dua_dt = 1e-3;
    std::size_t dua_reps = 10000;
    std::uint64_t dua_seed = 0;
    dua->add_option("model", dua_model, "model file")->required();
    dua->add_option("--x", dua_x, "forward initial configuration")->capture_default_str();
    dua->add_option("--y", dua_y, "dual initial configuration")->capture_default_str();
    dua->add_option("--t", dua_t, "time")->capture_default_str();
    dua->add_option("--dt", dua_dt, "time step")->capture_default_str();
    dua->add_option("--scheme", dua_scheme, "sde scheme")->capture_default_str();
    dua->add_option("--seed", dua_seed, "master seed")->capture_default_str();
    dua->add_option("--replicates", dua_reps, "replicates per side")->capture_default_str();
    dua->add_option("--out", dua_out, "output prefix");

    // ---- nu-bar
    auto* nub = app.add_subcommand("nu-bar", "dual absorption estimate of the Laplace transform");
    std::string nub_model, nub_lambda = "1@0", nub_scheme = "split-exact-feller", nub_out;
    double nub_tmax = 50.0, nub_dt = 1e-3;
    std::size_t nub_reps = 10000;
    std::uint64_t nub_seed = 0;
    nub->add_option("model", nub_model, "model file")->required();
    nub->add_option("--lambda", nub_lambda, "test configuration")->capture_default_str();
    nub->add_option("--t-max", nub_tmax, "absorption horizon")->capture_default_str();
    nub->add_option("--dt", nub_dt, "time step")->capture_default_str();
    nub->add_option("--scheme", nub_scheme, "sde scheme")->capture_default_str();
    nub->add_option("--seed", nub_seed, "master seed")->capture_default_str();
    nub->add_option("--replicates", nub_reps, "dual replicates")->capture_default_str();
    nub->add_option("--out", nub_out, "output prefix");

    // ---- table
    auto* tab = app.add_subcommand("table", "dump f(theta) or equilibrium-density CSV tables");
    std::string tab_model, tab_which = "f-theta", tab_out = "table";
    double tab_from = 0.1, tab_to = 4.0, tab_theta = 1.0;
    std::size_t tab_steps = 40;
    tab->add_option("model", tab_model, "model file")->required();
    tab->add_option("--which", tab_which, "f-theta|gamma-density")->capture_default_str();
    tab->add_option("--from", tab_from, "grid start (> 0)")->capture_default_str();
    tab->add_option("--to", tab_to, "grid end")->capture_default_str();
    tab->add_option("--steps", tab_steps, "grid points")->capture_default_str();
    tab->add_option("--theta", tab_theta, "immigration level (gamma-density)")
        ->capture_default_str();
    tab->add_option("--out", tab_out, "output prefix")->capture_default_str();

    // ---- sweep
    auto* swe = app.add_subcommand("sweep", "run criterion/capacity along a parameter grid");
    std::string swe_model, swe_param = "capacity", swe_out = "sweep";
    double swe_from = 0.0, swe_to = 1.0;
    std::size_t swe_steps = 11, swe_workers = 1;
    std::uint64_t swe_seed = 0;
    swe->add_option("model", swe_model, "model file")->required();
    swe->add_option("--param", swe_param, "alpha|beta|gamma|capacity")->capture_default_str();
    swe->add_option("--from", swe_from, "grid start")->capture_default_str();
    swe->add_option("--to", swe_to, "grid end")->capture_default_str();
    swe->add_option("--steps", swe_steps, "grid points")->capture_default_str();
    swe->add_option("--seed", swe_seed, "master seed (per-point seeds derived)")
        ->capture_default_str();
    swe->add_option("--workers", swe_workers, "worker threads")->capture_default_str();
    swe->add_option("--out", swe_out, "output prefix")->capture_default_str();
    auto* swe_cri = swe->add_subcommand("criterion", "inner: extinction criterion per point");
    auto* swe_cap = swe->add_subcommand("capacity", "inner: critical capacity per point");
    swe_cri->fallthrough();
    swe_cap->fallthrough();
    swe->require_subcommand(1);

    // ---- analyze
    auto* ana = app.add_subcommand("analyze", "post-process simulation outputs");
    auto* ana_ui = ana->add_subcommand("upper-invariant", "verdicts over maximal-process samples");
    std::string ana_model, ana_samples, ana_out;
    ana_ui->add_option("model", ana_model, "model file")->required();
    ana_ui->add_option("--samples", ana_samples, "CSV from simulate --mode maximal")->required();
    ana_ui->add_option("--out", ana_out, "output prefix");
    ana->require_subcommand(1);

    // ---- rerun
    auto* rer = app.add_subcommand("rerun", "re-execute a run from its manifest");
    std::string rer_manifest, rer_out;
    std::size_t rer_workers = 0;
    rer->add_option("manifest", rer_manifest, "manifest JSON")->required();
    rer->add_option("--out", rer_out, "override output prefix");
    rer->add_option("--workers", rer_workers, "override worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cap->parsed()) {
            json p{{"alpha", cap_alpha}, {"beta", cap_beta}, {"gamma", cap_gamma},
                   {"out", cap_out}};
            return dispatch("capacity", p, "");
        }
        if (cri->parsed()) {
            const auto mf = load_model_file(cri_model);
            json p{{"out", cri_out}};
            return dispatch("criterion", p, mf.text);
        }
        if (sim->parsed()) {
            const auto mf = load_model_file(sim_model);
            std::vector<double> record =
                sim_record.empty() ? default_record(sim_tend, sim_mode != "maximal")
                                   : parse_double_list(sim_record, "--record");
            std::sort(record.begin(), record.end());
            record.erase(std::unique(record.begin(), record.end()), record.end());
            json p{{"mode", sim_mode},
                   {"dt", sim_dt},
                   {"t_end", sim_tend},
                   {"record", record},
                   {"scheme", to_string(parse_scheme(sim_scheme))},
                   {"seed", effective_seed(sim_seed)},
                   {"replicates", sim_reps},
                   {"workers", sim_workers},
                   {"initial", sim_initial},
                   {"out", sim_out}};
            if (sim_mode == "meanfield") {
                // meanfield initial laws are deterministic constants
                try {
                    std::size_t pos = 0;
                    p["initial_constant"] = std::stod(sim_initial, &pos);
                    if (pos != sim_initial.size()) throw std::invalid_argument("trailing");
                } catch (...) {
                    throw std::invalid_argument(
                        "--mode meanfield needs a constant --initial value");
                }
            }
            if (sim_mode == "immigration") {
                p["theta"] = sim_theta;
                p["v0"] = sim_v0;
            }
            if (sim_mode == "maximal") {
                if (sim_ngrid.empty())
                    throw std::invalid_argument("--mode maximal requires --n-grid");
                p["n_grid"] = parse_double_list(sim_ngrid, "--n-grid");
                for (double t : record)
                    if (!(t > 0.0))
                        throw std::invalid_argument("--mode maximal record times must be > 0");
            }
            return dispatch("simulate", p, mf.text);
        }
        if (dua->parsed()) {
            const auto mf = load_model_file(dua_model);
            json p{{"x", dua_x},
                   {"y", dua_y},
                   {"t", dua_t},
                   {"dt", dua_dt},
                   {"t_end", std::max(dua_t, dua_dt)},
                   {"record", json::array()},
                   {"scheme", to_string(parse_scheme(dua_scheme))},
                   {"seed", effective_seed(dua_seed)},
                   {"replicates", dua_reps},
                   {"out", dua_out}};
            return dispatch("duality", p, mf.text);
        }
        if (nub->parsed()) {
            const auto mf = load_model_file(nub_model);
            json p{{"lambda", nub_lambda},
                   {"t_max", nub_tmax},
                   {"dt", nub_dt},
                   {"t_end", std::max(nub_tmax, nub_dt)},
                   {"record", json::array()},
                   {"scheme", to_string(parse_scheme(nub_scheme))},
                   {"seed", effective_seed(nub_seed)},
                   {"replicates", nub_reps},
                   {"out", nub_out}};
            return dispatch("nu-bar", p, mf.text);
        }
        if (tab->parsed()) {
            const auto mf = load_model_file(tab_model);
            json p{{"which", tab_which}, {"from", tab_from},   {"to", tab_to},
                   {"steps", tab_steps}, {"theta", tab_theta}, {"out", tab_out}};
            return dispatch("table", p, mf.text);
        }
        if (swe->parsed()) {
            const auto mf = load_model_file(swe_model);
            json p{{"param", swe_param},
                   {"from", swe_from},
                   {"to", swe_to},
                   {"steps", swe_steps},
                   {"inner", swe_cri->parsed() ? "criterion" : "capacity"},
                   {"seed", effective_seed(swe_seed)},
                   {"workers", swe_workers},
                   {"out", swe_out}};
            (void)swe_cap;
            return dispatch("sweep", p, mf.text);
        }
        if (ana_ui->parsed()) {
            const auto mf = load_model_file(ana_model);
            json p{{"samples", ana_samples}, {"out", ana_out}};
            return dispatch("analyze upper-invariant", p, mf.text);
        }
        if (rer->parsed()) {
            const auto m = load_manifest(rer_manifest);
            json p = m.params;
            if (!rer_out.empty()) p["out"] = rer_out;
            if (rer_workers > 0 && p.contains("workers")) p["workers"] = rer_workers;
            return dispatch(m.subcommand, p, m.model_text);
        }
        throw std::invalid_argument("no subcommand given");
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const QuadratureError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const RootError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ModelFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        // NaN propagation and similar in-simulation failures
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
