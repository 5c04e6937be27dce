#pragma once
// Model definition files: INI-style sections [params] [drift] [diffusion]
// [lattice] [kernel] [weights]. Unknown sections or keys are hard errors.
// [kernel] lines are offset = weight, offsets comma-separated per axis,
// e.g. "-1 = 0.5" in 1-d or "0,1 = 0.25" in 2-d.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "model.hpp"

namespace reglab {

struct ModelFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelFile {
    ModelParams params;
    DriftSpec drift;
    DiffusionSpec diffusion;
    std::optional<Lattice> lattice;
    std::optional<Stencil> stencil;
    double decay_rate = 1.0;
    std::string text;  // verbatim content, for hashing into manifests
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_num(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ModelFileError("model file: bad number '" + v + "' for " + where);
    }
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& where) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            throw ModelFileError("model file: bad integer '" + tok + "' in " + where);
        }
    }
    if (out.empty()) throw ModelFileError("model file: empty list for " + where);
    return out;
}

}  // namespace detail

inline ModelFile parse_model_file(const std::string& text) {
    using detail::parse_num;
    using detail::trim;
    ModelFile mf;
    mf.text = text;

    std::string section;
    std::string drift_kind = "logistic", diff_kind = "feller-linear";
    std::optional<double> drift_gamma, drift_capacity, drift_c, diff_beta;
    std::optional<int> lat_dim;
    std::optional<std::vector<int>> lat_sides;
    std::string lat_boundary = "torus";
    bool saw_lattice = false, saw_kernel = false;
    Stencil st;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ModelFileError("model file line " + std::to_string(lineno) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            if (section != "params" && section != "drift" && section != "diffusion" &&
                section != "lattice" && section != "kernel" && section != "weights")
                throw ModelFileError("model file: unknown section [" + section + "]");
            if (section == "lattice") saw_lattice = true;
            if (section == "kernel") saw_kernel = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ModelFileError("model file line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ModelFileError("model file line " + std::to_string(lineno) + ": key outside any section");

        if (section == "params") {
            if (key == "alpha") mf.params.alpha = parse_num(value, key);
            else if (key == "beta") mf.params.beta = parse_num(value, key);
            else if (key == "gamma") mf.params.gamma = parse_num(value, key);
            else if (key == "capacity") mf.params.capacity = parse_num(value, key);
            else throw ModelFileError("model file: unknown key '" + key + "' in [params]");
        } else if (section == "drift") {
            if (key == "kind") drift_kind = value;
            else if (key == "gamma") drift_gamma = parse_num(value, key);
            else if (key == "capacity") drift_capacity = parse_num(value, key);
            else if (key == "c") drift_c = parse_num(value, key);
            else throw ModelFileError("model file: unknown key '" + key + "' in [drift]");
        } else if (section == "diffusion") {
            if (key == "kind") diff_kind = value;
            else if (key == "beta") diff_beta = parse_num(value, key);
            else throw ModelFileError("model file: unknown key '" + key + "' in [diffusion]");
        } else if (section == "lattice") {
            if (key == "dim") lat_dim = static_cast<int>(parse_num(value, key));
            else if (key == "sides") lat_sides = detail::parse_int_list(value, key);
            else if (key == "boundary") lat_boundary = value;
            else throw ModelFileError("model file: unknown key '" + key + "' in [lattice]");
        } else if (section == "kernel") {
            st.entries.emplace_back(detail::parse_int_list(key, "[kernel] offset"),
                                    parse_num(value, "[kernel] weight"));
        } else if (section == "weights") {
            if (key == "decay_rate") mf.decay_rate = parse_num(value, key);
            else throw ModelFileError("model file: unknown key '" + key + "' in [weights]");
        }
    }

    mf.params.validate();
    if (drift_kind == "logistic") {
        mf.drift = DriftSpec::logistic(drift_gamma.value_or(mf.params.gamma),
                                       drift_capacity.value_or(mf.params.capacity));
    } else if (drift_kind == "linear-growth") {
        if (!drift_c) throw ModelFileError("model file: [drift] kind linear-growth needs c");
        mf.drift = DriftSpec::linear_growth(*drift_c);
    } else {
        throw ModelFileError("model file: unknown drift kind '" + drift_kind + "'");
    }
    if (diff_kind == "feller-linear") {
        mf.diffusion = DiffusionSpec::feller(diff_beta.value_or(mf.params.beta));
    } else {
        throw ModelFileError("model file: unknown diffusion kind '" + diff_kind + "'");
    }
    if (saw_lattice) {
        if (!lat_dim || !lat_sides)
            throw ModelFileError("model file: [lattice] needs dim and sides");
        Boundary b;
        if (lat_boundary == "torus") b = Boundary::Torus;
        else if (lat_boundary == "truncate") b = Boundary::Truncate;
        else throw ModelFileError("model file: unknown boundary '" + lat_boundary + "'");
        if (static_cast<int>(lat_sides->size()) == 1 && *lat_dim > 1)
            lat_sides->assign(*lat_dim, (*lat_sides)[0]);
        mf.lattice = Lattice(*lat_dim, *lat_sides, b);
    }
    if (saw_kernel) {
        if (!mf.lattice) throw ModelFileError("model file: [kernel] requires [lattice]");
        detail::check_stencil(st, mf.lattice->dim);
        mf.stencil = st;
    }
    return mf;
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ModelFileError("model file: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_model_file(ss.str());
}

}  // namespace reglab
