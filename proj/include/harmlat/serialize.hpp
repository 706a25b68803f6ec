#pragma once

// JSON serialization for grid functions, lattice specs, certificates, and
// reports, plus the on-disk calibration constants store. Values that may be
// infinite (exponent grids) serialize as the string "inf"; complex values
// as [re, im] pairs. The constants block of a calibration file depends only
// on the computed numbers, never on the clock, so equal seeds produce
// byte-identical blocks; provenance (seed, timestamp, version) sits beside
// it.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bmo.hpp"
#include "grid.hpp"
#include "interpolation.hpp"
#include "lattice.hpp"
#include "weights.hpp"

namespace harmlat {

inline constexpr const char* artifact_version = "0.1.0";

using json = nlohmann::ordered_json;

inline json to_json(const GridSpec& g) {
    json j;
    j["dim"] = g.dim;
    j["sides"] = g.dim == 2 ? json::array({g.sides[0], g.sides[1]})
                            : json::array({g.sides[0]});
    j["spacing"] = g.spacing;
    j["boundary"] = boundary_name(g.boundary);
    j["max_cube_side"] = g.max_cube_side;
    return j;
}

inline GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.dim = j.at("dim").get<int>();
    auto sides = j.at("sides");
    g.sides[0] = sides.at(0).get<int>();
    g.sides[1] = g.dim == 2 ? sides.at(1).get<int>() : 1;
    g.spacing = j.at("spacing").get<double>();
    std::string b = j.at("boundary").get<std::string>();
    if (b == "torus")
        g.boundary = Boundary::torus;
    else if (b == "zero_extend")
        g.boundary = Boundary::zero_extend;
    else
        throw std::invalid_argument("grid_from_json: unknown boundary '" + b + "'");
    g.max_cube_side = j.at("max_cube_side").get<int>();
    g.validate();
    return g;
}

inline json to_json(const GridFunction& f) {
    json j = to_json(f.grid());
    json vals = json::array();
    bool real = f.is_real();
    for (std::int64_t i = 0; i < f.size(); ++i) {
        if (real) {
            double v = f[i].real();
            if (std::isinf(v))
                vals.push_back(v > 0 ? "inf" : "-inf");
            else
                vals.push_back(v);
        } else {
            vals.push_back(json::array({f[i].real(), f[i].imag()}));
        }
    }
    j["values"] = std::move(vals);
    return j;
}

inline GridFunction grid_function_from_json(const json& j) {
    GridSpec g = grid_from_json(j);
    const json& vals = j.at("values");
    bool complex_vals = false, has_inf = false;
    for (const auto& v : vals) {
        if (v.is_array()) complex_vals = true;
        if (v.is_string()) has_inf = true;
    }
    if (complex_vals) {
        std::vector<std::complex<double>> out;
        out.reserve(vals.size());
        for (const auto& v : vals) {
            if (v.is_array())
                out.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            else
                out.emplace_back(v.get<double>(), 0.0);
        }
        return GridFunction::complex_(g, std::move(out));
    }
    std::vector<double> out;
    out.reserve(vals.size());
    for (const auto& v : vals) {
        if (v.is_string()) {
            std::string s = v.get<std::string>();
            double inf = std::numeric_limits<double>::infinity();
            if (s == "inf")
                out.push_back(inf);
            else if (s == "-inf")
                out.push_back(-inf);
            else
                throw std::invalid_argument("grid_function_from_json: bad value '" + s + "'");
        } else {
            out.push_back(v.get<double>());
        }
    }
    return GridFunction::real(g, std::move(out), has_inf);
}

inline json to_json(const LatticeSpec& X) {
    json j;
    auto put_p = [&](double p) {
        if (std::isinf(p))
            j["p"] = "inf";
        else
            j["p"] = p;
    };
    switch (X.family()) {
        case LatticeSpec::Family::lp:
            j["family"] = "lp";
            put_p(X.p());
            break;
        case LatticeSpec::Family::weighted_lp:
            j["family"] = "weighted_lp";
            put_p(X.p());
            j["weight"] = to_json(X.field());
            break;
        case LatticeSpec::Family::var_lp:
            j["family"] = "var_lp";
            j["exponent"] = to_json(X.field());
            break;
        case LatticeSpec::Family::calderon:
            j["family"] = "calderon";
            j["theta"] = X.theta();
            j["x0"] = to_json(X.sub0());
            j["x1"] = to_json(X.sub1());
            break;
        case LatticeSpec::Family::power:
            j["family"] = "power";
            j["theta"] = X.theta();
            j["base"] = to_json(X.sub0());
            break;
        case LatticeSpec::Family::mixed_linf:
            j["family"] = "mixed_linf";
            j["length"] = X.seq_length();
            j["base"] = to_json(X.sub0());
            break;
    }
    return j;
}

inline LatticeSpec lattice_from_json(const json& j) {
    std::string fam = j.at("family").get<std::string>();
    auto get_p = [&]() -> double {
        const json& p = j.at("p");
        if (p.is_string()) {
            if (p.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
            throw std::invalid_argument("lattice_from_json: bad p");
        }
        return p.get<double>();
    };
    if (fam == "lp") return LatticeSpec::lp(get_p());
    if (fam == "weighted_lp")
        return LatticeSpec::weighted_lp(get_p(), grid_function_from_json(j.at("weight")));
    if (fam == "var_lp")
        return LatticeSpec::var_lp(grid_function_from_json(j.at("exponent")));
    if (fam == "calderon")
        return LatticeSpec::calderon(lattice_from_json(j.at("x0")),
                                     lattice_from_json(j.at("x1")),
                                     j.at("theta").get<double>());
    if (fam == "power")
        return LatticeSpec::power(lattice_from_json(j.at("base")), j.at("theta").get<double>());
    if (fam == "mixed_linf")
        return LatticeSpec::mixed_linf(lattice_from_json(j.at("base")),
                                       j.at("length").get<int>());
    throw std::invalid_argument("lattice_from_json: unknown family '" + fam + "'");
}

inline json to_json(const A1Certificate& c) {
    json j;
    j["constant"] = c.a1_const;
    j["norm_ratio"] = c.norm_ratio;
    json params;
    for (const auto& [k, v] : c.parameters) params[k] = v;
    j["parameters"] = std::move(params);
    j["grid_digest"] = c.digest;
    return j;
}

inline json to_json(const StrombergResult& r) {
    json j;
    j["pass"] = r.pass;
    j["lambda"] = r.lambda;
    j["gamma"] = r.gamma;
    json w;
    w["anchor"] = json::array({r.worst_cube.anchor[0], r.worst_cube.anchor[1]});
    w["side"] = r.worst_cube.side;
    w["exceed"] = r.worst_exceed;
    w["cells"] = r.worst_cells;
    w["ratio"] = r.worst_ratio;
    w["center"] = r.worst_center;
    j["worst_cube"] = std::move(w);
    return j;
}

inline json to_json(const ChainReport& r) {
    json j;
    j["pass"] = r.pass;
    j["trivial"] = r.trivial;
    j["calibrated"] = r.calibrated;
    json m;
    m["i"] = r.margin_i;
    m["ii"] = r.margin_ii;
    m["iii"] = r.margin_iii;
    m["iv"] = r.margin_iv;
    j["margins"] = std::move(m);
    json c;
    c["boundary_linf"] = r.boundary_linf;
    c["boundary_x"] = r.boundary_x;
    c["bmo_peak"] = r.bmo_peak;
    c["norm_a"] = r.norm_a;
    c["norm_sharp"] = r.norm_sharp;
    c["sharp_const"] = r.sharp_const;
    j["constants"] = std::move(c);
    j["t_grid"] = r.t_grid;
    j["grid_digest"] = r.digest;
    return j;
}

inline json to_json(const DualityGapReport& r) {
    json j;
    j["max_rel_gap"] = r.max_rel_gap;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(json::array({row[0], row[1], row[2]}));
    j["rows"] = std::move(rows);
    return j;
}

// ---------------------------------------------------------------------------
// Calibration constants store. One JSON file holds entries keyed by
// "<lattice key>|<grid digest>"; each entry is {constants: {...},
// provenance: {seed, timestamp, version}}.

inline std::string constants_dir() {
    const char* env = std::getenv("VERIFY_CONSTANTS_DIR");
    if (env && *env) return env;
    return "constants";
}

inline std::string constants_file() {
    return constants_dir() + "/constants.json";
}

inline std::string calibration_key(const LatticeSpec& X, const GridSpec& g) {
    return X.key() + "|" + grid_digest(g);
}

inline json load_constants_file() {
    std::ifstream in(constants_file());
    if (!in) return json::object();
    json j;
    in >> j;
    return j;
}

inline void save_calibration(const std::string& key, const json& constants,
                             std::uint64_t seed) {
    std::filesystem::create_directories(constants_dir());
    json all = load_constants_file();
    json entry;
    entry["constants"] = constants;
    char stamp[32];
    std::time_t now = std::time(nullptr);
    std::tm tmv{};
    gmtime_r(&now, &tmv);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tmv);
    json prov;
    prov["seed"] = seed;
    prov["timestamp"] = stamp;
    prov["version"] = artifact_version;
    entry["provenance"] = std::move(prov);
    all[key] = std::move(entry);
    std::ofstream out(constants_file());
    if (!out)
        throw std::runtime_error("save_calibration: cannot write " + constants_file());
    out << all.dump(2) << "\n";
}

/// Stored sharp-domination constant for this lattice and grid, if any.
inline std::optional<double> lookup_sharp_constant(const LatticeSpec& X, const GridSpec& g) {
    json all = load_constants_file();
    auto it = all.find(calibration_key(X, g));
    if (it == all.end()) return std::nullopt;
    const json& c = it->at("constants");
    auto f = c.find("sharp_domination");
    if (f == c.end()) return std::nullopt;
    return f->get<double>();
}

}  // namespace harmlat
