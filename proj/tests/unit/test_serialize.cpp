#include <doctest.h>
#include <harmlat/interpolation.hpp>
#include <harmlat/serialize.hpp>
#include <harmlat/weights.hpp>

#include <cstdlib>
#include <filesystem>

using namespace harmlat;

namespace {
GridSpec torus1d(int n, int smax) {
    return GridSpec{1, {n, 1}, 1.0, Boundary::torus, smax};
}

struct TempConstantsDir {
    std::filesystem::path dir;
    TempConstantsDir() {
        dir = std::filesystem::temp_directory_path() /
              ("constants-test-" + std::to_string(std::rand()));
        setenv("VERIFY_CONSTANTS_DIR", dir.c_str(), 1);
    }
    ~TempConstantsDir() {
        unsetenv("VERIFY_CONSTANTS_DIR");
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
};
}  // namespace

TEST_CASE("grid spec round trip") {
    for (GridSpec g : {torus1d(8, 4),
                       GridSpec{2, {6, 4}, 0.25, Boundary::zero_extend, 3}}) {
        GridSpec back = grid_from_json(to_json(g));
        CHECK(back == g);
    }
    json bad = to_json(torus1d(4, 2));
    bad["boundary"] = "mystery";
    CHECK_THROWS_AS(grid_from_json(bad), std::invalid_argument);
}

TEST_CASE("grid function round trip") {
    GridSpec g = torus1d(4, 2);
    // Real values.
    auto f = GridFunction::real(g, {1.5, -2.0, 0.0, 3.25});
    auto fb = grid_function_from_json(to_json(f));
    CHECK(fb.grid() == g);
    for (std::int64_t i = 0; i < f.size(); ++i) CHECK(fb[i] == f[i]);
    // Complex values.
    auto c = GridFunction::complex_(g, {{1.0, -1.0}, {0.0, 2.0}, {3.0, 0.0}, {0.5, 0.5}});
    auto cb = grid_function_from_json(to_json(c));
    CHECK(!cb.is_real());
    for (std::int64_t i = 0; i < c.size(); ++i) CHECK(cb[i] == c[i]);
    // Exponent fields carry infinities as strings.
    double inf = std::numeric_limits<double>::infinity();
    auto e = GridFunction::real(g, {2.0, inf, 1.0, 3.0}, true);
    json je = to_json(e);
    CHECK(je["values"][1] == "inf");
    auto eb = grid_function_from_json(je);
    CHECK(eb.allows_infinite());
    CHECK(eb[1].real() == inf);
}

TEST_CASE("lattice spec round trip") {
    GridSpec g = torus1d(4, 2);
    double inf = std::numeric_limits<double>::infinity();
    auto w = GridFunction::real(g, {1.0, 2.0, 0.5, 1.0});
    std::vector<LatticeSpec> spaces = {
        LatticeSpec::lp(2.0),
        LatticeSpec::lp(inf),
        LatticeSpec::weighted_lp(3.0, w),
        LatticeSpec::weighted_lp(inf, w),
        LatticeSpec::var_lp(GridFunction::real(g, {1.0, 2.0, inf, 3.0}, true)),
        LatticeSpec::calderon(LatticeSpec::lp(1.0), LatticeSpec::lp(inf), 0.4),
        LatticeSpec::power(LatticeSpec::weighted_lp(2.0, w), 0.6),
        LatticeSpec::mixed_linf(LatticeSpec::lp(2.0), 5),
    };
    for (const auto& X : spaces) {
        LatticeSpec back = lattice_from_json(to_json(X));
        // The canonical key captures the whole structure.
        CHECK(back.key() == X.key());
    }
    json j = to_json(LatticeSpec::lp(inf));
    CHECK(j["p"] == "inf");
    json bad;
    bad["family"] = "exotic";
    CHECK_THROWS_AS(lattice_from_json(bad), std::invalid_argument);
}

TEST_CASE("report serialization schemas") {
    GridSpec g = torus1d(32, 16);
    CounterRng rng(67, "serialize", 0);
    auto f = gen_lognormal(g, rng);

    auto cert = rubio_majorant(f, LatticeSpec::lp(2.0), 8.0);
    json jc = to_json(cert);
    CHECK(jc.contains("constant"));
    CHECK(jc.contains("norm_ratio"));
    CHECK(jc["parameters"].contains("m_norm"));
    CHECK(jc["grid_digest"] == grid_digest(g));

    auto sr = stromberg_test(GridFunction::real(torus1d(2, 2), {0.0, 2.0}), 0.9, 0.4);
    json js = to_json(sr);
    CHECK(js["pass"] == false);
    CHECK(js["worst_cube"]["side"] == 2);
    CHECK(js["worst_cube"]["ratio"] == doctest::Approx(0.5));

    CounterRng rng2(67, "serialize", 1);
    auto a = gen_smooth(g, rng2);
    auto rep = oscillation_chain_check(a, LatticeSpec::lp(2.0), 0.5, default_t_grid());
    json jr = to_json(rep);
    CHECK(jr.contains("margins"));
    CHECK(jr["margins"].contains("i"));
    CHECK(jr["margins"].contains("iv"));
    CHECK(jr["constants"].contains("bmo_peak"));
    CHECK(jr["t_grid"].size() == default_t_grid().size());
    CHECK(jr["pass"] == rep.pass);

    DualityGapReport dg;
    dg.max_rel_gap = 0.01;
    dg.rows.push_back({1.0, 1.01, 0.0099});
    json jd = to_json(dg);
    CHECK(jd["rows"].size() == 1);
    CHECK(jd["rows"][0].size() == 3);
}

TEST_CASE("calibration constants store") {
    TempConstantsDir tmp;
    GridSpec g = torus1d(16, 8);
    auto X = LatticeSpec::power(LatticeSpec::lp(2.0), 0.5);

    CHECK(!lookup_sharp_constant(X, g).has_value());

    json c1;
    c1["sharp_domination"] = 1.25;
    save_calibration(calibration_key(X, g), c1, 7);
    auto got = lookup_sharp_constant(X, g);
    REQUIRE(got.has_value());
    CHECK(*got == doctest::Approx(1.25));

    // Same seed and inputs give a byte-identical constants block even when
    // the provenance timestamp differs.
    json all1 = load_constants_file();
    save_calibration(calibration_key(X, g), c1, 7);
    json all2 = load_constants_file();
    const std::string key = calibration_key(X, g);
    CHECK(all1.at(key).at("constants").dump() == all2.at(key).at("constants").dump());
    CHECK(all1.at(key).at("provenance").at("seed") ==
          all2.at(key).at("provenance").at("seed"));
    CHECK(all1.at(key).at("provenance").contains("timestamp"));
    CHECK(all1.at(key).at("provenance").at("version") == artifact_version);

    // A different grid or lattice does not collide.
    CHECK(!lookup_sharp_constant(X, torus1d(32, 8)).has_value());
    CHECK(!lookup_sharp_constant(LatticeSpec::lp(2.0), g).has_value());

    // Unrelated keys are preserved across saves.
    json c2;
    c2["sharp_domination"] = 2.5;
    save_calibration(calibration_key(LatticeSpec::lp(2.0), g), c2, 9);
    CHECK(*lookup_sharp_constant(X, g) == doctest::Approx(1.25));
    CHECK(*lookup_sharp_constant(LatticeSpec::lp(2.0), g) == doctest::Approx(2.5));
}
