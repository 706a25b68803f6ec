#include <doctest.h>
#include <harmlat/bmo.hpp>
#include <harmlat/random.hpp>

#include <cmath>

using namespace harmlat;

namespace {
GridSpec torus1d(int n, int smax) {
    return GridSpec{1, {n, 1}, 1.0, Boundary::torus, smax};
}
}  // namespace

TEST_CASE("bmo norm basics") {
    CHECK(bmo_norm(GridFunction::constant(torus1d(16, 8), 9.0)) == 0.0);
    auto f = GridFunction::real(torus1d(2, 2), {0.0, 2.0});
    CHECK(bmo_norm(f) == doctest::Approx(1.0));

    GridSpec g = torus1d(40, 20);
    for (std::uint64_t t = 0; t < 4; ++t) {
        CounterRng rng(29, "bmo-inv", t);
        auto h = gen_named(g, rng, static_cast<int>(t));
        double b = bmo_norm(h);
        CHECK(b >= 0.0);
        CHECK(b <= 2.0 * h.max_abs() * (1.0 + 1e-13));
        // Shifting by a constant preserves every oscillation.
        std::vector<double> sv = h.is_real() ? h.real_values() : h.abs_values();
        for (auto& x : sv) x += 17.0;
        CHECK(bmo_norm(GridFunction::real(g, std::move(sv))) ==
              doctest::Approx(bmo_norm(h.is_real()
                                           ? h
                                           : GridFunction::real(g, h.abs_values())))
                  .epsilon(1e-10));
        // Doubling doubles the norm exactly.
        std::vector<std::complex<double>> dv(h.values());
        for (auto& z : dv) z *= 2.0;
        CHECK(bmo_norm(GridFunction::complex_(g, std::move(dv))) ==
              2.0 * b);
    }
}

TEST_CASE("exceedance count minimization is exact") {
    // Values {0, 2}: a center at 1 covers both at radius 1, so exceedance is
    // 0 iff lambda >= 1. Cell-value centers alone would claim 1 at
    // lambda = 1.1; the interval-stabbing sweep must do better.
    CHECK(detail::min_exceedance_count({0.0, 2.0}, 1.1).first == 0);
    CHECK(detail::min_exceedance_count({0.0, 2.0}, 0.9).first == 1);
    // The returned center must realize the count.
    auto [cnt, c] = detail::min_exceedance_count({0.0, 2.0}, 1.1);
    int realized = 0;
    for (double v : {0.0, 2.0})
        if (std::abs(v - c) > 1.1) ++realized;
    CHECK(realized == cnt);
    // Separated clusters: {0, 0, 10}: radius 1 keeps one cluster.
    CHECK(detail::min_exceedance_count({0.0, 0.0, 10.0}, 1.0).first == 1);
    CHECK(detail::min_exceedance_count({5.0}, 0.1).first == 0);
}

TEST_CASE("level-set oscillation test frozen example") {
    auto f = GridFunction::real(torus1d(2, 2), {0.0, 2.0});
    // lambda below the half-gap: the size-2 cube keeps one exceeding cell,
    // ratio 1/2 > gamma.
    auto fail = stromberg_test(f, 0.9, 0.4);
    CHECK(!fail.pass);
    CHECK(fail.worst_ratio == doctest::Approx(0.5));
    CHECK(fail.worst_cube.side == 2);
    CHECK(fail.worst_exceed == 1);
    CHECK(fail.worst_cells == 2);
    // lambda at the half-gap: the midpoint center clears every cube.
    auto pass = stromberg_test(f, 1.0, 0.4);
    CHECK(pass.pass);
    CHECK(pass.worst_ratio == 0.0);

    CHECK_THROWS_AS(stromberg_test(f, 0.0, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(stromberg_test(f, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(stromberg_test(f, 1.0, 0.0), std::invalid_argument);
    auto c = GridFunction::complex_(torus1d(2, 2), {{0.0, 1.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(stromberg_test(c, 1.0, 0.4), std::invalid_argument);
}

TEST_CASE("level-set oscillation test passes above the Chebyshev level") {
    // With c the cube mean, the exceedance fraction at level b/gamma is at
    // most gamma by Chebyshev, where b bounds the mean oscillation.
    GridSpec g = torus1d(32, 16);
    for (std::uint64_t t = 0; t < 5; ++t) {
        CounterRng rng(31, "stromberg", t);
        auto f = gen_named(g, rng, static_cast<int>(t));
        double b = bmo_norm(f);
        if (b == 0.0) continue;
        for (double gamma : {0.1, 0.3, 0.45}) {
            auto res = stromberg_test(f, b / gamma + 1e-9, gamma);
            CHECK(res.pass);
        }
    }
    // Constants pass at any level.
    CHECK(stromberg_test(GridFunction::constant(g, 3.0), 0.01, 0.1).pass);
}

TEST_CASE("contraction maps") {
    auto root = ContractionMap::power_root(0.5);
    CHECK(root(4.0) == doctest::Approx(2.0));
    CHECK(root(0.25) == doctest::Approx(0.25));  // identity below 1
    CHECK(root(-3.0) == doctest::Approx(-3.0));
    auto cap = ContractionMap::cap(2.0);
    CHECK(cap(5.0) == doctest::Approx(2.0));
    CHECK(cap(1.5) == doctest::Approx(1.5));
    CHECK(root.name() == "root:0.5");
    CHECK(cap.name() == "cap:2");
    CHECK_THROWS_AS(ContractionMap::power_root(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ContractionMap::power_root(1.5), std::invalid_argument);
    CHECK_THROWS_AS(
        ContractionMap::cap(std::numeric_limits<double>::infinity()),
        std::invalid_argument);

    // 1-Lipschitz sanity on sampled pairs.
    CounterRng rng(37, "lip", 0);
    for (int i = 0; i < 200; ++i) {
        double a = rng.uniform(-5.0, 5.0), b = rng.uniform(-5.0, 5.0);
        CHECK(std::abs(root(a) - root(b)) <= std::abs(a - b) + 1e-12);
        CHECK(std::abs(cap(a) - cap(b)) <= std::abs(a - b) + 1e-12);
    }
}

TEST_CASE("contractions do not increase minimal exceedance counts") {
    GridSpec g = torus1d(24, 12);
    for (std::uint64_t t = 0; t < 6; ++t) {
        CounterRng rng(41, "contract", t);
        auto f = gen_named(g, rng, static_cast<int>(t));
        for (double lam : {0.2, 0.7, 1.5}) {
            CHECK(contraction_oscillation_check(f, ContractionMap::power_root(0.6),
                                                lam));
            CHECK(contraction_oscillation_check(f, ContractionMap::cap(1.0), lam));
        }
    }
    auto f = GridFunction::real(torus1d(2, 2), {0.0, 2.0});
    CHECK_THROWS_AS(
        contraction_oscillation_check(f, ContractionMap::cap(1.0), 0.0),
        std::invalid_argument);
}

TEST_CASE("power bmo decomposition") {
    GridSpec g = torus1d(32, 16);
    auto flat = power_bmo_report(GridFunction::constant(g, 5.0), 0.5);
    CHECK(flat.bmo_f == 0.0);
    // 5^alpha is not exactly representable, so cube averages of the powered
    // constant can wobble by an ulp; only the unpowered bmo is exactly zero.
    CHECK(flat.bmo_f_alpha <= 1e-12);
    CHECK(flat.ratio == 0.0);
    CHECK(flat.decomposition_holds);

    for (std::uint64_t t = 0; t < 5; ++t) {
        CounterRng rng(43, "power-bmo", t);
        auto f = gen_lognormal(g, rng);
        for (double alpha : {0.3, 0.5, 0.9, 1.0}) {
            auto rep = power_bmo_report(f, alpha);
            CHECK(rep.decomposition_holds);
            CHECK(rep.bmo_f_alpha <= rep.bound + 1e-12);
            CHECK(rep.bound == doctest::Approx(rep.bmo_capped_alpha + 2.0));
            if (alpha == 1.0) {
                CHECK(rep.bmo_f_alpha == doctest::Approx(rep.bmo_f));
                CHECK(rep.ratio == doctest::Approx(1.0));
            }
        }
    }
    CHECK_THROWS_AS(power_bmo_report(GridFunction::constant(g, 1.0), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(power_bmo_report(GridFunction::constant(g, 1.0), 1.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(power_bmo_report(GridFunction::constant(g, -1.0), 0.5),
                    std::domain_error);
}
