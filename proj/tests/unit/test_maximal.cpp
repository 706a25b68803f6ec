#include <doctest.h>
#include <harmlat/maximal.hpp>
#include <harmlat/random.hpp>

#include <cmath>

using namespace harmlat;

namespace {
GridSpec torus1d(int n, int smax) {
    return GridSpec{1, {n, 1}, 1.0, Boundary::torus, smax};
}

void check_close_normalized(const GridFunction& a, const GridFunction& b,
                            double tol) {
    REQUIRE(a.size() == b.size());
    double scale = std::max(1.0, std::max(a.max_abs(), b.max_abs()));
    for (std::int64_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i] - b[i]) <= tol * scale);
    }
}
}  // namespace

TEST_CASE("maximal function of a unit spike") {
    auto f = GridFunction::real(torus1d(4, 4), {1.0, 0.0, 0.0, 0.0});
    auto m = hl_maximal(f);
    // Cell 0 sees the singleton; cells 1 and 3 a side-2 cube; cell 2 a
    // side-3 cube.
    CHECK(m[0].real() == doctest::Approx(1.0));
    CHECK(m[1].real() == doctest::Approx(0.5));
    CHECK(m[2].real() == doctest::Approx(1.0 / 3.0));
    CHECK(m[3].real() == doctest::Approx(0.5));
    auto mf = hl_maximal_fast(f);
    check_close_normalized(m, mf, 1e-14);
}

TEST_CASE("maximal function invariants") {
    GridSpec g = torus1d(48, 16);
    for (std::uint64_t t = 0; t < 6; ++t) {
        CounterRng rng(31, "max-inv", t);
        auto f = gen_named(g, rng, static_cast<int>(t));
        auto m = hl_maximal(f);
        // Dominates |f| pointwise; bounded by the sup.
        for (std::int64_t i = 0; i < f.size(); ++i) {
            CHECK(m[i].real() >= std::abs(f[i]) - 1e-13 * f.max_abs());
            CHECK(m[i].real() <= f.max_abs() * (1.0 + 1e-13));
        }
        // Doubling the input doubles the output exactly.
        std::vector<std::complex<double>> dv(f.values());
        for (auto& z : dv) z *= 2.0;
        auto m2 = hl_maximal(GridFunction::complex_(g, std::move(dv)));
        for (std::int64_t i = 0; i < f.size(); ++i) {
            CHECK(m2[i].real() == 2.0 * m[i].real());
        }
    }
    auto c = hl_maximal(GridFunction::constant(g, 3.25));
    for (std::int64_t i = 0; i < c.size(); ++i) CHECK(c[i].real() == 3.25);
}

TEST_CASE("fast kernel matches the reference on the torus") {
    // 1-D
    {
        GridSpec g = torus1d(64, 64);
        CounterRng rng(7, "fastmax", 0);
        auto f = gen_lognormal(g, rng);
        check_close_normalized(hl_maximal(f), hl_maximal_fast(f), 1e-12);
    }
    // 2-D, non-square, non-unit spacing
    {
        GridSpec g{2, {12, 8}, 0.5, Boundary::torus, 6};
        CounterRng rng(7, "fastmax", 1);
        auto f = gen_spikes(g, rng, 9);
        check_close_normalized(hl_maximal(f), hl_maximal_fast(f), 1e-12);
    }
    // The fast kernel is torus-only by contract.
    GridSpec gz{1, {8, 1}, 1.0, Boundary::zero_extend, 4};
    CHECK_THROWS_AS(hl_maximal_fast(GridFunction::constant(gz, 1.0)),
                    std::runtime_error);
}

TEST_CASE("parallel evaluation is bitwise reproducible") {
    GridSpec g{2, {10, 10}, 1.0, Boundary::torus, 7};
    CounterRng rng(13, "par", 0);
    auto f = with_random_phases(gen_smooth(g, rng), rng);
    auto check_pair = [](const GridFunction& a, const GridFunction& b) {
        for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    };
    check_pair(hl_maximal(f, 1), hl_maximal(f, 4));
    check_pair(sharp_maximal(f, 1), sharp_maximal(f, 4));
    check_pair(local_sharp_maximal(f, 0.3, 1), local_sharp_maximal(f, 0.3, 4));
}

TEST_CASE("sharp maximal on a two-cell step") {
    auto f = GridFunction::real(torus1d(2, 2), {0.0, 2.0});
    auto s = sharp_maximal(f);
    // Only the full cube oscillates: mean 1, average deviation 1.
    CHECK(s[0].real() == doctest::Approx(1.0));
    CHECK(s[1].real() == doctest::Approx(1.0));

    auto z = sharp_maximal(GridFunction::constant(torus1d(8, 4), 5.0));
    for (std::int64_t i = 0; i < z.size(); ++i) CHECK(z[i].real() == 0.0);
}

TEST_CASE("sharp maximal sees the zero extension at the boundary") {
    // A constant is not oscillation-free near the edge when cubes overhang:
    // the overhanging half of a side-2 cube carries the value 0.
    GridSpec g{1, {4, 1}, 1.0, Boundary::zero_extend, 2};
    auto s = sharp_maximal(GridFunction::constant(g, 1.0));
    CHECK(s[0].real() == doctest::Approx(0.5));
    CHECK(s[1].real() == doctest::Approx(0.0));
    CHECK(s[2].real() == doctest::Approx(0.0));
    CHECK(s[3].real() == doctest::Approx(0.5));
}

TEST_CASE("sharp maximal bounds") {
    GridSpec g = torus1d(40, 20);
    for (std::uint64_t t = 0; t < 4; ++t) {
        CounterRng rng(17, "sharp-inv", t);
        auto f = gen_named(g, rng, static_cast<int>(t));
        auto s = sharp_maximal(f);
        auto m = hl_maximal(f);
        for (std::int64_t i = 0; i < f.size(); ++i) {
            // avg|f - mu| <= avg|f| + |mu| <= 2 Mf on each cube.
            CHECK(s[i].real() <= 2.0 * m[i].real() * (1.0 + 1e-13));
            CHECK(s[i].real() >= 0.0);
        }
    }
}

TEST_CASE("local sharp maximal exact small cases") {
    auto f = GridFunction::real(torus1d(2, 2), {0.0, 2.0});
    // lambda = 0.4: no cell of the full cube may be discarded, best center 1.
    auto a = local_sharp_maximal(f, 0.4);
    CHECK(a[0].real() == doctest::Approx(1.0));
    CHECK(a[1].real() == doctest::Approx(1.0));
    // lambda = 0.6: one of the two cells may be discarded, so the cost is 0.
    auto b = local_sharp_maximal(f, 0.6);
    CHECK(b[0].real() == doctest::Approx(0.0));
    CHECK(b[1].real() == doctest::Approx(0.0));

    CHECK_THROWS_AS(local_sharp_maximal(f, 0.0), std::domain_error);
    CHECK_THROWS_AS(local_sharp_maximal(f, 1.0), std::domain_error);
    CHECK_THROWS_AS(local_sharp_maximal(f, -0.2), std::domain_error);
}

TEST_CASE("local sharp maximal inequalities") {
    GridSpec g = torus1d(32, 16);
    for (std::uint64_t t = 0; t < 4; ++t) {
        CounterRng rng(23, "local-inv", t);
        GridFunction f = gen_named(g, rng, static_cast<int>(t));
        if (t == 3) f = with_random_phases(f, rng);
        auto s = sharp_maximal(f);
        for (double lam : {0.2, 0.5, 0.8}) {
            auto l = local_sharp_maximal(f, lam);
            for (std::int64_t i = 0; i < f.size(); ++i) {
                // Chebyshev with the cube mean as center.
                CHECK(l[i].real() <= s[i].real() / lam + 1e-12);
            }
        }
        // Monotone in lambda: discarding more cells cannot raise the value.
        auto l1 = local_sharp_maximal(f, 0.25);
        auto l2 = local_sharp_maximal(f, 0.75);
        for (std::int64_t i = 0; i < f.size(); ++i) {
            CHECK(l2[i].real() <= l1[i].real() + 1e-13);
        }
    }
}

TEST_CASE("rearrangement step function") {
    auto f = GridFunction::real(torus1d(3, 1), {3.0, -1.0, 2.0});
    StepFunction s = rearrangement(f);
    CHECK(s.levels == std::vector<double>{3.0, 2.0, 1.0});
    CHECK(s.value_at(0.0) == 3.0);
    CHECK(s.value_at(0.5) == 3.0);
    CHECK(s.value_at(2.9) == 1.0);
    // At and beyond the last breakpoint the tail level persists.
    CHECK(s.value_at(3.0) == 1.0);
    CHECK(s.integral() == doctest::Approx(6.0));
    CHECK(s.total_measure() == doctest::Approx(3.0));
    CHECK_THROWS_AS(s.value_at(-0.1), std::domain_error);
    CHECK(s0_tail(f) == doctest::Approx(1.0));

    // Non-unit spacing scales breakpoints by the cell measure.
    auto h = GridFunction::real(GridSpec{1, {2, 1}, 0.5, Boundary::torus, 1},
                                {1.0, 4.0});
    StepFunction sh = rearrangement(h);
    CHECK(sh.value_at(0.49) == 4.0);
    CHECK(sh.value_at(0.51) == 1.0);
    CHECK(sh.integral() == doctest::Approx(2.5));
}
