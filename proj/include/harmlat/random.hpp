#pragma once

// Deterministic counter-based random streams. A stream is identified by
// (seed, suite label, trial index); the i-th draw is a pure function of the
// stream key and the counter, so replays and parallel evaluation cannot
// change results. Only integer mixing plus libm transcendentals are used,
// which keeps reports byte-stable in a fixed floating-point environment.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "grid.hpp"

namespace harmlat {

namespace detail {
inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace detail

class CounterRng {
public:
    CounterRng(std::uint64_t seed, const std::string& suite, std::uint64_t trial) {
        std::uint64_t h = 1469598103934665603ull;
        h = detail::fnv1a(h, &seed, sizeof(seed));
        h = detail::fnv1a(h, suite.data(), suite.size());
        h = detail::fnv1a(h, &trial, sizeof(trial));
        key_ = detail::splitmix(h);
    }

    std::uint64_t next_u64() { return detail::splitmix(key_ ^ (ctr_++ * 0x9e3779b97f4a7c15ull)); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; two draws per call, no cached state.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::int64_t below(std::int64_t n) {
        return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
};

// ---- named sample distributions -------------------------------------------
//
// Three families cover the textures the invariant suites need: heavy-tailed
// cellwise noise, sparse spikes, and smooth low-frequency mixtures. Complex
// variants attach random phases.

inline GridFunction gen_lognormal(const GridSpec& g, CounterRng& rng, double sigma = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(g.cell_count()));
    for (auto& x : v) x = std::exp(sigma * rng.normal());
    return GridFunction::real(g, std::move(v));
}

inline GridFunction gen_spikes(const GridSpec& g, CounterRng& rng, int count = 0) {
    std::int64_t n = g.cell_count();
    if (count <= 0) count = static_cast<int>(std::max<std::int64_t>(1, n / 32));
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < count; ++k) {
        std::int64_t cell = rng.below(n);
        double height = std::exp(rng.uniform(-1.0, 3.0));
        double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        v[static_cast<std::size_t>(cell)] += sign * height;
    }
    return GridFunction::real(g, std::move(v));
}

/// Sum of a few low-frequency torus harmonics with random amplitudes and
/// phases; wavelengths span the grid so samples vary slowly cell to cell.
inline GridFunction gen_smooth(const GridSpec& g, CounterRng& rng, int modes = 3) {
    std::int64_t n = g.cell_count();
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    const double tau = 6.283185307179586476925286766559;
    for (int m = 0; m < modes; ++m) {
        double amp = std::exp(rng.uniform(-0.5, 1.0));
        int k0 = 1 + static_cast<int>(rng.below(4));
        int k1 = g.dim == 2 ? 1 + static_cast<int>(rng.below(4)) : 0;
        double phase = rng.uniform(0.0, tau);
        for (std::int64_t i = 0; i < n; ++i) {
            auto c = g.coords(i);
            double arg = tau * k0 * c[0] / g.sides[0] + phase;
            if (g.dim == 2) arg += tau * k1 * c[1] / g.sides[1];
            v[static_cast<std::size_t>(i)] += amp * std::cos(arg);
        }
    }
    return GridFunction::real(g, std::move(v));
}

/// Cycles through the three named distributions by trial index.
inline GridFunction gen_named(const GridSpec& g, CounterRng& rng, int which) {
    switch (which % 3) {
        case 0: return gen_lognormal(g, rng);
        case 1: return gen_spikes(g, rng);
        default: return gen_smooth(g, rng);
    }
}

inline GridFunction with_random_phases(const GridFunction& f, CounterRng& rng) {
    std::vector<std::complex<double>> v(static_cast<std::size_t>(f.size()));
    const double tau = 6.283185307179586476925286766559;
    for (std::int64_t i = 0; i < f.size(); ++i) {
        double ph = rng.uniform(0.0, tau);
        v[static_cast<std::size_t>(i)] =
            f[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return GridFunction::complex_(f.grid(), std::move(v));
}

inline GridFunction mean_zero(const GridFunction& f) {
    std::complex<double> mu = f.mean();
    std::vector<std::complex<double>> v(static_cast<std::size_t>(f.size()));
    for (std::int64_t i = 0; i < f.size(); ++i) v[static_cast<std::size_t>(i)] = f[i] - mu;
    return GridFunction::complex_(f.grid(), std::move(v));
}

/// Fixed adversarial probes used by every operator-norm and calibration
/// sweep: indicators of dyadic blocks, a single spike and a two-level step.
/// They are deterministic, so two runs with equal config see equal probes.
inline std::vector<GridFunction> deterministic_probes(const GridSpec& g) {
    std::int64_t n = g.cell_count();
    std::vector<GridFunction> out;
    {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        v[0] = 1.0;
        out.push_back(GridFunction::real(g, std::move(v)));
    }
    for (std::int64_t len = 2; len <= n / 2; len *= 4) {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        for (std::int64_t i = 0; i < len; ++i) v[static_cast<std::size_t>(i)] = 1.0;
        out.push_back(GridFunction::real(g, std::move(v)));
    }
    if (n >= 2) {
        std::vector<double> v(static_cast<std::size_t>(n), 1.0);
        for (std::int64_t i = 0; i < n / 2; ++i) v[static_cast<std::size_t>(i)] = 2.0;
        out.push_back(GridFunction::real(g, std::move(v)));
        std::vector<double> alt(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) alt[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 1.0 : -1.0;
        out.push_back(GridFunction::real(g, std::move(alt)));
    }
    return out;
}

}  // namespace harmlat
