#pragma once

// Cube maximal operators: the Hardy-Littlewood maximal function over the
// bounded-side cube family, its O(cells * max_side) torus kernel, the mean
// oscillation (sharp) maximal function, the local quantile variant, and
// nonincreasing rearrangements.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <thread>

#include "grid.hpp"

namespace harmlat {

namespace detail {

/// out[x] = max(out[x], max over anchors a in [x-s+1, x] mod n of d[a]).
/// Monotone-deque sliding maximum over the circularly doubled index range.
inline void combine_window_max_1d(int n, int s, const std::vector<double>& d,
                                  std::vector<double>& out) {
    std::deque<int> dq;
    for (int j = 0; j < n + s - 1; ++j) {
        int idx = j % n;
        while (!dq.empty() && d[dq.back() % n] <= d[idx]) dq.pop_back();
        dq.push_back(j);
        while (dq.front() < j - s + 1) dq.pop_front();
        if (j >= s - 1) {
            int x = j % n;
            out[x] = std::max(out[x], d[dq.front() % n]);
        }
    }
}

/// Row-then-column separable variant for 2-D anchors.
inline void combine_window_max_2d(int n0, int n1, int s, const std::vector<double>& d,
                                  std::vector<double>& out) {
    std::vector<double> rows(static_cast<std::size_t>(n0) * n1,
                             -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n0; ++i) {
        const double* src = d.data() + static_cast<std::size_t>(i) * n1;
        std::vector<double> lane(src, src + n1);
        std::vector<double> acc(static_cast<std::size_t>(n1),
                                -std::numeric_limits<double>::infinity());
        combine_window_max_1d(n1, s, lane, acc);
        std::copy(acc.begin(), acc.end(),
                  rows.begin() + static_cast<std::size_t>(i) * n1);
    }
    for (int j = 0; j < n1; ++j) {
        std::vector<double> lane(static_cast<std::size_t>(n0));
        for (int i = 0; i < n0; ++i) lane[i] = rows[static_cast<std::size_t>(i) * n1 + j];
        std::vector<double> acc(static_cast<std::size_t>(n0),
                                -std::numeric_limits<double>::infinity());
        combine_window_max_1d(n0, s, lane, acc);
        for (int i = 0; i < n0; ++i) {
            auto& o = out[static_cast<std::size_t>(i) * n1 + j];
            o = std::max(o, acc[i]);
        }
    }
}

template <typename Fn>
inline void parallel_chunks(std::int64_t count, int n_threads, Fn&& fn) {
    if (n_threads <= 1 || count < 2) {
        fn(0, count, 0);
        return;
    }
    int t = std::min<std::int64_t>(n_threads, count);
    std::vector<std::thread> pool;
    std::int64_t chunk = (count + t - 1) / t;
    for (int i = 0; i < t; ++i) {
        std::int64_t lo = i * chunk;
        std::int64_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi, i] { fn(lo, hi, i); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Mf(x) = max over cubes Q containing x of the average of |f| over Q.
/// Reference implementation: enumerates the cube family and scatters each
/// cube average to its member cells. Work may be split across threads; the
/// result is independent of the split because max is order-free.
inline GridFunction hl_maximal(const GridFunction& f, int n_threads = 1) {
    const GridSpec& g = f.grid();
    std::vector<double> af = f.abs_values();
    std::vector<Cube> cubes = cube_family(g);
    std::size_t n = af.size();

    int t = std::max(1, n_threads);
    std::vector<std::vector<double>> partial(
        static_cast<std::size_t>(t), std::vector<double>(n, 0.0));
    detail::parallel_chunks(
        static_cast<std::int64_t>(cubes.size()), t,
        [&](std::int64_t lo, std::int64_t hi, int tid) {
            auto& out = partial[static_cast<std::size_t>(tid)];
            for (std::int64_t c = lo; c < hi; ++c) {
                const Cube& q = cubes[static_cast<std::size_t>(c)];
                double sum = 0.0;
                for_each_cube_cell(g, q, [&](std::int64_t i) { sum += af[static_cast<std::size_t>(i)]; });
                double cells = 1.0;
                for (int a = 0; a < g.dim; ++a) cells *= q.side;
                double avg = sum / cells;
                for_each_cube_cell(g, q, [&](std::int64_t i) {
                    auto& o = out[static_cast<std::size_t>(i)];
                    o = std::max(o, avg);
                });
            }
        });
    std::vector<double> out = std::move(partial[0]);
    for (int i = 1; i < t; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] = std::max(out[j], partial[static_cast<std::size_t>(i)][j]);
    return GridFunction::real(g, std::move(out));
}

/// Same operator, computed with prefix sums and per-side sliding-window
/// maxima in O(cells * max_cube_side). Torus only; other boundary modes
/// fall back to hl_maximal by design and this kernel refuses them.
inline GridFunction hl_maximal_fast(const GridFunction& f) {
    const GridSpec& g = f.grid();
    if (g.boundary != Boundary::torus)
        throw std::runtime_error(
            "hl_maximal_fast: unimplemented for zero_extend boundaries, use hl_maximal");
    std::vector<double> af = f.abs_values();
    PrefixSums ps(g, af);
    // Side 1 is seeded directly: the singleton average is |f| itself, and
    // recovering it from prefix differences would round it below |f| by an
    // ulp, breaking exact pointwise domination.
    std::vector<double> out = af;
    if (g.dim == 1) {
        int n = g.sides[0];
        std::vector<double> d(static_cast<std::size_t>(n));
        for (int s = 2; s <= g.max_cube_side; ++s) {
            for (int a = 0; a < n; ++a)
                d[static_cast<std::size_t>(a)] = ps.cube_sum(Cube{{a, 0}, s}) / s;
            detail::combine_window_max_1d(n, s, d, out);
        }
    } else {
        int n0 = g.sides[0], n1 = g.sides[1];
        std::vector<double> d(static_cast<std::size_t>(n0) * n1);
        for (int s = 2; s <= g.max_cube_side; ++s) {
            double cells = static_cast<double>(s) * s;
            for (int a0 = 0; a0 < n0; ++a0)
                for (int a1 = 0; a1 < n1; ++a1)
                    d[static_cast<std::size_t>(a0) * n1 + a1] =
                        ps.cube_sum(Cube{{a0, a1}, s}) / cells;
            detail::combine_window_max_2d(n0, n1, s, d, out);
        }
    }
    return GridFunction::real(g, std::move(out));
}

/// f#(x) = sup over cubes Q containing x of avg_Q |f - f_Q|. The zero
/// extension is taken literally: overhanging cells carry the value 0, so
/// they contribute |f_Q| to the oscillation and dilute the mean.
inline GridFunction sharp_maximal(const GridFunction& f, int n_threads = 1) {
    const GridSpec& g = f.grid();
    const auto& vals = f.values();
    std::vector<Cube> cubes = cube_family(g);
    std::size_t n = vals.size();

    int t = std::max(1, n_threads);
    std::vector<std::vector<double>> partial(
        static_cast<std::size_t>(t), std::vector<double>(n, 0.0));
    detail::parallel_chunks(
        static_cast<std::int64_t>(cubes.size()), t,
        [&](std::int64_t lo, std::int64_t hi, int tid) {
            auto& out = partial[static_cast<std::size_t>(tid)];
            for (std::int64_t c = lo; c < hi; ++c) {
                const Cube& q = cubes[static_cast<std::size_t>(c)];
                double cells = 1.0;
                for (int a = 0; a < g.dim; ++a) cells *= q.side;
                std::complex<double> sum{0.0, 0.0};
                std::int64_t off =
                    for_each_cube_cell(g, q, [&](std::int64_t i) { sum += vals[static_cast<std::size_t>(i)]; });
                std::complex<double> mu = sum / cells;
                double osc = 0.0;
                for_each_cube_cell(g, q, [&](std::int64_t i) {
                    osc += std::abs(vals[static_cast<std::size_t>(i)] - mu);
                });
                osc += static_cast<double>(off) * std::abs(mu);
                osc /= cells;
                for_each_cube_cell(g, q, [&](std::int64_t i) {
                    auto& o = out[static_cast<std::size_t>(i)];
                    o = std::max(o, osc);
                });
            }
        });
    std::vector<double> out = std::move(partial[0]);
    for (int i = 1; i < t; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] = std::max(out[j], partial[static_cast<std::size_t>(i)][j]);
    return GridFunction::real(g, std::move(out));
}

namespace detail {

/// Exact inf over real centers c of the (k+1)-th largest |v_i - c|:
/// the optimum keeps the m-k closest samples, which form a window of
/// consecutive sorted values, and centers c at the window midpoint.
inline double quantile_center_min_real(std::vector<double>& v, std::int64_t k) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size();
    std::size_t w = m - static_cast<std::size_t>(k);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + w <= m; ++j)
        best = std::min(best, (v[j + w - 1] - v[j]) / 2.0);
    return best;
}

inline double kth_largest_distance(const std::vector<std::complex<double>>& v,
                                   std::complex<double> c, std::int64_t k) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = std::abs(v[i] - c);
    std::nth_element(d.begin(), d.begin() + k, d.end(), std::greater<double>());
    return d[static_cast<std::size_t>(k)];
}

}  // namespace detail

/// Local sharp maximal function: at x, the sup over cubes Q containing x of
///   inf_c ((f - c) 1_Q)^* (lambda |Q|),
/// the rearrangement evaluated at fraction lambda of the cube measure. For
/// real data the inner inf over c is exact (sorted-window sweep); for complex
/// data it is minimized over cell values plus the cube mean, which is an
/// upper bound sufficient for every inequality asserted about this operator.
inline GridFunction local_sharp_maximal(const GridFunction& f, double lambda,
                                        int n_threads = 1) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::domain_error("local_sharp_maximal: lambda must lie in (0,1)");
    const GridSpec& g = f.grid();
    const auto& vals = f.values();
    const bool real_data = f.is_real();
    std::vector<Cube> cubes = cube_family(g);
    std::size_t n = vals.size();

    int t = std::max(1, n_threads);
    std::vector<std::vector<double>> partial(
        static_cast<std::size_t>(t), std::vector<double>(n, 0.0));
    detail::parallel_chunks(
        static_cast<std::int64_t>(cubes.size()), t,
        [&](std::int64_t lo, std::int64_t hi, int tid) {
            auto& out = partial[static_cast<std::size_t>(tid)];
            for (std::int64_t c = lo; c < hi; ++c) {
                const Cube& q = cubes[static_cast<std::size_t>(c)];
                std::int64_t m = 1;
                for (int a = 0; a < g.dim; ++a) m *= q.side;
                std::int64_t k = static_cast<std::int64_t>(std::floor(lambda * static_cast<double>(m)));
                k = std::min(k, m - 1);
                double val;
                if (real_data) {
                    std::vector<double> cv;
                    cv.reserve(static_cast<std::size_t>(m));
                    std::int64_t off = for_each_cube_cell(
                        g, q, [&](std::int64_t i) { cv.push_back(vals[static_cast<std::size_t>(i)].real()); });
                    for (std::int64_t i = 0; i < off; ++i) cv.push_back(0.0);
                    val = detail::quantile_center_min_real(cv, k);
                } else {
                    std::vector<std::complex<double>> cv;
                    cv.reserve(static_cast<std::size_t>(m));
                    std::int64_t off = for_each_cube_cell(
                        g, q, [&](std::int64_t i) { cv.push_back(vals[static_cast<std::size_t>(i)]); });
                    for (std::int64_t i = 0; i < off; ++i) cv.emplace_back(0.0, 0.0);
                    std::complex<double> mu{0.0, 0.0};
                    for (const auto& z : cv) mu += z;
                    mu /= static_cast<double>(m);
                    val = detail::kth_largest_distance(cv, mu, k);
                    for (const auto& z : cv)
                        val = std::min(val, detail::kth_largest_distance(cv, z, k));
                }
                for_each_cube_cell(g, q, [&](std::int64_t i) {
                    auto& o = out[static_cast<std::size_t>(i)];
                    o = std::max(o, val);
                });
            }
        });
    std::vector<double> out = std::move(partial[0]);
    for (int i = 1; i < t; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] = std::max(out[j], partial[static_cast<std::size_t>(i)][j]);
    return GridFunction::real(g, std::move(out));
}

/// Right-continuous step function on [0, total measure), constant on cell
/// measure intervals. Evaluation at or past the last breakpoint returns the
/// final (smallest) level, so value_at(total) is the tail level.
struct StepFunction {
    double cell_measure = 1.0;
    std::vector<double> levels;  // nonincreasing

    double value_at(double t) const {
        if (t < 0.0) throw std::domain_error("StepFunction: negative argument");
        if (levels.empty()) return 0.0;
        auto idx = static_cast<std::int64_t>(std::floor(t / cell_measure));
        idx = std::min<std::int64_t>(idx, static_cast<std::int64_t>(levels.size()) - 1);
        return levels[static_cast<std::size_t>(idx)];
    }

    double integral() const {
        double s = 0.0;
        for (double v : levels) s += v;
        return s * cell_measure;
    }

    double total_measure() const { return cell_measure * static_cast<double>(levels.size()); }
};

/// Nonincreasing rearrangement of |f|; ties keep cell order.
inline StepFunction rearrangement(const GridFunction& f) {
    StepFunction s;
    s.cell_measure = f.grid().cell_measure();
    s.levels = f.abs_values();
    std::stable_sort(s.levels.begin(), s.levels.end(), std::greater<double>());
    return s;
}

/// Tail value of the rearrangement at the full grid measure, i.e. min |f|.
inline double s0_tail(const GridFunction& f) {
    return rearrangement(f).value_at(f.grid().total_measure());
}

}  // namespace harmlat
