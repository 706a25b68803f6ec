#pragma once

// Muckenhoupt weight machinery: A1/Ap characteristics, the Rubio de Francia
// majorant series, maximal-power weights (Mf)^q, reverse Holder ladder
// search, the constructive majorant for products with an L1 factor, and the
// inverse-weight check. Cube scans on zero-extended grids use interior cubes
// only; the maximal operator itself keeps its zero-extension convention.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "lattice.hpp"
#include "maximal.hpp"
#include "random.hpp"

namespace harmlat {

/// Strictly positive real grid function.
class Weight {
public:
    explicit Weight(GridFunction f) : fn_(std::move(f)) {
        if (!fn_.is_real())
            throw std::domain_error("Weight: values must be real");
        for (std::int64_t i = 0; i < fn_.size(); ++i)
            if (!(fn_[i].real() > 0.0) || !std::isfinite(fn_[i].real()))
                throw std::domain_error("Weight: values must be strictly positive and finite");
    }
    const GridFunction& fn() const { return fn_; }
    const GridSpec& grid() const { return fn_.grid(); }

private:
    GridFunction fn_;
};

struct A1Certificate {
    Weight majorant;
    GridFunction majorized;
    double a1_const = 1.0;
    double norm_ratio = 1.0;
    std::vector<std::pair<std::string, double>> parameters;
    std::string digest;
};

namespace detail {

inline GridFunction maximal_of(const GridFunction& f, int n_threads = 1) {
    if (f.grid().boundary == Boundary::torus) return hl_maximal_fast(f);
    return hl_maximal(f, n_threads);
}

/// Calls fn(side, anchor-cube) for every cube used in characteristic scans:
/// all cubes on the torus, fully interior cubes under zero extension.
template <typename Fn>
inline void for_each_scan_cube(const GridSpec& g, Fn&& fn) {
    for (int s = 1; s <= g.max_cube_side; ++s) {
        if (g.dim == 1) {
            int lim = g.boundary == Boundary::torus ? g.sides[0] : g.sides[0] - s + 1;
            for (int a = 0; a < lim; ++a) fn(Cube{{a, 0}, s});
        } else {
            int lim0 = g.boundary == Boundary::torus ? g.sides[0] : g.sides[0] - s + 1;
            int lim1 = g.boundary == Boundary::torus ? g.sides[1] : g.sides[1] - s + 1;
            for (int a0 = 0; a0 < lim0; ++a0)
                for (int a1 = 0; a1 < lim1; ++a1) fn(Cube{{a0, a1}, s});
        }
    }
}

inline std::vector<double> abs_pow(const GridFunction& f, double e) {
    std::vector<double> v = f.abs_values();
    for (auto& x : v) x = std::pow(x, e);
    return v;
}

}  // namespace detail

/// max over cells of (Mw)(x)/w(x); equals 1 exactly when w is constant.
inline double a1_constant(const Weight& w, int n_threads = 1) {
    GridFunction mw = detail::maximal_of(w.fn(), n_threads);
    double c = 0.0;
    for (std::int64_t i = 0; i < mw.size(); ++i)
        c = std::max(c, mw[i].real() / w.fn()[i].real());
    return c;
}

/// Classical characteristic sup_Q (avg_Q w) (avg_Q w^{1/(1-p)})^{p-1}.
inline double ap_constant(const Weight& w, double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::domain_error("ap_constant: p must lie in (1, inf)");
    const GridSpec& g = w.grid();
    PrefixSums pw(g, w.fn().real_values());
    PrefixSums ps(g, detail::abs_pow(w.fn(), 1.0 / (1.0 - p)));
    double best = 0.0;
    detail::for_each_scan_cube(g, [&](const Cube& q) {
        double cells = std::pow(static_cast<double>(q.side), g.dim);
        double aw = pw.cube_sum(q) / cells;
        double as = ps.cube_sum(q) / cells;
        best = std::max(best, aw * std::pow(as, p - 1.0));
    });
    return best;
}

/// Rubio de Francia majorant w = sum_k M^k |f| / (2 m_norm)^k, truncated
/// once the next term is below eps*w pointwise. The caller vouches that
/// m_norm dominates the norm of M on X (probe a lower bound and add a
/// safety factor); a bad bound shows up as non-decaying terms and raises.
inline A1Certificate rubio_majorant(const GridFunction& f, const LatticeSpec& X,
                                    double m_norm, double eps = 1e-10) {
    if (!(m_norm > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("rubio_majorant: m_norm and eps must be positive");
    if (f.max_abs() == 0.0)
        throw std::domain_error("rubio_majorant: f vanishes identically");

    const GridSpec& g = f.grid();
    std::vector<double> w = f.abs_values();
    GridFunction term = GridFunction::real(g, w);
    double prev_peak = term.max_abs();
    int terms_used = 0;
    bool settled = false;
    for (int k = 1; k <= 64; ++k) {
        GridFunction mt = detail::maximal_of(term);
        std::vector<double> tv = mt.real_values();
        for (auto& x : tv) x /= 2.0 * m_norm;
        term = GridFunction::real(g, tv);

        bool below = true;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (tv[i] > eps * w[i]) {
                below = false;
                break;
            }
        if (below) {
            terms_used = k - 1;
            settled = true;
            break;
        }
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += tv[i];

        double peak = term.max_abs();
        if (k >= 8 && peak > 0.9 * prev_peak) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "rubio_majorant: series is not contracting (term ratio %.3g "
                          "at step %d); increase m_norm",
                          peak / prev_peak, k);
            throw std::runtime_error(msg);
        }
        prev_peak = peak;
    }
    if (!settled)
        throw std::runtime_error(
            "rubio_majorant: no pointwise convergence within 64 terms; increase m_norm");

    for (double x : w)
        if (!(x > 0.0))
            throw std::runtime_error(
                "rubio_majorant: majorant vanishes somewhere (maximal operator reach "
                "too short for this grid)");

    A1Certificate cert{Weight(GridFunction::real(g, w)), f, 0.0, 0.0, {}, grid_digest(g)};
    cert.a1_const = a1_constant(cert.majorant);
    double nf = norm(X, f);
    cert.norm_ratio = nf > 0.0 ? norm(X, cert.majorant.fn()) / nf : 0.0;
    cert.parameters = {{"m_norm", m_norm}, {"eps", eps}, {"terms", static_cast<double>(terms_used)}};
    return cert;
}

/// Lower estimate of the operator norm of M on X from fixed indicator
/// probes plus seeded samples. The constant probe pins the estimate at >= 1.
inline double m_operator_norm_probe(const LatticeSpec& X, const GridSpec& grid,
                                    int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("m_operator_norm_probe: trials must be >= 1");
    double best = 0.0;
    auto consider = [&](const GridFunction& f) {
        double nf = norm(X, f);
        if (!(nf > 0.0)) return;
        GridFunction mf = detail::maximal_of(f);
        best = std::max(best, norm(X, mf) / nf);
    };
    consider(GridFunction::constant(grid, 1.0));
    for (const auto& p : deterministic_probes(grid)) consider(p);
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, "m-norm-probe", static_cast<std::uint64_t>(t));
        consider(gen_named(grid, rng, t));
    }
    return best;
}

struct PowerWeightResult {
    Weight weight;
    double a1_const;
};

/// w = (Mf)^q for 0 < q < 1; such powers of maximal functions are the
/// canonical supply of A1 weights.
inline PowerWeightResult a1_power_check(const GridFunction& f, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("a1_power_check: q must lie in (0,1)");
    if (f.max_abs() == 0.0)
        throw std::domain_error("a1_power_check: f vanishes identically");
    GridFunction mf = detail::maximal_of(f);
    std::vector<double> wv = mf.real_values();
    for (auto& x : wv) x = std::pow(x, q);
    Weight w(GridFunction::real(f.grid(), std::move(wv)));
    double c = a1_constant(w);
    return PowerWeightResult{std::move(w), c};
}

/// Largest r on the ladder {1.05, 1.10, ..., 4.00} with
/// (avg_Q w^r)^{1/r} <= C avg_Q w on every scan cube; 0 when none passes.
/// The passing set is downward closed in r, so the scan starts at the top.
inline double reverse_holder_exponent(const Weight& w, double C) {
    if (!(C > 1.0)) throw std::invalid_argument("reverse_holder_exponent: C must exceed 1");
    const GridSpec& g = w.grid();
    PrefixSums pw(g, w.fn().real_values());
    for (int step = 60; step >= 1; --step) {
        double r = 1.0 + 0.05 * step;
        PrefixSums pr(g, detail::abs_pow(w.fn(), r));
        bool ok = true;
        detail::for_each_scan_cube(g, [&](const Cube& q) {
            if (!ok) return;
            double cells = std::pow(static_cast<double>(q.side), g.dim);
            double lhs = std::pow(pr.cube_sum(q) / cells, 1.0 / r);
            double rhs = C * pw.cube_sum(q) / cells;
            if (lhs > rhs * (1.0 + 1e-12)) ok = false;
        });
        if (ok) return r;
    }
    return 0.0;
}

struct MajorantWindow {
    double alpha_lo, alpha, p_lo, p_hi, p;
};

/// Midpoint parameters for the product-with-L1 majorant: alpha is the
/// midpoint of (theta/(1-q(1-theta)), 1) and p the midpoint of
/// (alpha/(alpha-theta), 1/(q(1-theta))).
inline MajorantWindow majorant_window(double theta, double q) {
    if (!(theta > 0.0 && theta < 1.0) || !(q > 0.0 && q < 1.0))
        throw std::invalid_argument("majorant_window: theta and q must lie in (0,1)");
    MajorantWindow w;
    w.alpha_lo = theta / (1.0 - q * (1.0 - theta));
    w.alpha = 0.5 * (w.alpha_lo + 1.0);
    w.p_lo = w.alpha / (w.alpha - theta);
    w.p_hi = 1.0 / (q * (1.0 - theta));
    if (!(w.p_lo < w.p_hi)) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "majorant_window: empty p interval (%.17g, %.17g) for theta=%g q=%g",
                      w.p_lo, w.p_hi, theta, q);
        throw std::runtime_error(msg);
    }
    w.p = 0.5 * (w.p_lo + w.p_hi);
    return w;
}

/// A1 majorant for |g|^{1-theta} |h|^theta built from maximal powers:
///   u = c1 (M a)^{q(1-theta)} (M |h|^alpha)^{theta/alpha},
/// with c1 the least scale making u dominate the product. a is the function
/// whose (M a)^q majorizes g; h is the L1-side factor. norm_ratio is taken
/// in product_space when given, in L1 otherwise.
inline A1Certificate calderon_l1_majorant(const GridFunction& g, const GridFunction& h,
                                          double theta, double q, const GridFunction& a,
                                          const LatticeSpec* product_space = nullptr) {
    require_same_grid(g, h);
    require_same_grid(g, a);
    MajorantWindow win = majorant_window(theta, q);
    const GridSpec& grid = g.grid();

    GridFunction ma = detail::maximal_of(a);
    GridFunction mha =
        detail::maximal_of(GridFunction::real(grid, detail::abs_pow(h, win.alpha)));

    std::vector<double> base(static_cast<std::size_t>(g.size()));
    std::vector<double> target(base.size());
    for (std::int64_t i = 0; i < g.size(); ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        base[k] = std::pow(ma[i].real(), q * (1.0 - theta)) *
                  std::pow(mha[i].real(), theta / win.alpha);
        target[k] = std::pow(std::abs(g[i]), 1.0 - theta) * std::pow(std::abs(h[i]), theta);
    }
    double c1 = 1.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
        if (target[k] == 0.0) continue;
        if (!(base[k] > 0.0))
            throw std::runtime_error(
                "calderon_l1_majorant: maximal powers vanish under the target product");
        c1 = std::max(c1, target[k] / base[k]);
    }
    for (auto& x : base) x *= c1;

    A1Certificate cert{Weight(GridFunction::real(grid, std::move(base))),
                       GridFunction::real(grid, std::move(target)),
                       0.0,
                       0.0,
                       {},
                       grid_digest(grid)};
    cert.a1_const = a1_constant(cert.majorant);
    double denom = product_space
                       ? norm(*product_space, cert.majorized)
                       : norm(LatticeSpec::lp(1.0), cert.majorized);
    double numer = product_space ? norm(*product_space, cert.majorant.fn())
                                 : norm(LatticeSpec::lp(1.0), cert.majorant.fn());
    cert.norm_ratio = denom > 0.0 ? numer / denom : 0.0;
    cert.parameters = {{"q", q}, {"theta", theta}, {"alpha", win.alpha}, {"p", win.p},
                       {"c1", c1}};
    return cert;
}

/// Worst relative Holder deficit over scan cubes for the split
///   avg_Q[(Ma)^{q(1-th)} (M|h|^al)^{th/al}]
///     <= (avg_Q (Ma)^{pq(1-th)})^{1/p} (avg_Q (M|h|^al)^{p'th/al})^{1/p'}.
/// Nonnegative up to rounding; tests pin it above -1e-12.
inline double holder_split_margin(const GridFunction& h, double theta, double q,
                                  const GridFunction& a) {
    require_same_grid(h, a);
    MajorantWindow win = majorant_window(theta, q);
    const GridSpec& grid = h.grid();
    double pc = win.p / (win.p - 1.0);

    GridFunction ma = detail::maximal_of(a);
    GridFunction mha =
        detail::maximal_of(GridFunction::real(grid, detail::abs_pow(h, win.alpha)));

    std::vector<double> prod(static_cast<std::size_t>(h.size()));
    std::vector<double> f0(prod.size()), f1(prod.size());
    for (std::int64_t i = 0; i < h.size(); ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        double u0 = std::pow(ma[i].real(), q * (1.0 - theta));
        double u1 = std::pow(mha[i].real(), theta / win.alpha);
        prod[k] = u0 * u1;
        f0[k] = std::pow(u0, win.p);
        f1[k] = std::pow(u1, pc);
    }
    PrefixSums pprod(grid, prod), p0(grid, f0), p1(grid, f1);
    double margin = std::numeric_limits<double>::infinity();
    detail::for_each_scan_cube(grid, [&](const Cube& qc) {
        double cells = std::pow(static_cast<double>(qc.side), grid.dim);
        double lhs = pprod.cube_sum(qc) / cells;
        double rhs = std::pow(p0.cube_sum(qc) / cells, 1.0 / win.p) *
                     std::pow(p1.cube_sum(qc) / cells, 1.0 / pc);
        double scale = std::max(rhs, 1e-300);
        margin = std::min(margin, (rhs - lhs) / scale);
    });
    return margin;
}

struct AinfInverseReport {
    double ap_forward;   // ap_constant(w, p0)
    double ap_inverse;   // ap_constant(1/w, p0' * q)
    double p0, q, dual_exponent;
};

/// The inverse weight lands in the Ap class with exponent p0' q; both
/// characteristics are recorded so refinement stability can be tracked.
inline AinfInverseReport ainf_inverse_check(const Weight& w, double p0, double q) {
    if (!(p0 > 1.0) || !(q > 1.0))
        throw std::invalid_argument("ainf_inverse_check: need p0 > 1 and q > 1");
    AinfInverseReport rep;
    rep.p0 = p0;
    rep.q = q;
    rep.dual_exponent = (p0 / (p0 - 1.0)) * q;
    rep.ap_forward = ap_constant(w, p0);
    std::vector<double> inv = w.fn().real_values();
    for (auto& x : inv) x = 1.0 / x;
    rep.ap_inverse = ap_constant(Weight(GridFunction::real(w.grid(), std::move(inv))),
                                 rep.dual_exponent);
    return rep;
}

}  // namespace harmlat
