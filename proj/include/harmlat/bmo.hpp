#pragma once

// BMO norm, the level-set oscillation test, and the contraction and power
// facts for nonnegative functions. On the torus the BMO norm is a seminorm
// vanishing exactly on constants.

#include <algorithm>
#include <string>
#include <vector>

#include "grid.hpp"
#include "maximal.hpp"

namespace harmlat {

inline double bmo_norm(const GridFunction& f) {
    GridFunction sh = sharp_maximal(f);
    double b = 0.0;
    for (std::int64_t i = 0; i < sh.size(); ++i) b = std::max(b, sh[i].real());
    return b;
}

namespace detail {

/// Cell values of f over q, with zeros standing in for off-grid cells under
/// zero extension (matches the oscillation conventions in maximal.hpp).
inline std::vector<double> cube_values_real(const GridFunction& f, const Cube& q) {
    std::vector<double> v;
    std::int64_t cells = 1;
    for (int d = 0; d < f.grid().dim; ++d) cells *= q.side;
    v.reserve(static_cast<std::size_t>(cells));
    std::int64_t off = for_each_cube_cell(f.grid(), q, [&](std::int64_t i) {
        v.push_back(f[i].real());
    });
    v.insert(v.end(), static_cast<std::size_t>(off), 0.0);
    return v;
}

/// Exact min over real c of #{i : |v_i - c| > lambda}. Non-exceedance of
/// cell i means c lies in the closed interval [v_i - lambda, v_i + lambda],
/// so the best c is a max-coverage stabbing point, attained at some left
/// endpoint. Returns {count, best c}.
inline std::pair<int, double> min_exceedance_count(std::vector<double> v, double lambda) {
    std::size_t m = v.size();
    if (m == 0) return {0, 0.0};
    std::vector<double> starts(m), ends(m);
    for (std::size_t i = 0; i < m; ++i) {
        starts[i] = v[i] - lambda;
        ends[i] = v[i] + lambda;
    }
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());
    std::size_t j = 0, best = 0;
    double best_c = starts[0];
    for (std::size_t i = 0; i < m; ++i) {
        while (j < m && ends[j] < starts[i]) ++j;
        std::size_t cover = i + 1 - j;
        if (cover > best) {
            best = cover;
            best_c = starts[i];
        }
    }
    return {static_cast<int>(m - best), best_c};
}

}  // namespace detail

struct StrombergResult {
    bool pass = true;
    double lambda = 0.0, gamma = 0.0;
    Cube worst_cube{{0, 0}, 1};
    double worst_ratio = 0.0;   // exceedance count / cube cells, at the best center
    int worst_exceed = 0;
    std::int64_t worst_cells = 0;
    double worst_center = 0.0;
};

/// Level-set oscillation test: passes when every cube admits a center c
/// whose exceedance set {|f - c| > lambda} fills at most a gamma fraction
/// of the cube. The center minimization is exact.
inline StrombergResult stromberg_test(const GridFunction& f, double lambda, double gamma) {
    if (!(lambda > 0.0)) throw std::invalid_argument("stromberg_test: lambda must be positive");
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::invalid_argument("stromberg_test: gamma must lie in (0, 1/2)");
    if (!f.is_real()) throw std::invalid_argument("stromberg_test: centers require real f");

    StrombergResult res;
    res.lambda = lambda;
    res.gamma = gamma;
    bool has_worst = false;
    for (const Cube& q : cube_family(f.grid())) {
        std::vector<double> v = detail::cube_values_real(f, q);
        auto [exceed, center] = detail::min_exceedance_count(std::move(v), lambda);
        std::int64_t cells = 1;
        for (int d = 0; d < f.grid().dim; ++d) cells *= q.side;
        double ratio = static_cast<double>(exceed) / static_cast<double>(cells);
        if (!has_worst || ratio > res.worst_ratio) {
            has_worst = true;
            res.worst_ratio = ratio;
            res.worst_cube = q;
            res.worst_exceed = exceed;
            res.worst_cells = cells;
            res.worst_center = center;
        }
        if (ratio > gamma) res.pass = false;
    }
    return res;
}

/// Fixed catalog of 1-Lipschitz nondecreasing maps. The root map extends
/// y^alpha below 1 by the identity, which keeps it 1-Lipschitz on all of R
/// while agreeing with y^alpha on y >= 1.
class ContractionMap {
public:
    static ContractionMap power_root(double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("ContractionMap: root exponent must lie in (0,1]");
        return ContractionMap(Kind::power_root, alpha);
    }
    static ContractionMap cap(double k) {
        if (!std::isfinite(k)) throw std::invalid_argument("ContractionMap: cap must be finite");
        return ContractionMap(Kind::cap, k);
    }

    double operator()(double y) const {
        switch (kind_) {
            case Kind::power_root:
                return y < 1.0 ? y : std::pow(y, param_);
            case Kind::cap:
                return std::min(y, param_);
        }
        return y;
    }

    std::string name() const {
        char buf[48];
        std::snprintf(buf, sizeof(buf), kind_ == Kind::power_root ? "root:%g" : "cap:%g",
                      param_);
        return buf;
    }

private:
    enum class Kind { power_root, cap };
    ContractionMap(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

/// For every cube, the minimal exceedance count of F(f) at level lambda is
/// at most that of f: a 1-Lipschitz F maps the best center c* of f to a
/// center F(c*) that works at least as well.
inline bool contraction_oscillation_check(const GridFunction& f, const ContractionMap& F,
                                          double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("contraction_oscillation_check: lambda must be positive");
    if (!f.is_real())
        throw std::invalid_argument("contraction_oscillation_check: requires real f");
    for (const Cube& q : cube_family(f.grid())) {
        std::vector<double> v = detail::cube_values_real(f, q);
        std::vector<double> fv(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) fv[i] = F(v[i]);
        int rhs = detail::min_exceedance_count(v, lambda).first;
        int lhs = detail::min_exceedance_count(std::move(fv), lambda).first;
        if (lhs > rhs) return false;
    }
    return true;
}

struct PowerBmoReport {
    double alpha = 0.0;
    double bmo_f = 0.0;
    double bmo_f_alpha = 0.0;       // bmo of f^alpha
    double bmo_capped_alpha = 0.0;  // bmo of (max(f,1))^alpha
    double bound = 0.0;             // bmo_capped_alpha + 2
    bool decomposition_holds = false;
    double ratio = 0.0;             // bmo_f_alpha / bmo_f, 0 when f is constant
};

/// Splits f^alpha = (f v 1)^alpha + bounded remainder (the remainder has
/// sup at most 1, contributing at most 2 to the BMO norm) and reports all
/// three norms together with the decomposition inequality.
inline PowerBmoReport power_bmo_report(const GridFunction& f, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("power_bmo_report: alpha must lie in (0,1]");
    if (!f.is_real()) throw std::domain_error("power_bmo_report: f must be real");
    for (std::int64_t i = 0; i < f.size(); ++i)
        if (f[i].real() < 0.0)
            throw std::domain_error("power_bmo_report: f must be nonnegative");

    const GridSpec& g = f.grid();
    std::vector<double> fa(static_cast<std::size_t>(f.size()));
    std::vector<double> ca(fa.size());
    for (std::int64_t i = 0; i < f.size(); ++i) {
        double y = f[i].real();
        fa[static_cast<std::size_t>(i)] = std::pow(y, alpha);
        ca[static_cast<std::size_t>(i)] = std::pow(std::max(y, 1.0), alpha);
    }
    PowerBmoReport rep;
    rep.alpha = alpha;
    rep.bmo_f = bmo_norm(f);
    rep.bmo_f_alpha = bmo_norm(GridFunction::real(g, std::move(fa)));
    rep.bmo_capped_alpha = bmo_norm(GridFunction::real(g, std::move(ca)));
    rep.bound = rep.bmo_capped_alpha + 2.0;
    rep.decomposition_holds = rep.bmo_f_alpha <= rep.bound + 1e-12;
    rep.ratio = rep.bmo_f > 0.0 ? rep.bmo_f_alpha / rep.bmo_f : 0.0;
    return rep;
}

}  // namespace harmlat
