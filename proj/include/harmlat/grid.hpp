#pragma once

// Uniform grids on the discrete torus or with zero extension, axis-aligned
// cubes of bounded side, and cell-averaged sample functions. Everything
// downstream (maximal operators, weights, lattice norms) is built on the
// three primitives in this header: cube enumeration, cube membership and
// cube averages.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace harmlat {

enum class Boundary { torus, zero_extend };

inline const char* boundary_name(Boundary b) {
    return b == Boundary::torus ? "torus" : "zero_extend";
}

/// Geometry of a uniform grid: dim in {1,2}, per-axis cell counts, spacing,
/// boundary handling and the largest admissible cube side.
struct GridSpec {
    int dim = 1;
    std::array<int, 2> sides = {1, 1};  // sides[1] is ignored when dim == 1
    double spacing = 1.0;
    Boundary boundary = Boundary::torus;
    int max_cube_side = 1;

    void validate() const {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("GridSpec: dim must be 1 or 2");
        for (int a = 0; a < dim; ++a)
            if (sides[a] < 1)
                throw std::invalid_argument("GridSpec: sides must be >= 1");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("GridSpec: spacing must be positive and finite");
        if (max_cube_side < 1 || max_cube_side > min_side())
            throw std::invalid_argument(
                "GridSpec: max_cube_side must lie in [1, min side]");
    }

    int min_side() const {
        int m = sides[0];
        for (int a = 1; a < dim; ++a) m = std::min(m, sides[a]);
        return m;
    }

    std::int64_t cell_count() const {
        std::int64_t n = 1;
        for (int a = 0; a < dim; ++a) n *= sides[a];
        return n;
    }

    /// Measure of a single cell, h^dim.
    double cell_measure() const {
        double m = 1.0;
        for (int a = 0; a < dim; ++a) m *= spacing;
        return m;
    }

    double total_measure() const {
        return cell_measure() * static_cast<double>(cell_count());
    }

    // Row-major linearization; coords are per-axis cell indices.
    std::int64_t linear_index(const std::array<int, 2>& c) const {
        return dim == 1 ? c[0] : static_cast<std::int64_t>(c[0]) * sides[1] + c[1];
    }

    std::array<int, 2> coords(std::int64_t lin) const {
        if (dim == 1) return {static_cast<int>(lin), 0};
        return {static_cast<int>(lin / sides[1]), static_cast<int>(lin % sides[1])};
    }

    int wrap(int i, int axis) const {
        int n = sides[axis];
        int r = i % n;
        return r < 0 ? r + n : r;
    }

    bool operator==(const GridSpec& o) const {
        if (dim != o.dim || spacing != o.spacing || boundary != o.boundary ||
            max_cube_side != o.max_cube_side)
            return false;
        for (int a = 0; a < dim; ++a)
            if (sides[a] != o.sides[a]) return false;
        return true;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Axis-aligned cube: anchor cell plus a common side length per axis.
/// On the torus anchors are taken mod sides; in zero_extend mode anchors may
/// be negative so the cube overhangs the grid.
struct Cube {
    std::array<int, 2> anchor = {0, 0};
    int side = 1;
};

inline double cube_measure(const GridSpec& g, const Cube& q) {
    double s = static_cast<double>(q.side) * g.spacing;
    double m = s;
    for (int a = 1; a < g.dim; ++a) m *= s;
    return m;
}

/// Calls fn(linear_index) for every cube cell that lies on the grid and
/// returns the number of cells falling outside (always 0 on the torus).
template <typename Fn>
inline std::int64_t for_each_cube_cell(const GridSpec& g, const Cube& q, Fn&& fn) {
    std::int64_t off = 0;
    if (g.dim == 1) {
        for (int i = 0; i < q.side; ++i) {
            int c = q.anchor[0] + i;
            if (g.boundary == Boundary::torus) {
                fn(g.linear_index({g.wrap(c, 0), 0}));
            } else if (c >= 0 && c < g.sides[0]) {
                fn(g.linear_index({c, 0}));
            } else {
                ++off;
            }
        }
        return off;
    }
    for (int i = 0; i < q.side; ++i) {
        int c0 = q.anchor[0] + i;
        bool in0 = c0 >= 0 && c0 < g.sides[0];
        for (int j = 0; j < q.side; ++j) {
            int c1 = q.anchor[1] + j;
            if (g.boundary == Boundary::torus) {
                fn(g.linear_index({g.wrap(c0, 0), g.wrap(c1, 1)}));
            } else if (in0 && c1 >= 0 && c1 < g.sides[1]) {
                fn(g.linear_index({c0, c1}));
            } else {
                ++off;
            }
        }
    }
    return off;
}

/// Grid sample function with one scalar per cell. Values are stored as
/// complex; real functions simply carry zero imaginary parts (is_real()).
/// Exponent fields for variable-exponent norms are the one case where +inf
/// entries are legal, behind an explicit flag.
class GridFunction {
public:
    GridFunction() = default;

    static GridFunction real(const GridSpec& g, std::vector<double> vals,
                             bool allow_infinite = false) {
        g.validate();
        if (static_cast<std::int64_t>(vals.size()) != g.cell_count())
            throw std::invalid_argument("GridFunction: value count mismatch");
        GridFunction f;
        f.grid_ = g;
        f.allow_infinite_ = allow_infinite;
        f.v_.reserve(vals.size());
        for (double x : vals) f.v_.emplace_back(x, 0.0);
        f.check_values();
        return f;
    }

    static GridFunction complex_(const GridSpec& g,
                                 std::vector<std::complex<double>> vals) {
        g.validate();
        if (static_cast<std::int64_t>(vals.size()) != g.cell_count())
            throw std::invalid_argument("GridFunction: value count mismatch");
        GridFunction f;
        f.grid_ = g;
        f.v_ = std::move(vals);
        f.check_values();
        return f;
    }

    static GridFunction constant(const GridSpec& g, double c) {
        return real(g, std::vector<double>(static_cast<std::size_t>(g.cell_count()), c));
    }

    const GridSpec& grid() const { return grid_; }
    std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }
    const std::vector<std::complex<double>>& values() const { return v_; }
    std::vector<std::complex<double>>& mutable_values() { return v_; }
    std::complex<double> operator[](std::int64_t i) const {
        return v_[static_cast<std::size_t>(i)];
    }
    bool allows_infinite() const { return allow_infinite_; }

    bool is_real() const {
        for (const auto& z : v_)
            if (z.imag() != 0.0) return false;
        return true;
    }

    std::vector<double> abs_values() const {
        std::vector<double> r(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) r[i] = std::abs(v_[i]);
        return r;
    }

    std::vector<double> real_values() const {
        if (!is_real())
            throw std::invalid_argument("GridFunction: real_values on complex data");
        std::vector<double> r(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) r[i] = v_[i].real();
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : v_) m = std::max(m, std::abs(z));
        return m;
    }

    std::complex<double> mean() const {
        std::complex<double> s{0.0, 0.0};
        for (const auto& z : v_) s += z;
        return s / static_cast<double>(v_.size());
    }

    /// Rejects NaN always, and infinities unless the exponent-field flag is set.
    void check_values() const {
        for (const auto& z : v_) {
            if (std::isnan(z.real()) || std::isnan(z.imag()))
                throw std::invalid_argument("GridFunction: NaN value");
            if (!allow_infinite_ &&
                (!std::isfinite(z.real()) || !std::isfinite(z.imag())))
                throw std::invalid_argument("GridFunction: non-finite value");
        }
    }

private:
    GridSpec grid_;
    std::vector<std::complex<double>> v_;
    bool allow_infinite_ = false;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.grid() != b.grid())
        throw std::invalid_argument("grid mismatch between operands");
}

/// All cubes with side <= max_cube_side, ordered by side then anchor
/// (lexicographic). Torus: one anchor per cell. zero_extend: anchors range
/// over [-(side-1), N-1] per axis so every cube meeting the grid appears.
inline std::vector<Cube> cube_family(const GridSpec& g) {
    g.validate();
    std::vector<Cube> out;
    for (int s = 1; s <= g.max_cube_side; ++s) {
        int lo0 = g.boundary == Boundary::torus ? 0 : -(s - 1);
        int hi0 = g.sides[0] - 1;
        if (g.dim == 1) {
            for (int a = lo0; a <= hi0; ++a) out.push_back(Cube{{a, 0}, s});
            continue;
        }
        int lo1 = g.boundary == Boundary::torus ? 0 : -(s - 1);
        int hi1 = g.sides[1] - 1;
        for (int a0 = lo0; a0 <= hi0; ++a0)
            for (int a1 = lo1; a1 <= hi1; ++a1) out.push_back(Cube{{a0, a1}, s});
    }
    return out;
}

/// Average of f over Q. In zero_extend mode overhanging cells contribute
/// nothing to the numerator while the denominator keeps the full measure,
/// i.e. f is extended by zero.
inline std::complex<double> cube_average(const GridFunction& f, const Cube& q) {
    const GridSpec& g = f.grid();
    if (q.side < 1 || q.side > g.max_cube_side)
        throw std::invalid_argument("cube_average: side outside [1, max_cube_side]");
    std::complex<double> sum{0.0, 0.0};
    for_each_cube_cell(g, q, [&](std::int64_t i) { sum += f[i]; });
    return sum * g.cell_measure() / cube_measure(g, q);
}

/// Shifts a cube by a cell offset (per-axis). Torus anchors stay canonical.
inline Cube translate_cube(const GridSpec& g, const Cube& q,
                           const std::array<int, 2>& offset) {
    Cube r = q;
    for (int a = 0; a < g.dim; ++a) {
        r.anchor[a] += offset[a];
        if (g.boundary == Boundary::torus) r.anchor[a] = g.wrap(r.anchor[a], a);
    }
    return r;
}

/// Cube sums in O(1) per query via (wrapped) prefix sums, for real data.
/// zero_extend queries clip to the grid, matching the zero extension.
class PrefixSums {
public:
    PrefixSums(const GridSpec& g, const std::vector<double>& vals) : g_(g) {
        if (static_cast<std::int64_t>(vals.size()) != g.cell_count())
            throw std::invalid_argument("PrefixSums: size mismatch");
        if (g.dim == 1) {
            p1_.assign(vals.size() + 1, 0.0);
            for (std::size_t i = 0; i < vals.size(); ++i) p1_[i + 1] = p1_[i] + vals[i];
        } else {
            n0_ = g.sides[0];
            n1_ = g.sides[1];
            p2_.assign(static_cast<std::size_t>(n0_ + 1) * (n1_ + 1), 0.0);
            auto at = [&](int i, int j) -> double& {
                return p2_[static_cast<std::size_t>(i) * (n1_ + 1) + j];
            };
            for (int i = 0; i < n0_; ++i)
                for (int j = 0; j < n1_; ++j)
                    at(i + 1, j + 1) = vals[static_cast<std::size_t>(i) * n1_ + j] +
                                       at(i, j + 1) + at(i + 1, j) - at(i, j);
        }
    }

    /// Sum of the data over the cube's on-grid cells.
    double cube_sum(const Cube& q) const {
        if (g_.dim == 1) return range_sum(q.anchor[0], q.anchor[0] + q.side, 0);
        return rect_sum(q.anchor[0], q.anchor[0] + q.side, q.anchor[1],
                        q.anchor[1] + q.side);
    }

private:
    // Half-open [a, b) along one axis, torus-wrapped or clipped.
    double range_sum(int a, int b, int /*axis*/) const {
        int n = g_.sides[0];
        if (g_.boundary == Boundary::zero_extend) {
            a = std::max(a, 0);
            b = std::min(b, n);
            if (a >= b) return 0.0;
            return p1_[b] - p1_[a];
        }
        // Torus: b - a <= n by the cube side invariant.
        int aw = a % n;
        if (aw < 0) aw += n;
        int len = b - a;
        int bw = aw + len;
        if (bw <= n) return p1_[bw] - p1_[aw];
        return (p1_[n] - p1_[aw]) + p1_[bw - n];
    }

    double rect_sum(int a0, int b0, int a1, int b1) const {
        if (g_.boundary == Boundary::zero_extend) {
            a0 = std::max(a0, 0);
            b0 = std::min(b0, n0_);
            a1 = std::max(a1, 0);
            b1 = std::min(b1, n1_);
            if (a0 >= b0 || a1 >= b1) return 0.0;
            return plain_rect(a0, b0, a1, b1);
        }
        int l0 = b0 - a0, l1 = b1 - a1;
        int s0 = a0 % n0_;
        if (s0 < 0) s0 += n0_;
        int s1 = a1 % n1_;
        if (s1 < 0) s1 += n1_;
        double total = 0.0;
        // Split each axis into at most two unwrapped segments.
        std::array<std::array<int, 2>, 2> seg0{}, seg1{};
        int c0 = split(s0, l0, n0_, seg0);
        int c1 = split(s1, l1, n1_, seg1);
        for (int i = 0; i < c0; ++i)
            for (int j = 0; j < c1; ++j)
                total += plain_rect(seg0[i][0], seg0[i][1], seg1[j][0], seg1[j][1]);
        return total;
    }

    static int split(int start, int len, int n, std::array<std::array<int, 2>, 2>& seg) {
        if (start + len <= n) {
            seg[0] = {start, start + len};
            return 1;
        }
        seg[0] = {start, n};
        seg[1] = {0, start + len - n};
        return 2;
    }

    double plain_rect(int a0, int b0, int a1, int b1) const {
        auto at = [&](int i, int j) {
            return p2_[static_cast<std::size_t>(i) * (n1_ + 1) + j];
        };
        return at(b0, b1) - at(a0, b1) - at(b0, a1) + at(a0, a1);
    }

    GridSpec g_;
    std::vector<double> p1_;
    std::vector<double> p2_;
    int n0_ = 0, n1_ = 0;
};

/// FNV-1a digest of the grid geometry; used to key calibration constants.
inline std::string grid_digest(const GridSpec& g) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(g.dim));
    for (int a = 0; a < g.dim; ++a) mix(static_cast<std::uint64_t>(g.sides[a]));
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(g.spacing));
    std::memcpy(&bits, &g.spacing, sizeof(bits));
    mix(bits);
    mix(g.boundary == Boundary::torus ? 0u : 1u);
    mix(static_cast<std::uint64_t>(g.max_cube_side));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace harmlat
