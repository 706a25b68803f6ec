// verify: seeded property suites, constant calibration, and report inspection
// for the harmonic-analysis lattice toolkit. Exit codes: 0 all checks pass,
// 1 at least one check failed (or required calibration is missing), 2 bad usage.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <harmlat/bmo.hpp>
#include <harmlat/grid.hpp>
#include <harmlat/interpolation.hpp>
#include <harmlat/lattice.hpp>
#include <harmlat/maximal.hpp>
#include <harmlat/random.hpp>
#include <harmlat/serialize.hpp>
#include <harmlat/weights.hpp>

using harmlat::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string suite = "all";
    int n = 64;
    int dim = 1;
    int smax = 0;  // 0 means the full family (max side = min grid side)
    std::string boundary = "torus";
    std::string lattice = "l2";
    double theta = 0.5;
    double alpha = 0.5;
    double q = 0.5;
    int trials = 20;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    std::string out;
};

harmlat::GridSpec make_grid(const Config& c) {
    if (c.n < 1) throw UsageError("--n must be >= 1");
    if (c.dim < 1 || c.dim > 2) throw UsageError("--dim must be 1 or 2");
    harmlat::Boundary b;
    if (c.boundary == "torus")
        b = harmlat::Boundary::torus;
    else if (c.boundary == "zero")
        b = harmlat::Boundary::zero_extend;
    else
        throw UsageError("--boundary must be 'torus' or 'zero'");
    int smax = c.smax > 0 ? c.smax : c.n;
    if (smax > c.n) throw UsageError("--smax cannot exceed --n");
    harmlat::GridSpec g{c.dim, {c.n, c.dim == 2 ? c.n : 1}, 1.0, b, smax};
    try {
        g.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return g;
}

// Cell-indexed two-level weight; blocks of four keep it A1 with a small constant.
harmlat::GridFunction block_weight(const harmlat::GridSpec& g, double high) {
    std::vector<double> w(static_cast<std::size_t>(g.cell_count()), 1.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (i % 8 < 4) w[i] = high;
    return harmlat::GridFunction::real(g, std::move(w));
}

harmlat::LatticeSpec make_lattice(const std::string& name, const harmlat::GridSpec& g) {
    const double inf = std::numeric_limits<double>::infinity();
    if (name == "l1") return harmlat::LatticeSpec::lp(1.0);
    if (name == "l2") return harmlat::LatticeSpec::lp(2.0);
    if (name == "l4") return harmlat::LatticeSpec::lp(4.0);
    if (name == "linf") return harmlat::LatticeSpec::lp(inf);
    if (name.rfind("lp:", 0) == 0) {
        std::string arg = name.substr(3);
        double p = arg == "inf" ? inf : std::strtod(arg.c_str(), nullptr);
        if (!(p >= 1.0)) throw UsageError("lattice lp:<p> needs p >= 1, got '" + arg + "'");
        return harmlat::LatticeSpec::lp(p);
    }
    if (name == "wl2") return harmlat::LatticeSpec::weighted_lp(2.0, block_weight(g, 2.0));
    if (name == "varlp") {
        // exponents cycling 1.5 / 2.25 / 3 by cell; order continuous, nontrivially variable
        std::vector<double> e(static_cast<std::size_t>(g.cell_count()));
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = 1.5 + 0.75 * static_cast<double>(i % 3);
        return harmlat::LatticeSpec::var_lp(harmlat::GridFunction::real(g, std::move(e)));
    }
    throw UsageError("unknown lattice '" + name +
                     "' (choose l1, l2, l4, linf, lp:<p>, wl2, varlp)");
}

// Aggregates named checks across trials. Every check is a margin that must be
// finite and >= 0; the worst witness per name is kept for the summary line.
class Recorder {
public:
    void add(const std::string& name, double margin, int trial = -1) {
        Agg& a = byname_[name];
        if (order_.end() == std::find(order_.begin(), order_.end(), name))
            order_.push_back(name);
        a.trials += 1;
        bool bad = !std::isfinite(margin) || margin < 0.0;
        if (bad) a.violations += 1;
        if (std::isnan(margin)) a.nan_seen = true;
        if (std::isnan(margin) || margin < a.worst) {
            a.worst = std::isnan(margin) ? std::numeric_limits<double>::quiet_NaN() : margin;
            a.worst_trial = trial;
        }
    }

    void metric(const std::string& name, int trial, double value) {
        metrics_.push_back({name, trial, value});
        if (!std::isfinite(value)) add("finite:" + name, value, trial);
    }

    bool all_pass() const {
        for (const auto& [name, a] : byname_)
            if (a.violations > 0 || a.nan_seen) return false;
        return true;
    }

    void print(std::ostream& os) const {
        for (const std::string& name : order_) {
            const Agg& a = byname_.at(name);
            bool ok = a.violations == 0 && !a.nan_seen;
            os << (ok ? "  [ ok ] " : "  [FAIL] ") << name;
            for (std::size_t i = name.size(); i < 44; ++i) os << ' ';
            os << " trials=" << a.trials;
            if (a.violations > 0) os << " violations=" << a.violations;
            std::ostringstream w;
            w.precision(3);
            w << std::scientific << a.worst;
            os << " worst_margin=" << w.str();
            if (!ok && a.worst_trial >= 0) os << " (trial " << a.worst_trial << ")";
            os << "\n";
        }
    }

    json checks_json() const {
        json arr = json::array();
        for (const std::string& name : order_) {
            const Agg& a = byname_.at(name);
            json c;
            c["name"] = name;
            c["trials"] = a.trials;
            c["violations"] = a.violations;
            c["worst_margin"] = a.worst;
            c["pass"] = a.violations == 0 && !a.nan_seen;
            if (a.worst_trial >= 0) c["worst_trial"] = a.worst_trial;
            arr.push_back(std::move(c));
        }
        return arr;
    }

    void write_csv(std::ostream& os) const {
        os << "metric,trial,value\n";
        os.precision(17);
        for (const auto& m : metrics_) os << m.name << "," << m.trial << "," << m.value << "\n";
    }

    bool has_metrics() const { return !metrics_.empty(); }

private:
    struct Agg {
        long trials = 0;
        long violations = 0;
        double worst = std::numeric_limits<double>::infinity();
        int worst_trial = -1;
        bool nan_seen = false;
    };
    struct Metric {
        std::string name;
        int trial;
        double value;
    };
    std::map<std::string, Agg> byname_;
    std::vector<std::string> order_;
    std::vector<Metric> metrics_;
};

double min_margin(const std::vector<double>& lhs, const std::vector<double>& rhs) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) m = std::min(m, lhs[i] - rhs[i]);
    return m;
}

double max_abs_dev(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double scale_of(const harmlat::GridFunction& f) { return std::max(1.0, f.max_abs()); }

// --- suites ----------------------------------------------------------------

void suite_maximal(const Config& c, Recorder& R) {
    harmlat::GridSpec g = make_grid(c);
    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-maximal", static_cast<std::uint64_t>(t));
        harmlat::GridFunction f = harmlat::gen_named(g, rng, t);
        harmlat::GridFunction mf = harmlat::hl_maximal(f);
        double sc = scale_of(mf);

        if (g.boundary == harmlat::Boundary::torus) {
            harmlat::GridFunction mfast = harmlat::hl_maximal_fast(f);
            double dev = max_abs_dev(mf.real_values(), mfast.real_values());
            R.add("fast-matches-brute", 1e-12 * sc - dev, t);
            R.metric("fast_brute_dev", t, dev);
        }

        R.add("maximal-dominates-abs", min_margin(mf.real_values(), f.abs_values()), t);
        double sup = f.max_abs();
        double over = 0.0;
        for (double v : mf.real_values()) over = std::max(over, v - sup);
        R.add("maximal-below-sup", 1e-10 * sc - over, t);

        harmlat::GridFunction sh = harmlat::sharp_maximal(f);
        std::vector<double> twom = mf.real_values();
        for (double& v : twom) v *= 2.0;
        R.add("sharp-below-twice-maximal", min_margin(twom, sh.real_values()) + 1e-12 * sc, t);

        harmlat::GridFunction ls = harmlat::local_sharp_maximal(f, 0.5);
        std::vector<double> half = sh.real_values();
        for (double& v : half) v /= 0.5;
        R.add("local-sharp-chebyshev", min_margin(half, ls.real_values()) + 1e-12 * sc, t);

        // sublinearity against an independent second sample
        harmlat::CounterRng rng2(c.seed, "cli-maximal-second", static_cast<std::uint64_t>(t));
        harmlat::GridFunction h = harmlat::gen_named(g, rng2, t + 1);
        std::vector<double> fh(f.abs_values().size());
        {
            std::vector<double> fa = f.real_values(), ha = h.real_values();
            for (std::size_t i = 0; i < fh.size(); ++i) fh[i] = fa[i] + ha[i];
        }
        harmlat::GridFunction sum = harmlat::GridFunction::real(g, std::move(fh));
        harmlat::GridFunction msum = harmlat::hl_maximal(sum);
        harmlat::GridFunction mh = harmlat::hl_maximal(h);
        std::vector<double> bound = mf.real_values();
        {
            std::vector<double> mhv = mh.real_values();
            for (std::size_t i = 0; i < bound.size(); ++i) bound[i] += mhv[i];
        }
        double ssc = scale_of(msum);
        R.add("maximal-sublinear", min_margin(bound, msum.real_values()) + 1e-12 * ssc, t);

        harmlat::GridFunction shsum = harmlat::sharp_maximal(sum);
        harmlat::GridFunction shh = harmlat::sharp_maximal(h);
        std::vector<double> shb = sh.real_values();
        {
            std::vector<double> shv = shh.real_values();
            for (std::size_t i = 0; i < shb.size(); ++i) shb[i] += shv[i];
        }
        R.add("sharp-sublinear", min_margin(shb, shsum.real_values()) + 1e-12 * ssc, t);

        // rearrangement preserves total mass
        harmlat::StepFunction re = harmlat::rearrangement(f);
        double mass = 0.0;
        for (double v : f.abs_values()) mass += v;
        mass *= std::pow(g.spacing, g.dim);
        R.add("rearrangement-mass", 1e-10 * std::max(1.0, mass) - std::abs(re.integral() - mass),
              t);
    }

    // thread-count independence is part of the contract: identical bits
    harmlat::CounterRng rng(c.seed, "cli-maximal-threads", 0);
    harmlat::GridFunction f = harmlat::with_random_phases(harmlat::gen_named(g, rng, 0), rng);
    bool same = harmlat::hl_maximal(f, 1).real_values() == harmlat::hl_maximal(f, 4).real_values();
    harmlat::GridFunction s1 = harmlat::sharp_maximal(f, 1), s4 = harmlat::sharp_maximal(f, 4);
    same = same && s1.real_values() == s4.real_values();
    R.add("parallel-bitwise-stable", same ? 0.0 : -1.0);
}

void suite_weights(const Config& c, Recorder& R) {
    harmlat::GridSpec g = make_grid(c);
    if (g.boundary != harmlat::Boundary::torus)
        throw UsageError("--suite weights requires --boundary torus");
    harmlat::LatticeSpec X = make_lattice(c.lattice, g);

    double probe = harmlat::m_operator_norm_probe(X, g, std::min(c.trials, 10), c.seed);
    double m_norm = 1.5 * probe;
    R.add("m-probe-at-least-one", probe - 1.0 + 1e-12);

    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-weights", static_cast<std::uint64_t>(t));
        harmlat::GridFunction f = harmlat::gen_named(g, rng, t);
        try {
            harmlat::A1Certificate cert = harmlat::rubio_majorant(f, X, m_norm);
            std::vector<double> wv = cert.majorant.fn().real_values();
            R.add("rubio-majorizes", min_margin(wv, f.abs_values()), t);
            R.add("rubio-norm-doubling", 2.0 + 1e-9 - cert.norm_ratio, t);
            harmlat::GridFunction mw = harmlat::detail::maximal_of(cert.majorant.fn());
            std::vector<double> capv = wv;
            for (double& v : capv) v *= 2.0 * m_norm * (1.0 + 1e-6);
            R.add("rubio-a1-pointwise", min_margin(capv, mw.real_values()), t);
            R.add("rubio-a1-constant", 2.0 * m_norm * (1.0 + 1e-6) - cert.a1_const, t);
            R.metric("rubio_norm_ratio", t, cert.norm_ratio);
            R.metric("rubio_a1_const", t, cert.a1_const);

            // Jensen: the p=2 characteristic never exceeds the A1 constant
            double ap = harmlat::ap_constant(cert.majorant, 2.0);
            R.add("ap-below-a1", cert.a1_const * (1.0 + 1e-12) - ap, t);
            R.metric("reverse_holder_exponent", t,
                     harmlat::reverse_holder_exponent(cert.majorant, 2.0 * cert.a1_const));
        } catch (const std::runtime_error& e) {
            std::cerr << "rubio witness (trial " << t << "): " << e.what() << "\n";
            R.add("rubio-contracts", -1.0, t);
            continue;
        }
        R.add("rubio-contracts", 0.0, t);

        harmlat::PowerWeightResult pw = harmlat::a1_power_check(f, c.q);
        R.add("power-weight-a1-at-least-one", pw.a1_const - 1.0 + 1e-12, t);
        R.metric("power_weight_a1", t, pw.a1_const);

        // A1 majorant for a Calderon-product element, with the per-cube split
        harmlat::CounterRng rng2(c.seed, "cli-weights-pair", static_cast<std::uint64_t>(t));
        harmlat::GridFunction h = harmlat::gen_lognormal(g, rng2);
        harmlat::GridFunction aa = harmlat::gen_lognormal(g, rng2);
        harmlat::A1Certificate cm = harmlat::calderon_l1_majorant(f, h, c.theta, c.q, aa);
        std::vector<double> uv = cm.majorant.fn().real_values();
        std::vector<double> target(uv.size());
        {
            std::vector<double> fa = f.abs_values(), ha = h.abs_values();
            for (std::size_t i = 0; i < target.size(); ++i)
                target[i] = std::pow(fa[i], 1.0 - c.theta) * std::pow(ha[i], c.theta);
        }
        double sc = std::max(1.0, cm.majorant.fn().max_abs());
        R.add("calderon-majorant-dominates", min_margin(uv, target) + 1e-12 * sc, t);
        R.add("calderon-majorant-a1-finite",
              std::isfinite(cm.a1_const) ? cm.a1_const - 1.0 + 1e-12 : -1.0, t);
        R.add("calderon-holder-split", harmlat::holder_split_margin(h, c.theta, c.q, aa) + 1e-12,
              t);
    }

    // fixed exponents: the q here is the Holder exponent (> 1), not the
    // maximal-power exponent from --q
    harmlat::Weight bw(block_weight(g, 2.0));
    harmlat::AinfInverseReport ar = harmlat::ainf_inverse_check(bw, 2.0, 2.0);
    R.add("ainf-inverse-dual-exponent",
          std::isfinite(ar.dual_exponent) ? ar.dual_exponent - 1.0 : -1.0);
}

void suite_lattices(const Config& c, Recorder& R) {
    harmlat::GridSpec g = make_grid(c);
    harmlat::LatticeSpec X = make_lattice(c.lattice, g);
    harmlat::LatticeSpec l2 = harmlat::LatticeSpec::lp(2.0);
    harmlat::LatticeSpec l4 = harmlat::LatticeSpec::lp(4.0);

    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-lattices", static_cast<std::uint64_t>(t));
        harmlat::GridFunction f = harmlat::gen_named(g, rng, t);
        harmlat::GridFunction h = harmlat::gen_named(g, rng, t + 1);

        double nf = harmlat::norm(X, f);
        double nh = harmlat::norm(X, h);
        R.add("norm-positive", nf > 0.0 ? nf : -1.0, t);

        // homogeneity, triangle, monotonicity
        std::vector<double> sv = f.real_values();
        for (double& v : sv) v *= -3.0;
        double n3 = harmlat::norm(X, harmlat::GridFunction::real(g, std::move(sv)));
        R.add("norm-homogeneous", 1e-8 - std::abs(n3 - 3.0 * nf) / std::max(1.0, 3.0 * nf), t);

        std::vector<double> sum = f.real_values();
        {
            std::vector<double> hv = h.real_values();
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += hv[i];
        }
        double nsum = harmlat::norm(X, harmlat::GridFunction::real(g, std::move(sum)));
        R.add("norm-triangle", (nf + nh) * (1.0 + 1e-7) - nsum, t);

        std::vector<double> small = f.real_values();
        for (double& v : small) v *= 0.5;
        double nsmall = harmlat::norm(X, harmlat::GridFunction::real(g, std::move(small)));
        R.add("norm-monotone", nf * (1.0 + 1e-9) - nsmall, t);

        // closed forms for products and powers of Lp
        double n83 = harmlat::norm(harmlat::LatticeSpec::calderon(l2, l4, 0.5), f);
        double ref83 = harmlat::norm(harmlat::LatticeSpec::lp(8.0 / 3.0), f);
        R.add("calderon-l2-l4-closed-form", 1e-6 - std::abs(n83 - ref83) / std::max(1e-30, ref83),
              t);
        double npow = harmlat::norm(harmlat::LatticeSpec::power(l2, 0.5), f);
        double ref4 = harmlat::norm(l4, f);
        R.add("power-l2-closed-form", 1e-10 - std::abs(npow - ref4) / std::max(1e-30, ref4), t);

        // Luxemburg norm with constant exponent collapses to Lp
        harmlat::LatticeSpec v3 =
            harmlat::LatticeSpec::var_lp(harmlat::GridFunction::constant(g, 3.0));
        double nv = harmlat::norm(v3, f);
        double r3 = harmlat::norm(harmlat::LatticeSpec::lp(3.0), f);
        R.add("varlp-constant-exponent", 1e-10 - std::abs(nv - r3) / std::max(1e-30, r3), t);

        // duality: pairing vs product of norms, probe as a lower estimate
        double pair = 0.0;
        {
            std::vector<double> fa = f.real_values(), ha = h.real_values();
            for (std::size_t i = 0; i < fa.size(); ++i) pair += fa[i] * ha[i];
            pair = std::abs(pair) * std::pow(g.spacing, g.dim);
        }
        double dn = harmlat::dual_norm(X, h);
        R.add("holder-pairing", nf * dn * (1.0 + 1e-9) - pair, t);
        double dprobe = harmlat::numeric_dual_probe(X, h, 2, c.seed + static_cast<std::uint64_t>(t));
        R.add("dual-probe-lower", dn * (1.0 + 1e-10) - dprobe, t);
        R.metric("dual_probe_ratio", t, dn > 0.0 ? dprobe / dn : 1.0);

        // sup over a finite sequence belongs to X(l-infinity) with equal norm
        harmlat::SeqGridFunction seq;
        seq.items = {f, f, f};
        double nm = harmlat::mixed_norm(harmlat::LatticeSpec::mixed_linf(X, 3), seq);
        double nabs = harmlat::norm(X, harmlat::GridFunction::real(g, f.abs_values()));
        R.add("mixed-sup-norm", 1e-10 * std::max(1.0, nabs) - std::abs(nm - nabs), t);
    }

    harmlat::DualityGapReport gap = harmlat::lozanovsky_duality_check(
        l2, l4, c.theta, g, std::min(c.trials, 10), c.seed);
    R.add("lozanovsky-gap", 0.02 - gap.max_rel_gap);
    for (std::size_t i = 0; i < gap.rows.size(); ++i)
        R.metric("lozanovsky_gap", static_cast<int>(i), gap.rows[i][2]);
}

void suite_bmo(const Config& c, Recorder& R) {
    harmlat::GridSpec g = make_grid(c);
    harmlat::ContractionMap root = harmlat::ContractionMap::power_root(0.5);
    harmlat::ContractionMap cap = harmlat::ContractionMap::cap(2.0);

    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-bmo", static_cast<std::uint64_t>(t));
        harmlat::GridFunction f = harmlat::mean_zero(harmlat::gen_named(g, rng, t));
        double b = harmlat::bmo_norm(f);
        double sc = scale_of(f);
        R.add("bmo-below-twice-sup", 2.0 * f.max_abs() + 1e-12 * sc - b, t);
        R.metric("bmo_norm", t, b);

        std::vector<double> shifted = f.real_values();
        for (double& v : shifted) v += 17.0;
        double bs = harmlat::bmo_norm(harmlat::GridFunction::real(g, std::move(shifted)));
        R.add("bmo-shift-invariant", 1e-10 * std::max(1.0, b) - std::abs(bs - b), t);

        std::vector<double> doubled = f.real_values();
        for (double& v : doubled) v *= 2.0;
        double bd = harmlat::bmo_norm(harmlat::GridFunction::real(g, std::move(doubled)));
        R.add("bmo-scale-exact", bd == 2.0 * b ? 0.0 : -std::abs(bd - 2.0 * b), t);

        if (b > 0.0) {
            for (double gamma : {0.1, 0.25, 0.45}) {
                harmlat::StrombergResult sr =
                    harmlat::stromberg_test(f, b / gamma + 1e-9, gamma);
                R.add("stromberg-above-bmo-level", sr.pass ? 0.0 : -1.0, t);
            }
        }
        for (double lambda : {0.5, 1.5}) {
            R.add("contraction-root", harmlat::contraction_oscillation_check(f, root, lambda)
                                          ? 0.0
                                          : -1.0, t);
            R.add("contraction-cap",
                  harmlat::contraction_oscillation_check(f, cap, lambda) ? 0.0 : -1.0, t);
        }

        // powers of nonnegative BMO functions: decomposition and ratio bound
        harmlat::CounterRng rng2(c.seed, "cli-bmo-pos", static_cast<std::uint64_t>(t));
        harmlat::GridFunction pos = harmlat::gen_lognormal(g, rng2);
        harmlat::PowerBmoReport pr = harmlat::power_bmo_report(pos, c.alpha);
        R.add("power-bmo-decomposition", pr.decomposition_holds ? 0.0 : -1.0, t);
        R.metric("power_bmo_ratio", t, pr.ratio);
    }
}

void suite_interpolation(const Config& c, Recorder& R) {
    harmlat::GridSpec g = make_grid(c);
    if (g.boundary != harmlat::Boundary::torus)
        throw UsageError("--suite interpolation requires --boundary torus");
    const double inf = std::numeric_limits<double>::infinity();
    harmlat::LatticeSpec linf = harmlat::LatticeSpec::lp(inf);
    harmlat::LatticeSpec l2 = harmlat::LatticeSpec::lp(2.0);
    harmlat::LatticeSpec l4 = harmlat::LatticeSpec::lp(4.0);

    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-interp", static_cast<std::uint64_t>(t));
        harmlat::GridFunction a =
            harmlat::with_random_phases(harmlat::gen_named(g, rng, t), rng);

        // (L-infinity, L2) at theta lands in L^{2/theta}
        harmlat::InterpUpperResult up = harmlat::interp_norm_upper(a, linf, l2, c.theta);
        double ref = harmlat::norm(harmlat::LatticeSpec::lp(2.0 / c.theta), a);
        R.add("upper-linf-l2-closed-form",
              1e-7 - std::abs(up.value - ref) / std::max(1e-30, ref), t);

        double lo = harmlat::interp_norm_lower(a, linf, l2, c.theta, 4,
                                               c.seed + static_cast<std::uint64_t>(t));
        R.add("lower-below-upper", up.value * (1.0 + 1e-8) - lo, t);
        R.add("lower-near-upper", lo - 0.9 * up.value, t);
        R.metric("lower_over_upper", t, up.value > 0.0 ? lo / up.value : 1.0);

        harmlat::InterpUpperResult up24 = harmlat::interp_norm_upper(a, l2, l4, c.theta);
        double p_mid = 1.0 / ((1.0 - c.theta) / 2.0 + c.theta / 4.0);
        double ref24 = harmlat::norm(harmlat::LatticeSpec::lp(p_mid), a);
        R.add("upper-l2-l4-closed-form",
              1e-6 - std::abs(up24.value - ref24) / std::max(1e-30, ref24), t);

        // the witness family reproduces a on the middle line and balances boundaries
        harmlat::GridFunction mid = harmlat::family_eval(up.family, {c.theta, 0.0});
        double dev = 0.0;
        for (std::int64_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(mid[i] - a[i]));
        R.add("family-midline-reproduces", 1e-8 * scale_of(a) - dev, t);
        auto [b0, b1] = harmlat::boundary_norms(up.family, linf, l2);
        R.add("family-boundary-balanced",
              1e-6 - std::abs(b0 - b1) / std::max(1e-30, std::max(b0, b1)), t);

        // endpoint slices are exactly the boundary data
        harmlat::GridFunction f0 = harmlat::family_eval(up.family, {0.0, 0.0});
        bool exact = true;
        for (std::int64_t i = 0; i < a.size(); ++i) {
            std::complex<double> want = up.family.u[i] * up.family.g0[i].real();
            if (f0[i] != want) exact = false;
        }
        R.add("family-endpoint-exact", exact ? 0.0 : -1.0, t);
    }

    // exponent arithmetic round-trips, once per run
    double worst = 0.0;
    for (int i = 1; i <= 9; ++i) {
        for (int j = 1; j <= 9; ++j) {
            double th = i / 10.0, al = j / 10.0;
            if (th < al) {
                auto [delta, gamma] = harmlat::wolff_instantiation(th, al);
                auto [xi, psi] = harmlat::wolff_exponents(gamma, delta);
                worst = std::max({worst, std::abs(xi - th), std::abs(psi - al)});
            }
            if (th >= al) {
                double eta = harmlat::reiteration_eta(th, al);
                worst = std::max(worst, std::abs(harmlat::reiteration_exponent(al, eta) - th));
            }
        }
    }
    R.add("exponent-round-trips", 1e-15 - worst);
}

void suite_chain(const Config& c, Recorder& R, json& extra) {
    harmlat::GridSpec g = make_grid(c);
    if (g.boundary != harmlat::Boundary::torus)
        throw UsageError("--suite interp-chain requires --boundary torus");
    harmlat::LatticeSpec X = make_lattice(c.lattice, g);
    harmlat::LatticeSpec PX = harmlat::LatticeSpec::power(X, c.theta);

    std::optional<double> cst = harmlat::lookup_sharp_constant(PX, g);
    if (!cst) {
        std::ostringstream msg;
        msg << "no sharp-domination constant stored for " << harmlat::calibration_key(PX, g)
            << "; calibrate first (`verify calibrate` with the same lattice and grid)";
        throw std::runtime_error(msg.str());
    }
    double constant = *cst;
    extra["sharp_constant"] = constant;

    json reports = json::array();
    for (int t = 0; t < c.trials; ++t) {
        harmlat::CounterRng rng(c.seed, "cli-chain", static_cast<std::uint64_t>(t));
        harmlat::GridFunction a = harmlat::mean_zero(harmlat::gen_named(g, rng, t));
        harmlat::ChainReport rep = harmlat::oscillation_chain_check(
            a, X, c.theta, harmlat::default_t_grid(), c.tol, &constant);
        if (rep.trivial) {
            R.add("chain-run", 0.0, t);
            continue;
        }
        R.add("chain-run", rep.pass ? 0.0 : -1.0, t);
        R.add("chain-left-boundary-sharp", rep.margin_i + c.tol, t);
        R.add("chain-right-boundary-maximal", rep.margin_ii + c.tol, t);
        R.add("chain-midline-identity", 1e-12 - rep.margin_iii, t);
        R.add("chain-closing-constant", rep.margin_iv + c.tol, t);
        R.metric("chain_margin_i", t, rep.margin_i);
        R.metric("chain_margin_ii", t, rep.margin_ii);
        R.metric("chain_margin_iii", t, rep.margin_iii);
        R.metric("chain_margin_iv", t, rep.margin_iv);
        R.metric("chain_norm_ratio", t,
                 rep.norm_sharp > 0.0 ? rep.norm_a / rep.norm_sharp : 0.0);
        if (reports.size() < 50) reports.push_back(harmlat::to_json(rep));
    }
    extra["reports"] = std::move(reports);
}

// --- commands --------------------------------------------------------------

json config_json(const Config& c) {
    json j;
    j["suite"] = c.suite;
    j["n"] = c.n;
    j["dim"] = c.dim;
    j["smax"] = c.smax;
    j["boundary"] = c.boundary;
    j["lattice"] = c.lattice;
    j["theta"] = c.theta;
    j["alpha"] = c.alpha;
    j["q"] = c.q;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    return j;
}

void write_outputs(const Config& c, const Recorder& R, const json& report) {
    if (c.out.empty()) return;
    std::ofstream out(c.out);
    if (!out) throw std::runtime_error("cannot write " + c.out);
    out << report.dump(2) << "\n";
    if (R.has_metrics()) {
        std::string csv = c.out;
        std::size_t dot = csv.rfind('.');
        csv = (dot == std::string::npos ? csv : csv.substr(0, dot)) + ".csv";
        std::ofstream cout_(csv);
        if (!cout_) throw std::runtime_error("cannot write " + csv);
        R.write_csv(cout_);
    }
}

int cmd_run(const Config& c) {
    if (c.trials < 1) throw UsageError("--trials must be >= 1");
    if (!(c.theta > 0.0 && c.theta < 1.0)) throw UsageError("--theta must lie in (0,1)");
    if (!(c.q > 0.0 && c.q < 1.0)) throw UsageError("--q must lie in (0,1)");

    std::vector<std::string> suites;
    if (c.suite == "all")
        suites = {"maximal", "weights", "lattices", "bmo", "interpolation"};
    else if (c.suite == "maximal" || c.suite == "weights" || c.suite == "lattices" ||
             c.suite == "bmo" || c.suite == "interpolation" || c.suite == "interp-chain")
        suites = {c.suite};
    else
        throw UsageError("unknown suite '" + c.suite +
                         "' (maximal, weights, lattices, bmo, interpolation, interp-chain, all)");

    Recorder R;
    json extra;
    for (const std::string& s : suites) {
        std::cout << "suite " << s << " (n=" << c.n << ", dim=" << c.dim
                  << ", trials=" << c.trials << ", seed=" << c.seed << ")\n";
        if (s == "maximal") suite_maximal(c, R);
        else if (s == "weights") suite_weights(c, R);
        else if (s == "lattices") suite_lattices(c, R);
        else if (s == "bmo") suite_bmo(c, R);
        else if (s == "interpolation") suite_interpolation(c, R);
        else suite_chain(c, R, extra);
    }
    R.print(std::cout);

    json report;
    report["version"] = harmlat::artifact_version;
    report["command"] = "run";
    report["config"] = config_json(c);
    report["checks"] = R.checks_json();
    report["pass"] = R.all_pass();
    for (auto& [k, v] : extra.items()) report[k] = v;
    write_outputs(c, R, report);

    std::cout << (R.all_pass() ? "PASS" : "FAIL") << "\n";
    return R.all_pass() ? 0 : 1;
}

int cmd_calibrate(const Config& c) {
    if (c.trials < 1) throw UsageError("--trials must be >= 1");
    if (!(c.theta > 0.0 && c.theta < 1.0)) throw UsageError("--theta must lie in (0,1)");
    harmlat::GridSpec g = make_grid(c);
    if (g.boundary != harmlat::Boundary::torus)
        throw UsageError("calibrate requires --boundary torus");
    harmlat::LatticeSpec X = make_lattice(c.lattice, g);
    harmlat::LatticeSpec PX = harmlat::LatticeSpec::power(X, c.theta);

    harmlat::CalibrationResult base = harmlat::sharp_domination_calibrate(X, g, c.trials, c.seed);
    harmlat::CalibrationResult pow = harmlat::sharp_domination_calibrate(PX, g, c.trials, c.seed);

    double gap = 0.0;
    for (int t = 0; t < std::min(c.trials, 10); ++t) {
        harmlat::CounterRng rng(c.seed, "cli-calibrate-dual", static_cast<std::uint64_t>(t));
        harmlat::GridFunction f = harmlat::gen_named(g, rng, t);
        double dn = harmlat::dual_norm(X, f);
        if (!(dn > 0.0)) continue;
        double probe =
            harmlat::numeric_dual_probe(X, f, 2, c.seed + static_cast<std::uint64_t>(t));
        gap = std::max(gap, std::abs(dn - probe) / dn);
    }

    json curve = json::object();
    for (double q : {0.3, 0.5, 0.7, 0.9}) {
        double worst = 1.0;
        for (int t = 0; t < std::min(c.trials, 10); ++t) {
            harmlat::CounterRng rng(c.seed, "cli-calibrate-a1", static_cast<std::uint64_t>(t));
            worst = std::max(worst,
                             harmlat::a1_power_check(harmlat::gen_named(g, rng, t), q).a1_const);
        }
        char key[16];
        std::snprintf(key, sizeof(key), "%.1f", q);
        curve[key] = worst;
    }

    json cb;
    cb["sharp_domination"] = base.constant;
    cb["complex_factor"] = base.complex_factor;
    cb["duality_probe_gap"] = gap;
    cb["a1_power_curve"] = curve;
    harmlat::save_calibration(harmlat::calibration_key(X, g), cb, c.seed);

    json cp;
    cp["sharp_domination"] = pow.constant;
    cp["complex_factor"] = pow.complex_factor;
    harmlat::save_calibration(harmlat::calibration_key(PX, g), cp, c.seed);

    std::cout << "calibrated " << harmlat::calibration_key(X, g)
              << ": sharp_domination=" << base.constant << " duality_probe_gap=" << gap << "\n"
              << "calibrated " << harmlat::calibration_key(PX, g)
              << ": sharp_domination=" << pow.constant << "\n"
              << "stored in " << harmlat::constants_file() << "\n";
    return 0;
}

int cmd_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read report file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("malformed report: " + std::string(e.what()));
    }
    std::cout << "report: " << path << "\n";
    if (j.contains("config")) {
        const json& cfg = j["config"];
        std::cout << "  suite=" << cfg.value("suite", std::string("?"))
                  << " n=" << cfg.value("n", 0) << " trials=" << cfg.value("trials", 0)
                  << " seed=" << cfg.value("seed", 0) << "\n";
    }
    bool pass = j.value("pass", false);
    if (j.contains("checks")) {
        for (const json& chk : j["checks"]) {
            std::cout << "  " << (chk.value("pass", false) ? "[ ok ] " : "[FAIL] ")
                      << chk.value("name", std::string("?"))
                      << " worst_margin=" << chk.value("worst_margin", 0.0) << "\n";
        }
    }
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"property suites and calibration for the lattice toolkit"};
    app.require_subcommand(1);

    Config c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--n", c.n, "cells per side");
        sub->add_option("--dim", c.dim, "grid dimension (1 or 2)");
        sub->add_option("--smax", c.smax, "largest cube side (0 = full family)");
        sub->add_option("--boundary", c.boundary, "torus or zero");
        sub->add_option("--lattice", c.lattice, "l1, l2, l4, linf, lp:<p>, wl2, varlp");
        sub->add_option("--theta", c.theta, "interpolation parameter in (0,1)");
        sub->add_option("--alpha", c.alpha, "power exponent for BMO checks");
        sub->add_option("--q", c.q, "maximal-power exponent in (0,1)");
        sub->add_option("--trials", c.trials, "seeded trials per suite");
        sub->add_option("--seed", c.seed, "base RNG seed");
        sub->add_option("--tol", c.tol, "margin tolerance for chain checks");
        sub->add_option("--out", c.out, "write JSON report (and CSV metrics) here");
    };

    CLI::App* run = app.add_subcommand("run", "execute a property suite");
    run->add_option("--suite", c.suite,
                    "maximal, weights, lattices, bmo, interpolation, interp-chain, all");
    add_common(run);

    CLI::App* cal = app.add_subcommand("calibrate", "compute and store empirical constants");
    add_common(cal);

    std::string report_path;
    CLI::App* rep = app.add_subcommand("report", "summarize a stored JSON report");
    rep->add_option("file", report_path, "report file written by `verify run --out`")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(c);
        if (cal->parsed()) return cmd_calibrate(c);
        return cmd_report(report_path);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
