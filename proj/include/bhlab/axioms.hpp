#ifndef BHLAB_AXIOMS_HPP
#define BHLAB_AXIOMS_HPP

// Certifier for the six blender-horseshoe conditions.  Each check
// returns a verdict with a quantitative margin: the distance to the
// nearest violation of the inequality actually verified.
//
// Two evaluation paths share every signature.  The analytic path
// applies to the exact piecewise-affine model, where branch images are
// boxes and Jacobians are constant; it is exact up to round-off.  The
// sampled path (grid Jacobians, numerically bracketed boxes, Monte
// Carlo disk audits) applies to perturbed maps and is a
// falsification-plus-margin audit, not a directed-rounding proof; it
// is labeled as such in the reports.

#include "central_ifs.hpp"
#include "disks.hpp"
#include "map_system.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bhlab {

enum class Verdict { Certified, Refuted, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Certified: return "certified";
        case Verdict::Refuted: return "refuted";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConditionReport {
    Verdict verdict{Verdict::Inconclusive};
    double margin{0.0};
    std::string method;  ///< "analytic" or "sampled"
    std::string note;
};

struct CheckOptions {
    int disks_per_class = 500;   ///< Monte Carlo budget for BH5/BH6 audits
    int jacobian_grid = 33;      ///< per-axis samples for grid Jacobian checks
    int box_grid = 9;            ///< per-axis samples for image-box bracketing
    int stable_graph_grid = 33;  ///< nodes of continued stable-manifold graphs
    std::uint64_t seed = 20240923ULL;
};

struct SplittingRates {
    double stable_contraction{};   ///< upper bound over the stable cone
    double central_min{}, central_max{};
    double unstable_expansion{};   ///< lower bound over the uu cone
    bool dominated{};              ///< contraction < central_min and central_max < expansion
};

/// Markov rectangles as boxes in (stable, central, unstable) blocks.
struct MarkovBox {
    Box stable, unstable;
    double c_lo{}, c_hi{};
};

struct BlenderCertificate {
    ConditionReport bh1, bh2, bh3, bh4, bh5, bh6;
    double alpha_admissible{0.0};
    ConeParams cones{0.5, 0.25};
    MarkovBox markov_a, markov_b;
    SplittingRates rates;

    const ConditionReport& condition(int i) const {
        switch (i) {
            case 1: return bh1;
            case 2: return bh2;
            case 3: return bh3;
            case 4: return bh4;
            case 5: return bh5;
            default: return bh6;
        }
    }

    Verdict overall() const {
        bool inconclusive = false;
        for (int i = 1; i <= 6; ++i) {
            if (condition(i).verdict == Verdict::Refuted) return Verdict::Refuted;
            if (condition(i).verdict != Verdict::Certified) inconclusive = true;
        }
        return inconclusive ? Verdict::Inconclusive : Verdict::Certified;
    }

    double min_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 6; ++i) m = std::min(m, condition(i).margin);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Shared numeric helpers

namespace detail {

/// Outer approximation of the image of a box slab under one branch:
/// hull of a grid image inflated by a local Lipschitz bound per cell.
inline Box branch_image_hull(const MapSystem& sys, Branch b, const Box& slab_u, double delta,
                             int grid) {
    const int s = sys.s(), u = sys.u(), n = sys.dim();
    Box slab{Vec(n), Vec(n)};
    slab.lo.head(s).setConstant(-1.0);
    slab.hi.head(s).setConstant(1.0);
    slab.lo(s) = -delta;
    slab.hi(s) = delta;
    slab.lo.tail(u) = slab_u.lo;
    slab.hi.tail(u) = slab_u.hi;

    Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    double jac_max = 0.0;
    std::vector<int> idx(n, 0);
    const int g = std::max(grid, 2);
    Vec cell = (slab.hi - slab.lo) / static_cast<double>(g - 1);
    const double cell_radius = 0.5 * cell.norm();
    bool done = false;
    while (!done) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x(k) = slab.lo(k) + idx[k] * cell(k);
        AmbientPoint p = AmbientPoint::from_flat(x, s, u);
        Vec y = sys.apply_branch(b, p).flat();
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
        if (!sys.affine()) jac_max = std::max(jac_max, op_norm(sys.jacobian_branch(b, p)));
        done = true;
        for (int k = 0; k < n; ++k) {
            if (++idx[k] < g) { done = false; break; }
            idx[k] = 0;
        }
    }
    if (sys.affine()) {
        // exact: images of box corners span the affine image
        return Box(lo, hi);
    }
    const double pad = jac_max * cell_radius;
    return Box(lo.array() - pad, hi.array() + pad);
}

/// Monotone bisection for f(x(t)) = target along a coordinate line.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::runtime_error("bisect: endpoints do not bracket a root");
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; }
        else b = m;
    }
    return 0.5 * (a + b);
}

struct ConeRates {
    double uu{}, u{}, s{};                    ///< achieved aperture ratios at alpha
    double expansion{}, contraction{};        ///< uniform rates over the cones
};

/// Conservative cone-transfer rates of a single Jacobian.
inline ConeRates cone_rates(const Mat& j, int s, int u, double alpha) {
    const int n = s + 1 + u;
    ConeRates r;
    {   // C^uu under Df: split (s+c | u)
        const int m = s + 1;
        const double A = op_norm(j.topLeftCorner(m, m));
        const double B = op_norm(j.topRightCorner(m, u));
        const double C = op_norm(j.bottomLeftCorner(u, m));
        const double D = sigma_min(j.bottomRightCorner(u, u));
        const double den = D - C * alpha;
        r.uu = den > 0.0 ? (A * alpha + B) / den : std::numeric_limits<double>::infinity();
    }
    {   // C^u under Df: split (s | c+u)
        const int m = 1 + u;
        const double A = op_norm(j.topLeftCorner(s, s));
        const double B = op_norm(j.topRightCorner(s, m));
        const double C = op_norm(j.bottomLeftCorner(m, s));
        const double D = sigma_min(j.bottomRightCorner(m, m));
        const double den = D - C * alpha;
        r.u = den > 0.0 ? (A * alpha + B) / den : std::numeric_limits<double>::infinity();
        r.expansion = (D - C * alpha) / std::sqrt(1.0 + alpha * alpha);
        // contraction over C^s: the two output blocks are orthogonal,
        // so their bounds combine in quadrature
        const double top = A + alpha * B;
        const double bot = op_norm(j.bottomLeftCorner(m, s)) +
                           alpha * op_norm(j.bottomRightCorner(m, m));
        r.contraction = std::hypot(top, bot);
    }
    {   // C^s under Df^{-1}: split (s | c+u) of the inverse
        Mat k = j.inverse();
        const int m = 1 + u;
        const double den = sigma_min(k.topLeftCorner(s, s)) - op_norm(k.topRightCorner(s, m)) * alpha;
        const double num = op_norm(k.bottomLeftCorner(m, s)) + op_norm(k.bottomRightCorner(m, m)) * alpha;
        r.s = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    }
    (void)n;
    return r;
}

/// Largest central-component displacement the bump list contributes
/// over a coarse cube grid (zero for exact maps).
inline double max_central_displacement(const MapSystem& sys, int per_axis = 9) {
    if (sys.exact()) return 0.0;
    const int s = sys.s(), u = sys.u(), n = sys.dim();
    const int g = std::max(3, per_axis);
    Vec lo(n), hi(n);
    lo.head(s).setConstant(-1.0);
    hi.head(s).setConstant(1.0);
    lo(s) = -sys.model.delta;
    hi(s) = sys.model.delta;
    lo.tail(u).setConstant(-1.0);
    hi.tail(u).setConstant(1.0);
    double disp = 0.0;
    std::vector<int> idx(n, 0);
    bool done = false;
    while (!done) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x(k) = lo(k) + (hi(k) - lo(k)) * idx[k] / (g - 1);
        disp = std::max(disp, std::abs(sys.displacement(x)(s)));
        done = true;
        for (int k = 0; k < n; ++k) {
            if (++idx[k] < g) { done = false; break; }
            idx[k] = 0;
        }
    }
    // bumps are smooth with certified slope bounds; inflate for the grid
    return 1.5 * disp;
}

/// Jacobian sample points of one branch slab.
inline std::vector<AmbientPoint> jacobian_samples(const MapSystem& sys, Branch b, int per_axis) {
    const int s = sys.s(), u = sys.u();
    const Box& dom = sys.model.F.branch(b).dom;
    std::vector<AmbientPoint> pts;
    if (sys.affine()) {
        pts.push_back(AmbientPoint{Vec::Zero(s), 0.0, dom.center()});
        return pts;
    }
    const int g = std::max(2, per_axis);
    const int n = s + 1 + u;
    Vec lo(n), hi(n);
    lo.head(s).setConstant(-1.0);
    hi.head(s).setConstant(1.0);
    lo(s) = -sys.model.delta;
    hi(s) = sys.model.delta;
    lo.tail(u) = dom.lo;
    hi.tail(u) = dom.hi;
    std::vector<int> idx(n, 0);
    bool done = false;
    while (!done) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x(k) = lo(k) + (hi(k) - lo(k)) * idx[k] / (g - 1);
        pts.push_back(AmbientPoint::from_flat(x, s, u));
        done = true;
        for (int k = 0; k < n; ++k) {
            if (++idx[k] < g) { done = false; break; }
            idx[k] = 0;
        }
    }
    return pts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Continued reference frame

/// Fixed point of one branch by Newton iteration (exact solve for the
/// affine model).  Throws when the iteration leaves the cube
/// neighborhood or fails to settle.
inline AmbientPoint continue_saddle(const MapSystem& sys, Branch b, const AmbientPoint& guess,
                                    int max_iter = 20, double tol = 1e-13) {
    AmbientPoint x = guess;
    const int n = sys.dim();
    for (int it = 0; it < max_iter; ++it) {
        Vec r = sys.apply_branch(b, x).flat() - x.flat();
        if (r.norm() < tol) return x;
        Mat j = sys.jacobian_branch(b, x) - Mat::Identity(n, n);
        Vec step = j.partialPivLu().solve(r);
        x = AmbientPoint::from_flat(x.flat() - step, sys.s(), sys.u());
        if (x.flat().cwiseAbs().maxCoeff() > 4.0)
            throw std::runtime_error("continue_saddle: Newton iterate escaped");
    }
    if ((sys.apply_branch(b, x).flat() - x.flat()).norm() > 1e-10)
        throw std::runtime_error("continue_saddle: Newton failed to converge");
    return x;
}

/// Local stable manifold of a branch fixed point as a graph over the
/// stable coordinate (s = 1 in the sampled path), computed by
/// iterating the inverse graph transform to its fixed graph.
inline StableGraph compute_stable_graph(const MapSystem& sys, Branch b, const AmbientPoint& saddle,
                                        int grid_n = 33) {
    StableGraph w;
    if (sys.affine()) {
        w.xc_flat = saddle.xc;
        w.xu_flat = saddle.xu;
        return w;
    }
    if (sys.s() != 1)
        throw std::runtime_error("compute_stable_graph: sampled path supports s = 1");
    const int u = sys.u();
    w.grid.resize(grid_n);
    w.xc_values.assign(grid_n, saddle.xc);
    w.xu_values.assign(grid_n, saddle.xu);
    for (int i = 0; i < grid_n; ++i) w.grid[i] = -1.0 + 2.0 * i / (grid_n - 1);

    StableGraph next = w;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double change = 0.0;
        for (int i = 0; i < grid_n; ++i) {
            // solve f_b(xs_i, xc, xu) in graph(w): (1+u) equations in (xc, xu)
            double xc = w.xc_values[i];
            Vec xu = w.xu_values[i];
            for (int it = 0; it < 30; ++it) {
                AmbientPoint p{Vec::Constant(1, w.grid[i]), xc, xu};
                AmbientPoint img = sys.apply_branch(b, p);
                const double ys = img.xs(0);
                Vec r(1 + u);
                r(0) = img.xc - w.xc_at(ys);
                r.tail(u) = img.xu - w.xu_at(ys);
                if (r.norm() < 1e-14) break;
                // dominant part of the Jacobian of the residual in (xc, xu)
                Mat j = sys.jacobian_branch(b, p);
                Mat jr(1 + u, 1 + u);
                jr(0, 0) = j(1, 1);
                jr.block(0, 1, 1, u) = j.block(1, 2, 1, u);
                jr.block(1, 0, u, 1) = j.block(2, 1, u, 1);
                jr.bottomRightCorner(u, u) = j.bottomRightCorner(u, u);
                Vec step = jr.partialPivLu().solve(r);
                xc -= step(0);
                xu -= step.tail(u);
            }
            change = std::max(change, std::abs(xc - next.xc_values[i]));
            next.xc_values[i] = xc;
            change = std::max(change, (xu - next.xu_values[i]).norm());
            next.xu_values[i] = xu;
        }
        w.xc_values = next.xc_values;
        w.xu_values = next.xu_values;
        if (change < 1e-13) break;
    }
    double slope = 0.0;
    for (int i = 0; i + 1 < grid_n; ++i) {
        const double h = w.grid[i + 1] - w.grid[i];
        double dc = std::abs(w.xc_values[i + 1] - w.xc_values[i]) / h;
        double du = (w.xu_values[i + 1] - w.xu_values[i]).norm() / h;
        slope = std::max(slope, std::hypot(dc, du));
    }
    w.slope_bound = 1.5 * slope;
    return w;
}

/// Reference frame of a map system: continued saddles, their stable
/// manifolds, and the admissibility bound for disk slopes.
struct SystemFrame {
    AmbientPoint saddle_p, saddle_q;
    StableFrame frame;

    static SystemFrame build(const MapSystem& sys, const CheckOptions& opts = {},
                             double tol = 1e-10) {
        SystemFrame sf;
        sf.saddle_p = continue_saddle(sys, Branch::A, fixed_point_p(sys.model));
        sf.saddle_q = continue_saddle(sys, Branch::B, fixed_point_q(sys.model));
        sf.frame.ws_p = compute_stable_graph(sys, Branch::A, sf.saddle_p, opts.stable_graph_grid);
        sf.frame.ws_q = compute_stable_graph(sys, Branch::B, sf.saddle_q, opts.stable_graph_grid);
        sf.frame.tol = tol;

        const double d = unstable_diameter(sys.u());
        double p_lo = sf.saddle_p.xc, p_hi = sf.saddle_p.xc;
        double q_lo = sf.saddle_q.xc, q_hi = sf.saddle_q.xc;
        if (!sf.frame.ws_p.flat()) {
            for (double v : sf.frame.ws_p.xc_values) { p_lo = std::min(p_lo, v); p_hi = std::max(p_hi, v); }
            for (double v : sf.frame.ws_q.xc_values) { q_lo = std::min(q_lo, v); q_hi = std::max(q_hi, v); }
        }
        const double delta = sys.model.delta;
        const double disjoint = (q_lo - p_hi) / (2.0 * d);
        const double face = std::min((delta - q_hi) / d, (delta + p_lo) / d);
        sf.frame.lip_bound = std::min(disjoint, face);
        return sf;
    }

    double central_gap() const { return saddle_q.xc - saddle_p.xc; }
};

// ---------------------------------------------------------------------------
// BH1: two branch images, strictly inside in the stable direction,
// branch slabs clear of the strong-unstable boundary.

inline ConditionReport check_BH1(const MapSystem& sys, const ReferenceCube& cube,
                                 const CheckOptions& opts = {}) {
    ConditionReport rep;
    rep.method = sys.affine() ? "analytic" : "sampled";
    const int s = sys.s(), u = sys.u();
    try {
        Box img_a = detail::branch_image_hull(sys, Branch::A, sys.model.F.branch_a.dom,
                                              cube.delta, opts.box_grid);
        Box img_b = detail::branch_image_hull(sys, Branch::B, sys.model.F.branch_b.dom,
                                              cube.delta, opts.box_grid);
        // stable inclusion in (-1,1)^s
        double incl = std::numeric_limits<double>::infinity();
        for (const Box* bx : {&img_a, &img_b}) {
            incl = std::min(incl, 1.0 - bx->hi.head(s).maxCoeff());
            incl = std::min(incl, 1.0 + bx->lo.head(s).minCoeff());
        }
        // the two components must be separated
        Box sa(img_a.lo.head(s), img_a.hi.head(s));
        Box sb(img_b.lo.head(s), img_b.hi.head(s));
        const double gap = sa.gap(sb);
        // branch slabs clear of del^uu
        double dom_clear = std::numeric_limits<double>::infinity();
        for (Branch b : {Branch::A, Branch::B}) {
            const Box& dom = sys.model.F.branch(b).dom;
            dom_clear = std::min(dom_clear, 1.0 - dom.hi.maxCoeff());
            dom_clear = std::min(dom_clear, 1.0 + dom.lo.minCoeff());
        }
        rep.margin = std::min({incl, gap, dom_clear});
        rep.verdict = rep.margin > 0.0 ? Verdict::Certified : Verdict::Refuted;
        std::ostringstream os;
        os << "stable inclusion " << incl << ", component gap " << gap
           << ", domain clearance " << dom_clear;
        if (!sys.affine() && sys.bump_crosses_branch_boundary())
            os << "; warning: bump support crosses a branch-domain boundary";
        rep.note = os.str();
        (void)u;
    } catch (const std::exception& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("map evaluation failed: ") + e.what();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// BH2: strict cone invariance plus uniform expansion/contraction.

inline ConditionReport check_BH2(const MapSystem& sys, const ReferenceCube& cube,
                                 const ConeParams& cones, const CheckOptions& opts = {}) {
    ConditionReport rep;
    rep.method = sys.affine() ? "analytic" : "sampled";
    (void)cube;
    const double alpha = cones.alpha, ap = cones.alpha_prime;
    double worst_uu = 0.0, worst_u = 0.0, worst_s = 0.0;
    double expansion = std::numeric_limits<double>::infinity();
    double contraction = 0.0;
    for (Branch b : {Branch::A, Branch::B}) {
        for (const AmbientPoint& p : detail::jacobian_samples(sys, b, opts.jacobian_grid)) {
            auto r = detail::cone_rates(sys.jacobian_branch(b, p), sys.s(), sys.u(), alpha);
            worst_uu = std::max(worst_uu, r.uu);
            worst_u = std::max(worst_u, r.u);
            worst_s = std::max(worst_s, r.s);
            expansion = std::min(expansion, r.expansion);
            contraction = std::max(contraction, r.contraction);
        }
    }
    const double inv_margin = std::min({ap - worst_uu, ap - worst_u, ap - worst_s});
    const double hyp_margin = std::min(expansion - 1.0, 1.0 - contraction);
    rep.margin = std::min(inv_margin, hyp_margin);
    rep.verdict = rep.margin > 0.0 ? Verdict::Certified : Verdict::Refuted;
    std::ostringstream os;
    os << "achieved apertures uu " << worst_uu << ", u " << worst_u << ", s " << worst_s
       << " against alpha' " << ap << "; expansion " << expansion << ", contraction "
       << contraction;
    rep.note = os.str();
    return rep;
}

// ---------------------------------------------------------------------------
// BH3: Markov rectangles A = f^{-1}(f(A-slab) cap C), B likewise.

struct BH3Result {
    ConditionReport report;
    MarkovBox box_a, box_b;
};

inline BH3Result check_BH3(const MapSystem& sys, const ReferenceCube& cube,
                           const CheckOptions& opts = {}) {
    BH3Result out;
    ConditionReport& rep = out.report;
    rep.method = sys.affine() ? "analytic" : "sampled";
    const int s = sys.s(), u = sys.u();
    const double delta = cube.delta;
    const double lambda = sys.model.lambda;

    auto make_box = [&](Branch b) -> MarkovBox {
        MarkovBox mb;
        const BranchMap& br = sys.model.F.branch(b);
        mb.stable = Box(Vec::Constant(s, -1.0), Vec::Constant(s, 1.0));
        mb.unstable = br.dom;
        const double shift = sys.model.central_shift(b);
        mb.c_lo = (-delta + shift) / lambda;
        mb.c_hi = (delta + shift) / lambda;
        if (!sys.affine()) {
            // bracket the central extent numerically on a (xs, xu) grid
            double lo = -std::numeric_limits<double>::infinity();
            double hi = std::numeric_limits<double>::infinity();
            const int g = std::max(2, opts.box_grid);
            for (int i = 0; i < g; ++i) {
                for (int k = 0; k < g; ++k) {
                    Vec xs = Vec::Constant(s, -1.0 + 2.0 * i / (g - 1));
                    Vec xu = br.dom.lo + (br.dom.hi - br.dom.lo) * (double(k) / (g - 1));
                    auto fc = [&](double c) {
                        return sys.apply_branch(b, AmbientPoint{xs, c, xu}).xc;
                    };
                    lo = std::max(lo, detail::bisect([&](double c) { return fc(c) + delta; },
                                                     -delta, delta, 1e-13));
                    hi = std::min(hi, detail::bisect([&](double c) { return fc(c) - delta; },
                                                     -delta, delta, 1e-13));
                }
            }
            mb.c_lo = lo;
            mb.c_hi = hi;
        }
        return mb;
    };

    try {
        out.box_a = make_box(Branch::A);
        out.box_b = make_box(Branch::B);
    } catch (const std::exception& e) {
        rep.verdict = Verdict::Refuted;
        rep.note = std::string("Markov rectangle degenerate: ") + e.what();
        return out;
    }

    // rectangles disjoint from del^u C: central slab strictly inside
    // (-delta, delta), unstable domain strictly inside (-1,1)^u
    double m = std::numeric_limits<double>::infinity();
    for (const MarkovBox* mb : {&out.box_a, &out.box_b}) {
        m = std::min(m, mb->c_hi - mb->c_lo);            // nonempty
        m = std::min(m, delta - mb->c_hi);
        m = std::min(m, mb->c_lo + delta);
        m = std::min(m, 1.0 - mb->unstable.hi.maxCoeff());
        m = std::min(m, 1.0 + mb->unstable.lo.minCoeff());
    }
    // images disjoint from del^s C (stable inclusion of the vertical cubes)
    Box img_a = detail::branch_image_hull(sys, Branch::A, out.box_a.unstable, delta, opts.box_grid);
    Box img_b = detail::branch_image_hull(sys, Branch::B, out.box_b.unstable, delta, opts.box_grid);
    for (const Box* bx : {&img_a, &img_b}) {
        m = std::min(m, 1.0 - bx->hi.head(s).maxCoeff());
        m = std::min(m, 1.0 + bx->lo.head(s).minCoeff());
    }
    (void)u;
    rep.margin = m;
    rep.verdict = m > 0.0 ? Verdict::Certified : Verdict::Refuted;
    std::ostringstream os;
    os << "A central slab [" << out.box_a.c_lo << ", " << out.box_a.c_hi << "], B ["
       << out.box_b.c_lo << ", " << out.box_b.c_hi << "] inside (-" << delta << ", " << delta
       << ")";
    rep.note = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// BH4: disks through Ws_loc(P) / Ws_loc(Q) are mutually disjoint and
// avoid the central faces.  Sufficient inequality on the slope bound;
// above it the check is inconclusive, not refuted.

struct BH4Result {
    ConditionReport report;
    double alpha_admissible{};
};

inline BH4Result check_BH4(const MapSystem& sys, const ReferenceCube& cube, double alpha,
                           const SystemFrame& sf) {
    BH4Result out;
    out.report.method = sys.affine() ? "analytic" : "sampled";
    (void)cube;
    out.alpha_admissible = sf.frame.lip_bound;
    if (sf.central_gap() <= 0.0) {
        out.report.verdict = Verdict::Refuted;
        out.report.margin = sf.central_gap();
        out.report.note = "reference saddles not separated in the central coordinate";
        return out;
    }
    if (out.alpha_admissible <= 0.0) {
        out.report.verdict = Verdict::Refuted;
        out.report.margin = out.alpha_admissible;
        out.report.note = "disks through a reference manifold cannot avoid the central faces";
        return out;
    }
    out.report.margin = out.alpha_admissible - alpha;
    if (out.report.margin >= 0.0) {
        out.report.verdict = Verdict::Certified;
    } else {
        out.report.verdict = Verdict::Inconclusive;
        out.report.note = "alpha above the sufficient bound; not necessarily false";
    }
    std::ostringstream os;
    os << "alpha_admissible " << out.alpha_admissible << " for alpha " << alpha
       << " (central gap " << sf.central_gap() << ")";
    if (out.report.note.empty()) out.report.note = os.str();
    else out.report.note += "; " + os.str();
    return out;
}

// ---------------------------------------------------------------------------
// BH5 / BH6: position laws of branch images.

namespace detail {

/// Random admissible disk whose clearance over the given stable
/// manifold equals `clearance`; the clearance is affine in the base
/// central value with unit slope, so one evaluation pins it.
inline UUDisk random_disk_at_clearance(const MapSystem& sys, const SystemFrame& sf,
                                       const StableGraph& wrt, double clearance,
                                       double slope_scale, std::mt19937_64& rng) {
    const int s = sys.s(), u = sys.u();
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec xs0(s);
    for (int i = 0; i < s; ++i) xs0(i) = 0.5 * unit(rng);
    Mat Gs(s, u);
    RowVec gc(u);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < u; ++j) Gs(i, j) = unit(rng);
    for (int j = 0; j < u; ++j) gc(j) = unit(rng);
    Mat m(s + 1, u);
    m.topRows(s) = Gs;
    m.bottomRows(1) = gc;
    const double norm = op_norm(m);
    const double target = slope_scale * sf.frame.lip_bound * std::abs(unit(rng));
    if (norm > 0.0) {
        Gs *= target / norm;
        gc *= target / norm;
    }
    UUDisk d = UUDisk::make_affine(xs0, 0.0, Gs, gc);
    const double off = disk_clearance(d, wrt);
    d = UUDisk::make_affine(xs0, clearance - off, Gs, gc);
    return d;
}

struct PositionAudit {
    long violations = 0;
    long straddles = 0;   ///< admissibility refusals on images
    long checked = 0;
    double worst_clearance = std::numeric_limits<double>::infinity();
};

/// Checks every applicable position law (BH5 items 1-6 and BH6) on one
/// disk of a known class.
inline void audit_disk(const MapSystem& sys, const SystemFrame& sf, const UUDisk& d,
                       PositionClass cls, PositionAudit& audit, int sample_grid = 65) {
    auto image_position = [&](Branch b) {
        UUDisk img = graph_transform(d, b, sys, sample_grid);
        return classify_position(img, sf.frame);
    };
    try {
        ++audit.checked;
        switch (cls) {
            case PositionClass::LeftOfP: {
                Position a = image_position(Branch::A);
                Position b = image_position(Branch::B);
                if (a.cls != PositionClass::LeftOfP) ++audit.violations;       // item 2
                if (b.cls != PositionClass::LeftOfP) ++audit.violations;       // item 5
                audit.worst_clearance =
                    std::min({audit.worst_clearance, -a.clearance_p, -b.clearance_p});
                break;
            }
            case PositionClass::MeetsP: {
                Position b = image_position(Branch::B);
                if (b.cls != PositionClass::LeftOfP) ++audit.violations;       // item 5
                audit.worst_clearance = std::min(audit.worst_clearance, -b.clearance_p);
                break;
            }
            case PositionClass::Between: {
                Position a = image_position(Branch::A);
                Position b = image_position(Branch::B);
                // items 1 and 4
                if (!(a.clearance_p > 0.0)) ++audit.violations;
                if (!(b.clearance_q < 0.0)) ++audit.violations;
                // BH6: at least one image in between
                const bool a_between = a.cls == PositionClass::Between;
                const bool b_between = b.cls == PositionClass::Between;
                if (!a_between && !b_between) ++audit.violations;
                if (a_between)
                    audit.worst_clearance =
                        std::min({audit.worst_clearance, a.clearance_p, -a.clearance_q});
                if (b_between)
                    audit.worst_clearance =
                        std::min({audit.worst_clearance, b.clearance_p, -b.clearance_q});
                break;
            }
            case PositionClass::MeetsQ: {
                Position a = image_position(Branch::A);
                if (a.cls != PositionClass::RightOfQ) ++audit.violations;      // item 6
                audit.worst_clearance = std::min(audit.worst_clearance, a.clearance_q);
                break;
            }
            case PositionClass::RightOfQ: {
                Position a = image_position(Branch::A);
                Position b = image_position(Branch::B);
                if (a.cls != PositionClass::RightOfQ) ++audit.violations;      // item 6
                if (b.cls != PositionClass::RightOfQ) ++audit.violations;      // item 3
                audit.worst_clearance =
                    std::min({audit.worst_clearance, a.clearance_q, b.clearance_q});
                break;
            }
        }
    } catch (const std::exception&) {
        ++audit.straddles;
    }
}

}  // namespace detail

inline ConditionReport check_BH5(const MapSystem& sys, const ReferenceCube& cube, double alpha,
                                 const SystemFrame& sf, const CheckOptions& opts = {}) {
    ConditionReport rep;
    rep.method = sys.affine() ? "analytic" : "sampled";
    (void)cube;
    const BlenderModel& m = sys.model;
    if (!(m.lambda > 0.0)) {
        rep.verdict = Verdict::Refuted;
        rep.note = "central multiplier must be positive to preserve orientation";
        return rep;
    }

    // Items 1-4 hold exactly for positive central multipliers (each
    // branch fixes its own reference unstable coordinate, so clearances
    // scale by lambda > 0 and only degrade to zero at the class
    // boundary).  The uniform margins live in items 5-6, whose
    // mu-clearance must beat the slope reach; bump displacements shave
    // off at most twice their central amplitude.
    const Vec xstar_b = m.F.branch_b.U.inverse() * (-m.F.branch_b.bu);
    const Vec a_u = m.F.a_u();
    const Vec xstar_a = m.F.branch_a.U.inverse() * (a_u - m.F.branch_a.bu);
    const double disp = detail::max_central_displacement(sys);
    const double item5 = m.mu - m.lambda * alpha * xstar_b.norm();
    const double item6 = m.mu - m.lambda * alpha * (xstar_a - a_u).norm();
    const double uniform_margin = std::min(item5, item6) - 2.0 * disp;
    if (uniform_margin <= 0.0) {
        rep.verdict = Verdict::Refuted;
        rep.margin = uniform_margin;
        rep.note = "mu-clearance of items 5-6 lost at this alpha";
        return rep;
    }

    std::mt19937_64 rng(opts.seed ^ 0xb5ULL);
    detail::PositionAudit audit;
    const double qc = sf.central_gap();
    const double d_u = unstable_diameter(sys.u());
    const double reach = alpha * d_u;
    const double tol = sf.frame.tol;
    // clearance ranges are pinned against the saddle named per class,
    // so slopes cannot flip a disk out of its intended class
    struct ClassSpec { PositionClass cls; bool pin_p; double lo, hi; };
    const double head = std::min(0.4 * qc, 0.5 * (m.delta - qc));
    const ClassSpec classes[] = {
        {PositionClass::LeftOfP, true, -head, -2.0 * tol},
        {PositionClass::MeetsP, true, 0.0, 0.0},
        {PositionClass::Between, true, 2.0 * tol, qc - reach - 2.0 * tol},
        {PositionClass::MeetsQ, false, 0.0, 0.0},
        {PositionClass::RightOfQ, false, 2.0 * tol, head},
    };
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& cs : classes) {
        const double hi = std::max(cs.lo, cs.hi);
        for (int k = 0; k < opts.disks_per_class; ++k) {
            const double c = cs.lo + (hi - cs.lo) * unit(rng);
            UUDisk d = detail::random_disk_at_clearance(
                sys, sf, cs.pin_p ? sf.frame.ws_p : sf.frame.ws_q, c, 0.98, rng);
            detail::audit_disk(sys, sf, d, cs.cls, audit);
        }
    }
    std::ostringstream os;
    os << audit.checked << " disks audited, " << audit.violations << " violations, "
       << audit.straddles << " straddles; worst sampled clearance " << audit.worst_clearance;
    rep.note = os.str();
    if (audit.violations > 0) {
        rep.verdict = Verdict::Refuted;
        rep.margin = std::min(0.0, -static_cast<double>(audit.violations));
        return rep;
    }
    if (audit.straddles > audit.checked / 10) {
        rep.verdict = Verdict::Inconclusive;
        rep.note += "; too many boundary-straddling classifications";
        return rep;
    }
    rep.margin = uniform_margin;
    rep.verdict = rep.margin > 0.0 ? Verdict::Certified : Verdict::Inconclusive;
    return rep;
}

inline ConditionReport check_BH6(const MapSystem& sys, const ReferenceCube& cube, double alpha,
                                 const SystemFrame& sf, const CheckOptions& opts = {}) {
    ConditionReport rep;
    rep.method = sys.affine() ? "analytic" : "sampled";
    (void)cube;
    const BlenderModel& m = sys.model;
    if (!(m.lambda > 1.0 && m.lambda < 2.0)) {
        rep.verdict = Verdict::Refuted;
        rep.note = "lambda outside (1,2): branch intervals cannot cover the gap";
        return rep;
    }
    auto cov = covering_check(m.central());
    if (!cov.certified) {
        rep.verdict = Verdict::Refuted;
        rep.note = "central covering failed: " + cov.reason;
        return rep;
    }
    const double d_u = unstable_diameter(sys.u());
    // bump displacements shift the branch thresholds by at most
    // disp * (1 + 2/(lambda-1)) (fixed points move by disp/(lambda-1))
    const double disp = detail::max_central_displacement(sys);
    const double shift = disp * (1.0 + 2.0 / (m.lambda - 1.0));
    double margin = 0.5 * cov.overlap_width - alpha * d_u - shift;
    if (sys.affine()) {
        rep.margin = margin;
        rep.verdict = margin > 0.0 ? Verdict::Certified : Verdict::Inconclusive;
        std::ostringstream os;
        os << "overlap width " << cov.overlap_width << ", alpha reach " << alpha * d_u;
        rep.note = os.str();
        if (rep.verdict == Verdict::Inconclusive)
            rep.note += "; alpha too large for the sufficient covering inequality";
        return rep;
    }
    // sampled path: Monte Carlo over in-between disks, try branch A
    // then branch B, demand an in-between image with positive clearance
    std::mt19937_64 rng(opts.seed ^ 0xb6ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double qc = sf.central_gap();
    const double reach = alpha * d_u;
    long violations = 0, straddles = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < opts.disks_per_class; ++k) {
        const double tol = sf.frame.tol;
        const double c = 2.0 * tol + (qc - reach - 4.0 * tol) * unit(rng);
        UUDisk d = detail::random_disk_at_clearance(sys, sf, sf.frame.ws_p, c, 0.98, rng);
        try {
            bool ok = false;
            for (Branch b : {Branch::A, Branch::B}) {
                UUDisk img = graph_transform(d, b, sys);
                Position pos = classify_position(img, sf.frame);
                if (pos.cls == PositionClass::Between) {
                    ok = true;
                    worst = std::min({worst, pos.clearance_p, -pos.clearance_q});
                    break;
                }
            }
            if (!ok) ++violations;
        } catch (const std::exception&) {
            ++straddles;
        }
    }
    std::ostringstream os;
    os << opts.disks_per_class << " in-between disks, " << violations << " without an "
       << "in-between image, " << straddles << " straddles; worst sampled clearance " << worst;
    rep.note = os.str();
    if (violations > 0) {
        rep.verdict = Verdict::Refuted;
        rep.margin = -static_cast<double>(violations);
        return rep;
    }
    rep.margin = margin;
    rep.verdict = rep.margin > 0.0 ? Verdict::Certified : Verdict::Inconclusive;
    return rep;
}

// ---------------------------------------------------------------------------

inline BlenderCertificate certify_blender(const MapSystem& sys, const ConeParams& cones,
                                          const CheckOptions& opts = {}) {
    BlenderCertificate cert;
    cert.cones = cones;
    const ReferenceCube cube = sys.model.cube();

    cert.bh1 = check_BH1(sys, cube, opts);
    cert.bh2 = check_BH2(sys, cube, cones, opts);
    auto bh3 = check_BH3(sys, cube, opts);
    cert.bh3 = bh3.report;
    cert.markov_a = bh3.box_a;
    cert.markov_b = bh3.box_b;

    SystemFrame sf;
    try {
        sf = SystemFrame::build(sys, opts);
    } catch (const std::exception& e) {
        ConditionReport bad;
        bad.verdict = Verdict::Refuted;
        bad.note = std::string("reference saddles could not be continued: ") + e.what();
        cert.bh4 = cert.bh5 = cert.bh6 = bad;
        return cert;
    }
    auto bh4 = check_BH4(sys, cube, cones.alpha, sf);
    cert.bh4 = bh4.report;
    cert.alpha_admissible = bh4.alpha_admissible;
    cert.bh5 = check_BH5(sys, cube, cones.alpha, sf, opts);
    cert.bh6 = check_BH6(sys, cube, cones.alpha, sf, opts);

    // splitting rates over the sampled Jacobians
    double contraction = 0.0, expansion = std::numeric_limits<double>::infinity();
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (Branch b : {Branch::A, Branch::B}) {
        for (const AmbientPoint& p : detail::jacobian_samples(sys, b, opts.jacobian_grid)) {
            Mat j = sys.jacobian_branch(b, p);
            contraction = std::max(contraction, op_norm(j.topLeftCorner(sys.s(), sys.s())));
            expansion = std::min(expansion, sigma_min(j.bottomRightCorner(sys.u(), sys.u())));
            cmin = std::min(cmin, j(sys.s(), sys.s()));
            cmax = std::max(cmax, j(sys.s(), sys.s()));
        }
    }
    cert.rates.stable_contraction = contraction;
    cert.rates.central_min = cmin;
    cert.rates.central_max = cmax;
    cert.rates.unstable_expansion = expansion;
    cert.rates.dominated = contraction < cmin && cmax < expansion;
    return cert;
}

}  // namespace bhlab

#endif  // BHLAB_AXIOMS_HPP
