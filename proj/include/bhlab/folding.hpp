#ifndef BHLAB_FOLDING_HPP
#define BHLAB_FOLDING_HPP

// Folding manifolds and the nested-iteration tangency locator.
//
// A folding manifold is a one-parameter family of uu-disks whose
// endpoint disks cross the reference saddle's local stable manifold
// and whose interior disks lie strictly in between the two reference
// manifolds.  Its image under the map contains another folding
// manifold: either the first branch reproduces one over the full
// parameter range, or a sub-window of the second branch does.  Nesting
// those windows pins down a parameter t* and a point where the fold is
// tangent to the local stable set.
//
// Disks are generated exactly on demand: a fold stores a generator
// t -> uu-disk, and an image fold's generator chains one branch
// transform onto its parent's.  For the affine model the chain is a
// composition of exact affine maps, so clearances at depth k are
// accurate to ~lambda^k * eps and window endpoints can be bisected to
// full precision.

#include "axioms.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bhlab {

enum class Saddle { P, Q };

struct FoldingManifold {
    Saddle saddle{Saddle::P};
    std::function<UUDisk(double)> gen;  ///< local t in [0,1] -> uu-disk
    // window bookkeeping: t_original = win_offset + win_scale * t_local
    double win_offset{0.0};
    double win_scale{1.0};
    double lip{0.0};
    int t_grid{257};
    double continuity_modulus{0.0};  ///< bound on disk variation per unit t
    int depth{0};                    ///< generator chain length

    UUDisk disk_at(double t_local) const { return gen(t_local); }
    double to_original(double t_local) const { return win_offset + win_scale * t_local; }
    UUDisk disk_at_original(double t_orig) const {
        return gen((t_orig - win_offset) / win_scale);
    }
};

/// Quadratic fold relative to a reference saddle: clearance profile
/// apex * (1 - (2t-1)^2) over the saddle's stable manifold (mirrored
/// for Q), flat or lip-sloped disks, and a stable drift along t so the
/// swept set is an immersed manifold with a genuine quadratic contact
/// at the apex.
inline FoldingManifold make_quadratic_fold(const MapSystem& sys, const SystemFrame& sf,
                                           Saddle saddle, double apex, double lip,
                                           int t_grid = 257, double drift_mag = 0.25) {
    const double gap = sf.central_gap();
    // an apex within position tolerance of the gap cannot keep its
    // interior disks strictly in between
    if (!(apex > 0.0 && apex < gap - 1e-9))
        throw std::invalid_argument("make_quadratic_fold: apex outside superposition interval");
    if (lip > sf.frame.lip_bound * (1.0 + 1e-12))
        throw std::invalid_argument("make_quadratic_fold: lip above the admissibility bound");
    const int s = sys.s(), u = sys.u();

    Vec xs_base = saddle == Saddle::P ? sf.saddle_p.xs : sf.saddle_q.xs;
    // keep the drifted base inside the open stable cube
    Vec drift = Vec::Zero(s);
    drift(0) = drift_mag;
    if (std::abs(xs_base(0)) + drift_mag > 0.9) drift(0) = 0.9 - std::abs(xs_base(0));

    RowVec gc = RowVec::Zero(u);
    gc(0) = lip;
    Mat Gs = Mat::Zero(s, u);

    const StableGraph wrt = saddle == Saddle::P ? sf.frame.ws_p : sf.frame.ws_q;
    const double orient = saddle == Saddle::P ? 1.0 : -1.0;

    FoldingManifold fold;
    fold.saddle = saddle;
    fold.t_grid = t_grid;
    fold.lip = lip;
    fold.continuity_modulus = 4.0 * apex + 2.0 * drift.norm();
    fold.gen = [=](double t) {
        const double sq = 2.0 * t - 1.0;
        const double target = orient * apex * (1.0 - sq * sq);
        UUDisk d = UUDisk::make_affine(xs_base + sq * drift, 0.0, Gs, gc);
        const double off = disk_clearance(d, wrt);
        return UUDisk::make_affine(xs_base + sq * drift, target - off, Gs, gc);
    };
    return fold;
}

/// Endpoint and in-between invariants of a fold, sampled on a grid.
struct FoldValidity {
    bool valid{false};
    double endpoint_worst{};   ///< max |clearance over own manifold| at t = 0, 1
    double interior_worst{};   ///< min in-between clearance over interior samples
};

inline FoldValidity validate_fold(const FoldingManifold& fold, const SystemFrame& sf,
                                  int n_samples = 65, double meets_tol = 1e-9) {
    FoldValidity v;
    const StableGraph& own = fold.saddle == Saddle::P ? sf.frame.ws_p : sf.frame.ws_q;
    v.endpoint_worst = std::max(std::abs(disk_clearance(fold.disk_at(0.0), own)),
                                std::abs(disk_clearance(fold.disk_at(1.0), own)));
    v.interior_worst = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < n_samples; ++i) {
        const double t = static_cast<double>(i) / (n_samples - 1);
        UUDisk d = fold.disk_at(t);
        const double cp = disk_clearance(d, sf.frame.ws_p);
        const double cq = disk_clearance(d, sf.frame.ws_q);
        v.interior_worst = std::min(v.interior_worst, std::min(cp, -cq));
    }
    v.valid = v.endpoint_worst <= meets_tol && v.interior_worst > 0.0;
    return v;
}

namespace detail {

/// Golden-section maximizer for the unimodal clearance profiles.
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a,
                                            double b, int iters = 80) {
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = f(x1);
        }
    }
    return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

struct ImageFoldOptions {
    double bisect_tol = 1e-13;  ///< parameter tolerance of window endpoints
    double postol = 1e-10;      ///< position tolerance for the branch decision
    double meets_tol = 1e-9;    ///< endpoint crossing tolerance
    int scan_grid = 257;
};

struct ImageFoldResult {
    FoldingManifold image;
    Branch branch_used{Branch::A};
    double t_lo{}, t_hi{};  ///< window in the original fold parameter
    bool rebracketed{false};
};

/// One application of the image lemma: transform the fold by the
/// branch fixing its reference saddle; if some interior image disk
/// reaches the far manifold, switch to the other branch over the
/// maximal parameter window on which its images stay in between.
inline ImageFoldResult image_fold(const FoldingManifold& fold, const MapSystem& sys,
                                  const SystemFrame& sf, const ImageFoldOptions& opts = {}) {
    const bool rel_p = fold.saddle == Saddle::P;
    const Branch first = rel_p ? Branch::A : Branch::B;
    const Branch second = rel_p ? Branch::B : Branch::A;
    const StableGraph& own = rel_p ? sf.frame.ws_p : sf.frame.ws_q;
    const StableGraph& other = rel_p ? sf.frame.ws_q : sf.frame.ws_p;
    const double sign = rel_p ? 1.0 : -1.0;

    auto parent = std::make_shared<FoldingManifold>(fold);

    // a fold whose amplitude sits below the position tolerance cannot
    // drive the window bisections
    const double own_sign = rel_p ? 1.0 : -1.0;
    const double amp = own_sign * disk_clearance(parent->disk_at(0.5), own);
    if (amp < 10.0 * opts.postol)
        throw std::runtime_error(
            "image_fold: fold amplitude below the position tolerance");

    // signed crossing functions: positive values mean trouble for the
    // first branch / validity for the second-branch window
    auto h_first = [&](double t) {
        UUDisk img = graph_transform(parent->disk_at(t), first, sys);
        return sign * disk_clearance(img, other);
    };
    auto own_first = [&](double t) {
        UUDisk img = graph_transform(parent->disk_at(t), first, sys);
        return disk_clearance(img, own);
    };
    auto h_second = [&](double t) {
        UUDisk img = graph_transform(parent->disk_at(t), second, sys);
        return sign * disk_clearance(img, own);
    };

    auto chained = [&](Branch b, double lo, double hi) {
        FoldingManifold out;
        out.saddle = fold.saddle;
        out.win_offset = fold.win_offset + fold.win_scale * lo;
        out.win_scale = fold.win_scale * (hi - lo);
        out.t_grid = fold.t_grid;
        out.depth = fold.depth + 1;
        out.continuity_modulus = fold.continuity_modulus;  // refreshed by caller if needed
        MapSystem sys_copy = sys;
        out.gen = [parent, b, lo, hi, sys_copy](double t) {
            return graph_transform(parent->disk_at(lo + (hi - lo) * t), b, sys_copy);
        };
        out.lip = std::max(out.disk_at(0.5).lip(),
                           std::max(out.disk_at(0.0).lip(), out.disk_at(1.0).lip()));
        return out;
    };

    // scan for the largest first-branch excursion toward the far manifold
    const int g = std::max(9, opts.scan_grid);
    double best_t = 0.5, best_v = -std::numeric_limits<double>::infinity();
    std::vector<double> hvals(g);
    for (int i = 0; i < g; ++i) {
        const double t = static_cast<double>(i) / (g - 1);
        hvals[i] = h_first(t);
        if (hvals[i] > best_v) { best_v = hvals[i]; best_t = t; }
    }
    const double span = 1.0 / (g - 1);
    auto [tmax, hmax] = detail::golden_max(h_first, std::max(0.0, best_t - span),
                                           std::min(1.0, best_t + span));

    ImageFoldResult res;
    if (hmax < -opts.postol) {
        // first branch keeps every interior disk in between
        const double e0 = own_first(0.0), e1 = own_first(1.0);
        if (std::abs(e0) <= opts.meets_tol && std::abs(e1) <= opts.meets_tol) {
            res.image = chained(first, 0.0, 1.0);
            res.branch_used = first;
            res.t_lo = fold.win_offset;
            res.t_hi = fold.win_offset + fold.win_scale;
            return res;
        }
        // endpoints drifted off the crossing (possible for sampled
        // perturbed maps): re-bracket the own-manifold crossings
        auto own_signed = [&](double t) { return sign * own_first(t); };
        const double t2 = detail::bisect(own_signed, 0.0, tmax, opts.bisect_tol);
        const double t3 = detail::bisect(own_signed, tmax, 1.0, opts.bisect_tol);
        res.image = chained(first, t2, t3);
        res.branch_used = first;
        res.rebracketed = true;
        res.t_lo = fold.win_offset + fold.win_scale * t2;
        res.t_hi = fold.win_offset + fold.win_scale * t3;
        return res;
    }

    // the first branch folds across the far manifold: locate a crossing
    // parameter t1, then take the maximal second-branch window around it
    double t1 = tmax;
    if (hmax > 0.0) {
        // first sign change from the left
        int i = 0;
        while (i + 1 < g && !(hvals[i] < 0.0 && hvals[i + 1] >= 0.0)) ++i;
        if (i + 1 < g)
            t1 = detail::bisect(h_first, static_cast<double>(i) / (g - 1),
                                static_cast<double>(i + 1) / (g - 1), opts.bisect_tol);
    }
    const double hs1 = h_second(t1);
    if (!(hs1 > 0.0))
        throw std::runtime_error(
            "image_fold: second branch fails to bracket the crossing; "
            "fold continuity too coarse for the bisection tolerance");
    if (!(h_second(0.0) < 0.0) || !(h_second(1.0) < 0.0))
        throw std::runtime_error("image_fold: window endpoints do not bracket");
    const double t2 = detail::bisect(h_second, 0.0, t1, opts.bisect_tol);
    const double t3 = detail::bisect(h_second, t1, 1.0, opts.bisect_tol);
    res.image = chained(second, t2, t3);
    res.branch_used = second;
    res.t_lo = fold.win_offset + fold.win_scale * t2;
    res.t_hi = fold.win_offset + fold.win_scale * t3;
    return res;
}

// ---------------------------------------------------------------------------
// Tangency location

struct TangencyOptions {
    ImageFoldOptions image;
    double alpha{0.01};          ///< stable-cone aperture for the certificates
    int max_pullback{60};        ///< Jacobian pullback length cap
    int coding_letters{60};      ///< word length used for unstable coding
};

struct TangencyResult {
    bool converged{false};
    double t_star{0.5};
    double interval_width{1.0};
    std::vector<Branch> word;
    std::vector<std::pair<double, double>> parameter_intervals;
    int rebrackets{0};

    AmbientPoint point;     ///< tangency point on the original fold
    Vec direction;          ///< unit vector in T(fold) and the stable cone
    double residual_angle{1.0};        ///< sin of the principal angle to T(fold)
    double direction_cone_margin{};    ///< stable-cone margin of `direction`
    double forward_cone_margin_min{};  ///< min margin of the pushed-forward direction
    double orbit_residual_max{};       ///< per-step consistency of the certified orbit
};

namespace detail {

/// Forward orbit of the witness point along a fixed word, with the
/// unstable coordinate re-anchored from the shifted coding so the
/// expanding replay stays on the coded orbit.
inline std::vector<AmbientPoint> certified_orbit(const MapSystem& sys,
                                                 const AmbientPoint& start,
                                                 const std::vector<Branch>& word,
                                                 int coding_letters, double* residual_max) {
    const int n = static_cast<int>(word.size());
    std::vector<AmbientPoint> orbit;
    orbit.reserve(n + 1);
    orbit.push_back(start);
    double res = 0.0;
    Vec xs = start.xs;
    double xc = start.xc;
    for (int k = 0; k < n; ++k) {
        AmbientPoint cur{xs, xc, orbit.back().xu};
        AmbientPoint img = sys.apply_branch(word[k], cur);
        std::vector<Branch> tail(word.begin() + k + 1,
                                 word.begin() + std::min(n, k + 1 + coding_letters));
        Vec xu_next = cantor_point(sys.model, tail);
        res = std::max(res, (img.xu - xu_next).norm());
        xs = img.xs;
        xc = img.xc;
        orbit.push_back(AmbientPoint{xs, xc, xu_next});
    }
    if (residual_max) *residual_max = res;
    return orbit;
}

}  // namespace detail

/// Nested-iteration tangency locator.  Iterates the image lemma,
/// composes the parameter windows back into the original fold, and
/// certifies the limit direction by Jacobian pullback.
inline TangencyResult locate_tangency(const FoldingManifold& fold, const MapSystem& sys,
                                      const SystemFrame& sf, int n_iter, double tol,
                                      const TangencyOptions& opts = {}) {
    TangencyResult res;
    FoldingManifold cur = fold;
    res.parameter_intervals.push_back({cur.win_offset, cur.win_offset + cur.win_scale});
    double prev_width = cur.win_scale;
    for (int i = 0; i < n_iter; ++i) {
        ImageFoldResult step = image_fold(cur, sys, sf, opts.image);
        if (step.image.win_scale > prev_width * (1.0 + 1e-9))
            throw std::runtime_error("locate_tangency: non-nested parameter windows");
        prev_width = step.image.win_scale;
        res.word.push_back(step.branch_used);
        res.rebrackets += step.rebracketed ? 1 : 0;
        cur = step.image;
        res.parameter_intervals.push_back({cur.win_offset, cur.win_offset + cur.win_scale});
        if (cur.win_scale < tol) { res.converged = true; break; }
    }
    res.interval_width = cur.win_scale;
    res.t_star = cur.win_offset + 0.5 * cur.win_scale;

    const int n = static_cast<int>(res.word.size());
    const int s = sys.s(), u = sys.u();

    // tangency point: original fold disk at t*, over the unstable
    // coordinate coded by the accumulated branch word
    Vec xu_star = cantor_point(sys.model, res.word);
    UUDisk d_star = fold.disk_at_original(res.t_star);
    res.point = d_star.point_at(xu_star);

    // certified forward orbit (affine Jacobians are constant, but the
    // orbit also feeds the perturbed-path Jacobians)
    const int pull = std::min(n, opts.max_pullback);
    std::vector<Branch> pull_word(res.word.begin(), res.word.begin() + pull);
    auto orbit = detail::certified_orbit(sys, res.point, pull_word, opts.coding_letters,
                                         &res.orbit_residual_max);

    // tangent vector of the final fold at its apex, pulled back along
    // the orbit; the pullback contracts onto the stable direction
    const double h = 1e-6;
    Vec xu_end = Vec::Zero(u);
    Vec pp = cur.disk_at(0.5 + h).point_at(xu_end).flat();
    Vec pm = cur.disk_at(0.5 - h).point_at(xu_end).flat();
    Vec v = pp - pm;
    if (v.norm() == 0.0) v = Vec::Unit(s + 1 + u, 0);
    v.normalize();
    for (int k = pull - 1; k >= 0; --k) {
        Mat j = sys.jacobian_branch(pull_word[k], orbit[k]);
        v = j.partialPivLu().solve(v);
        v.normalize();
    }
    res.direction = v;
    res.direction_cone_margin = cone_margin(v, s, u, ConeKind::S, opts.alpha);

    // principal angle between span(direction) and the fold tangent at t*
    Mat basis(s + 1 + u, u + 1);
    {
        UUDisk dp = fold.disk_at_original(std::min(1.0, res.t_star + h));
        UUDisk dm = fold.disk_at_original(std::max(0.0, res.t_star - h));
        Vec dt = (dp.point_at(xu_star).flat() - dm.point_at(xu_star).flat());
        basis.col(0) = dt;
        if (d_star.is_affine()) {
            const auto& g = d_star.affine();
            for (int j = 0; j < u; ++j) {
                Vec col = Vec::Zero(s + 1 + u);
                col.head(s) = g.Gs.col(j);
                col(s) = g.gc(j);
                col(s + 1 + j) = 1.0;
                basis.col(1 + j) = col;
            }
        } else {
            for (int j = 0; j < u; ++j) {
                Vec e = Vec::Zero(u);
                e(j) = h;
                Vec fp = d_star.point_at(xu_star + e).flat();
                Vec fm = d_star.point_at(xu_star - e).flat();
                basis.col(1 + j) = fp - fm;
            }
        }
    }
    for (int j = 0; j < basis.cols(); ++j)
        if (basis.col(j).norm() > 0.0) basis.col(j).normalize();
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat qthin = qr.householderQ() * Mat::Identity(s + 1 + u, u + 1);
    Vec proj = qthin * (qthin.transpose() * v);
    res.residual_angle = (v - proj).norm();

    // push the direction forward through the word and record the worst
    // stable-cone margin along the orbit
    double fwd_margin = std::numeric_limits<double>::infinity();
    Vec w = v;
    for (int k = 0; k < pull; ++k) {
        w = sys.jacobian_branch(pull_word[k], orbit[k]) * w;
        w.normalize();
        fwd_margin = std::min(fwd_margin, cone_margin(w, s, u, ConeKind::S, opts.alpha));
    }
    res.forward_cone_margin_min = pull > 0 ? fwd_margin : res.direction_cone_margin;
    return res;
}

}  // namespace bhlab

#endif  // BHLAB_FOLDING_HPP
