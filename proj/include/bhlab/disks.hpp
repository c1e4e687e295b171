#ifndef BHLAB_DISKS_HPP
#define BHLAB_DISKS_HPP

// uu-disks as Lipschitz graphs over the full unstable cube, s-disks as
// flats, position classification against the reference stable
// manifolds, and the branch graph transform.
//
// A uu-disk is stored either exactly (affine graph) or on a regular
// grid with a certified slope bound.  Positions are decided by the
// disk's central clearance over the two reference unstable
// coordinates, which is valid precisely when the slope is below the
// admissibility bound of the model; disks above it are refused.

#include "map_system.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace bhlab {

/// Exact graph xu |-> (xs0 + Gs xu, xc0 + gc xu).
struct AffineGraph {
    Vec xs0;
    double xc0{};
    Mat Gs;     ///< s x u stable slope
    RowVec gc;  ///< 1 x u central slope

    double slope_norm() const {
        Mat m(Gs.rows() + 1, Gs.cols());
        m.topRows(Gs.rows()) = Gs;
        m.bottomRows(1) = gc;
        return op_norm(m);
    }
};

/// Regular-grid graph with multilinear interpolation.  values is
/// (s+1) x n_per_axis^u; row s holds the central coordinate.
struct SampledGraph {
    int u{1};
    int n_per_axis{65};
    Mat values;
    double lip_certified{};  ///< 1.5 x difference-quotient bound

    int node_count() const {
        int n = 1;
        for (int j = 0; j < u; ++j) n *= n_per_axis;
        return n;
    }
    double coord(int k) const { return -1.0 + 2.0 * k / (n_per_axis - 1); }

    Vec node_xu(int idx) const {
        Vec x(u);
        for (int j = 0; j < u; ++j) {
            x(j) = coord(idx % n_per_axis);
            idx /= n_per_axis;
        }
        return x;
    }

    Vec eval(const Vec& xu) const {
        // multilinear blend of the 2^u surrounding corners
        std::vector<int> base(u);
        std::vector<double> frac(u);
        const double h = 2.0 / (n_per_axis - 1);
        for (int j = 0; j < u; ++j) {
            double t = (xu(j) + 1.0) / h;
            int k = static_cast<int>(std::floor(t));
            k = std::max(0, std::min(n_per_axis - 2, k));
            base[j] = k;
            frac[j] = t - k;
        }
        Vec out = Vec::Zero(values.rows());
        const int corners = 1 << u;
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            int idx = 0, stride = 1;
            for (int j = 0; j < u; ++j) {
                const int bit = (c >> j) & 1;
                w *= bit ? frac[j] : 1.0 - frac[j];
                idx += (base[j] + bit) * stride;
                stride *= n_per_axis;
            }
            out += w * values.col(idx);
        }
        return out;
    }

    void certify_lip() {
        const double h = 2.0 / (n_per_axis - 1);
        double sq = 0.0;
        int stride = 1;
        for (int j = 0; j < u; ++j) {
            double axis_max = 0.0;
            for (int idx = 0; idx < node_count(); ++idx) {
                if ((idx / stride) % n_per_axis == n_per_axis - 1) continue;
                axis_max = std::max(axis_max,
                                    (values.col(idx + stride) - values.col(idx)).norm() / h);
            }
            sq += axis_max * axis_max;
            stride *= n_per_axis;
        }
        lip_certified = 1.5 * std::sqrt(sq);
    }
};

struct UUDisk {
    std::variant<AffineGraph, SampledGraph> rep;

    bool is_affine() const { return std::holds_alternative<AffineGraph>(rep); }
    const AffineGraph& affine() const { return std::get<AffineGraph>(rep); }
    const SampledGraph& sampled() const { return std::get<SampledGraph>(rep); }

    double lip() const {
        return is_affine() ? affine().slope_norm() : sampled().lip_certified;
    }

    /// Graph values (xs, xc) over an unstable coordinate.
    std::pair<Vec, double> eval(const Vec& xu) const {
        if (is_affine()) {
            const auto& a = affine();
            return {a.xs0 + a.Gs * xu, a.xc0 + a.gc.dot(xu)};
        }
        Vec v = sampled().eval(xu);
        const int s = static_cast<int>(v.size()) - 1;
        return {v.head(s), v(s)};
    }

    AmbientPoint point_at(const Vec& xu) const {
        auto [xs, xc] = eval(xu);
        return AmbientPoint{std::move(xs), xc, xu};
    }

    double central_at(const Vec& xu) const { return eval(xu).second; }

    /// Vertical flat disk at fixed (xs, xc).
    static UUDisk flat(Vec xs, double xc, int u) {
        AffineGraph g;
        g.xs0 = std::move(xs);
        g.xc0 = xc;
        g.Gs = Mat::Zero(g.xs0.size(), u);
        g.gc = RowVec::Zero(u);
        return UUDisk{g};
    }

    static UUDisk make_affine(Vec xs0, double xc0, Mat Gs, RowVec gc) {
        return UUDisk{AffineGraph{std::move(xs0), xc0, std::move(Gs), std::move(gc)}};
    }

    /// Resamples onto a regular grid (used to feed the sampled pipeline).
    SampledGraph to_sampled(int n_per_axis = 65) const {
        if (!is_affine()) return sampled();
        SampledGraph g;
        g.u = static_cast<int>(affine().Gs.cols());
        g.n_per_axis = n_per_axis;
        g.values.resize(affine().xs0.size() + 1, g.node_count());
        for (int idx = 0; idx < g.node_count(); ++idx) {
            auto [xs, xc] = eval(g.node_xu(idx));
            g.values.col(idx).head(xs.size()) = xs;
            g.values.col(idx)(xs.size()) = xc;
        }
        g.certify_lip();
        return g;
    }
};

/// Flat s-disk: graph over [-1,1]^s pinned at (xc, xu).
struct SDisk {
    double xc{};
    Vec xu;
    double lip{0.0};
};

// ---------------------------------------------------------------------------
// Reference stable manifolds and position classification

/// Stable manifold of a reference saddle as a graph over the stable
/// cube: xs |-> (xc(xs), xu(xs)).  Flat for the affine model; sampled
/// (s = 1 grid) for perturbed maps.
struct StableGraph {
    // flat part
    double xc_flat{};
    Vec xu_flat;
    // optional sampled part (empty = flat)
    std::vector<double> grid;           ///< xs grid (s = 1 only)
    std::vector<double> xc_values;
    std::vector<Vec> xu_values;
    double slope_bound{0.0};

    bool flat() const { return grid.empty(); }

    double xc_at(double xs) const {
        if (flat()) return xc_flat;
        return interp_scalar(xs, xc_values);
    }
    Vec xu_at(double xs) const {
        if (flat()) return xu_flat;
        const int u = static_cast<int>(xu_values.front().size());
        Vec out(u);
        for (int j = 0; j < u; ++j) {
            std::vector<double> comp(xu_values.size());
            for (size_t i = 0; i < xu_values.size(); ++i) comp[i] = xu_values[i](j);
            out(j) = interp_scalar(xs, comp);
        }
        return out;
    }

  private:
    double interp_scalar(double x, const std::vector<double>& vals) const {
        if (x <= grid.front()) return vals.front();
        if (x >= grid.back()) return vals.back();
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        size_t k = static_cast<size_t>(it - grid.begin()) - 1;
        const double t = (x - grid[k]) / (grid[k + 1] - grid[k]);
        return (1.0 - t) * vals[k] + t * vals[k + 1];
    }
};

/// Everything position classification needs: the two stable manifolds
/// and the admissibility bound below which central clearances decide
/// the homotopy class.
struct StableFrame {
    StableGraph ws_p, ws_q;
    double lip_bound{};
    double tol{1e-10};

    static StableFrame for_model(const BlenderModel& m, double tol = 1e-10) {
        StableFrame f;
        f.ws_p.xc_flat = 0.0;
        f.ws_p.xu_flat = Vec::Zero(m.u());
        f.ws_q.xc_flat = m.q_central();
        f.ws_q.xu_flat = m.F.a_u();
        f.lip_bound = admissible_lip_bound(m);
        f.tol = tol;
        return f;
    }
};

/// Signed central clearance of a disk over a stable graph: positive
/// when the disk passes above (to the right of) the manifold.  The
/// intersection unstable coordinate is the fixed point of
/// xu -> W.xu(disk.xs(xu)), a contraction for admissible slopes.
inline double disk_clearance(const UUDisk& d, const StableGraph& w) {
    Vec xu = w.flat() ? w.xu_flat : w.xu_at(0.0);
    for (int it = 0; it < 64; ++it) {
        if (w.flat()) { xu = w.xu_flat; break; }
        auto [xs, xc] = d.eval(xu);
        Vec next = w.xu_at(xs(0));
        const double step = (next - xu).norm();
        xu = next;
        if (step < 1e-14) break;
    }
    auto [xs, xc] = d.eval(xu);
    return xc - w.xc_at(w.flat() ? 0.0 : xs(0));
}

enum class PositionClass { LeftOfP, MeetsP, Between, MeetsQ, RightOfQ };

inline const char* position_name(PositionClass c) {
    switch (c) {
        case PositionClass::LeftOfP: return "left_of_P";
        case PositionClass::MeetsP: return "meets_P";
        case PositionClass::Between: return "between";
        case PositionClass::MeetsQ: return "meets_Q";
        case PositionClass::RightOfQ: return "right_of_Q";
    }
    return "?";
}

struct Position {
    PositionClass cls{};
    double clearance_p{};  ///< central clearance over Ws_loc(P)
    double clearance_q{};  ///< central clearance over Ws_loc(Q)
};

inline Position classify_position(const UUDisk& d, const StableFrame& frame) {
    if (d.lip() > frame.lip_bound * (1.0 + 1e-12))
        throw std::invalid_argument(
            "classify_position: disk slope above the admissibility bound");
    Position pos;
    pos.clearance_p = disk_clearance(d, frame.ws_p);
    pos.clearance_q = disk_clearance(d, frame.ws_q);
    const double tol = frame.tol;
    const double cp = pos.clearance_p, cq = pos.clearance_q;
    if (cp <= tol && cq >= -tol)
        throw std::runtime_error("classify_position: disk violates alpha-admissibility "
                                 "(left of P and right of Q simultaneously)");
    if (std::abs(cp) <= tol) pos.cls = PositionClass::MeetsP;
    else if (std::abs(cq) <= tol) pos.cls = PositionClass::MeetsQ;
    else if (cp < 0.0) pos.cls = PositionClass::LeftOfP;
    else if (cq > 0.0) pos.cls = PositionClass::RightOfQ;
    else pos.cls = PositionClass::Between;
    return pos;
}

inline Position classify_position(const UUDisk& d, const BlenderModel& m, double tol = 1e-10) {
    return classify_position(d, StableFrame::for_model(m, tol));
}

// ---------------------------------------------------------------------------
// Graph transform

/// Image of a uu-disk under one branch, reparametrized as a graph over
/// the full unstable cube.  Affine in, affine out for the exact model;
/// otherwise the image is resampled on a regular grid and its slope
/// bound recertified.
inline UUDisk graph_transform(const UUDisk& d, Branch b, const MapSystem& sys,
                              int n_per_axis = 65) {
    const BlenderModel& m = sys.model;
    const BranchMap& br = m.F.branch(b);
    if (sys.affine() && d.is_affine()) {
        const auto& g = d.affine();
        Mat Uinv = br.U.inverse();
        Vec xstar = Uinv * (-br.bu);  // branch preimage of xu = 0
        AffineGraph out;
        out.Gs = br.S * g.Gs * Uinv;
        out.gc = m.lambda * g.gc * Uinv;
        out.xs0 = br.S * (g.xs0 + g.Gs * xstar) + br.bs;
        out.xc0 = m.lambda * (g.xc0 + g.gc.dot(xstar)) - m.central_shift(b);
        return UUDisk{out};
    }
    SampledGraph out;
    out.u = m.u();
    out.n_per_axis = n_per_axis;
    out.values.resize(m.s() + 1, out.node_count());
    Eigen::PartialPivLU<Mat> ulu(br.U);
    for (int idx = 0; idx < out.node_count(); ++idx) {
        const Vec y = out.node_xu(idx);
        // solve f_u(disk(xu), xu) = y for xu in the branch domain
        Vec xu = ulu.solve(y - br.bu);
        for (int it = 0; it < 20 && !sys.affine(); ++it) {
            AmbientPoint p = d.point_at(xu);
            Vec r = sys.apply_branch(b, p).xu - y;
            if (r.norm() < 1e-13) break;
            // unstable block of the Jacobian dominates; chain rule with
            // the disk slope is a higher-order correction
            Mat ju = sys.jacobian_branch(b, p).bottomRightCorner(m.u(), m.u());
            xu -= ju.partialPivLu().solve(r);
        }
        AmbientPoint img = sys.apply_branch(b, d.point_at(xu));
        out.values.col(idx).head(m.s()) = img.xs;
        out.values.col(idx)(m.s()) = img.xc;
    }
    out.certify_lip();
    return UUDisk{out};
}

}  // namespace bhlab

#endif  // BHLAB_DISKS_HPP
