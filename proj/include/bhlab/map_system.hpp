#ifndef BHLAB_MAP_SYSTEM_HPP
#define BHLAB_MAP_SYSTEM_HPP

// A map object bundling evaluation and Jacobian callbacks: the affine
// model plus an optional sum of smooth bump displacements.  Every
// downstream routine (certification, graph transforms, tangency
// location) consumes this interface so the perturbed and exact paths
// share code.

#include "model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bhlab {

/// Compactly supported polynomial bump displacement
///   x |-> amplitude * (1 - |x-center|^2 / radius^2)^3  on its support.
/// The polynomial form gives exact value and derivative maxima:
/// max phi = 1, max |phi'| = 96/(25 sqrt 5) / radius.
struct BumpSpec {
    AmbientPoint center;
    double radius{};
    Vec amplitude;  ///< length n displacement direction, scaled

    static constexpr double profile_slope_max = 1.7171372947673977;  // 96/(25 sqrt 5)

    double c1_bound() const {
        return amplitude.norm() * std::max(1.0, profile_slope_max / radius);
    }

    double profile(const Vec& x) const {
        const double q = (x - center.flat()).squaredNorm() / (radius * radius);
        if (q >= 1.0) return 0.0;
        const double w = 1.0 - q;
        return w * w * w;
    }

    Vec displacement(const Vec& x) const { return amplitude * profile(x); }

    Mat jacobian(const Vec& x) const {
        const int n = static_cast<int>(x.size());
        Vec d = x - center.flat();
        const double q = d.squaredNorm() / (radius * radius);
        if (q >= 1.0) return Mat::Zero(n, n);
        const double w = 1.0 - q;
        // grad profile = -6 (1-q)^2 (x-c) / r^2
        Vec grad = (-6.0 * w * w / (radius * radius)) * d;
        return amplitude * grad.transpose();
    }
};

/// Evaluation/Jacobian interface over the two branches.  Affine when
/// the bump list is empty, in which case exact fast paths apply.
struct MapSystem {
    BlenderModel model;
    std::vector<BumpSpec> bumps;
    bool treat_as_sampled{false};  ///< route checks through the sampled path even when exact

    MapSystem() = default;
    explicit MapSystem(BlenderModel m) : model(std::move(m)) {}
    MapSystem(BlenderModel m, std::vector<BumpSpec> b)
        : model(std::move(m)), bumps(std::move(b)) {}

    bool affine() const { return bumps.empty() && !treat_as_sampled; }
    bool exact() const { return bumps.empty(); }
    int s() const { return model.s(); }
    int u() const { return model.u(); }
    int dim() const { return model.dim(); }

    Vec displacement(const Vec& x) const {
        Vec d = Vec::Zero(x.size());
        for (const auto& b : bumps) d += b.displacement(x);
        return d;
    }

    AmbientPoint apply_branch(Branch b, const AmbientPoint& p) const {
        AmbientPoint img = bhlab::apply_branch(model, b, p);
        if (!bumps.empty()) {
            Vec d = displacement(p.flat());
            img = AmbientPoint::from_flat(img.flat() + d, s(), u());
        }
        return img;
    }

    std::optional<ApplyResult> apply(const AmbientPoint& p) const {
        auto b = branch_of(model, p.xu);
        if (!b) return std::nullopt;
        return ApplyResult{apply_branch(*b, p), *b};
    }

    Mat jacobian_branch(Branch b, const AmbientPoint& p) const {
        Mat j = bhlab::jacobian_branch(model, b);
        for (const auto& bump : bumps) j += bump.jacobian(p.flat());
        return j;
    }

    /// Newton inversion; exact linear solve in the affine case.
    AmbientPoint inverse_branch(Branch b, const AmbientPoint& q, int max_iter = 30,
                                double tol = 1e-13) const {
        AmbientPoint x =
            exact() ? bhlab::inverse_branch(model, b, q) : inverse_branch_newton(b, q, max_iter, tol);
        return x;
    }

    /// Maximum C1 distance to the unperturbed model contributed by the
    /// bump list (parameter changes are baked into `model` itself).
    double bump_c1_bound() const {
        double c = 0.0;
        for (const auto& b : bumps) c += b.c1_bound();
        return c;
    }

    /// True when some bump support reaches across a branch-domain
    /// boundary in the unstable coordinate; BH1 connectivity must then
    /// be re-checked rather than assumed.
    bool bump_crosses_branch_boundary() const {
        for (const auto& b : bumps) {
            for (Branch br : {Branch::A, Branch::B}) {
                const Box& dom = model.F.branch(br).dom;
                bool inside = true, outside = false;
                for (int j = 0; j < u(); ++j) {
                    const double lo = b.center.xu(j) - b.radius;
                    const double hi = b.center.xu(j) + b.radius;
                    if (lo < dom.lo(j) || hi > dom.hi(j)) inside = false;
                    if (hi < dom.lo(j) || lo > dom.hi(j)) outside = true;
                }
                if (!inside && !outside) return true;
            }
        }
        return false;
    }

  private:
    AmbientPoint inverse_branch_newton(Branch b, const AmbientPoint& q, int max_iter,
                                       double tol) const {
        // start from the exact affine inverse, ignoring domain checks
        const BranchMap& br = model.F.branch(b);
        AmbientPoint x{br.S.partialPivLu().solve(q.xs - br.bs),
                       (q.xc + model.central_shift(b)) / model.lambda,
                       br.U.partialPivLu().solve(q.xu - br.bu)};
        const Vec target = q.flat();
        for (int it = 0; it < max_iter; ++it) {
            Vec r = apply_branch(b, x).flat() - target;
            if (r.norm() < tol) break;
            Vec step = jacobian_branch(b, x).partialPivLu().solve(r);
            x = AmbientPoint::from_flat(x.flat() - step, s(), u());
        }
        if ((apply_branch(b, x).flat() - target).norm() > 1e-8)
            throw std::runtime_error("inverse_branch: Newton failed to converge");
        return x;
    }
};

}  // namespace bhlab

#endif  // BHLAB_MAP_SYSTEM_HPP
