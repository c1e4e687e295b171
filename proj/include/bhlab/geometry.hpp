#ifndef BHLAB_GEOMETRY_HPP
#define BHLAB_GEOMETRY_HPP

// Coordinate conventions, the reference cube with its boundary
// decomposition, and the three cone families used throughout.
//
// Ambient space is R^s x R x R^u with block order (stable, central,
// unstable).  All norms are Euclidean; a sum of components living in
// distinct blocks is read as the norm of the direct-sum vector.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace bhlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// A point of R^n split into stable / central / unstable blocks.
struct AmbientPoint {
    Vec xs;       ///< stable block, length s >= 1
    double xc{};  ///< central coordinate
    Vec xu;       ///< unstable block, length u >= 1

    AmbientPoint() = default;
    AmbientPoint(Vec s_, double c_, Vec u_)
        : xs(std::move(s_)), xc(c_), xu(std::move(u_)) {}

    int s() const { return static_cast<int>(xs.size()); }
    int u() const { return static_cast<int>(xu.size()); }
    int dim() const { return s() + 1 + u(); }

    Vec flat() const {
        Vec v(dim());
        v.head(s()) = xs;
        v(s()) = xc;
        v.tail(u()) = xu;
        return v;
    }

    static AmbientPoint from_flat(const Vec& v, int s, int u) {
        if (v.size() != s + 1 + u)
            throw std::invalid_argument("AmbientPoint::from_flat: dimension mismatch");
        return AmbientPoint{v.head(s), v(s), v.tail(u)};
    }
};

/// The cube [-1,1]^s x [-delta,delta] x [-1,1]^u.
struct ReferenceCube {
    double delta{};

    explicit ReferenceCube(double d) : delta(d) {
        if (!(d > 0.0)) throw std::invalid_argument("ReferenceCube: delta must be positive");
    }

    bool contains(const AmbientPoint& p, double tol = 0.0) const {
        return p.xs.cwiseAbs().maxCoeff() <= 1.0 + tol &&
               std::abs(p.xc) <= delta + tol &&
               p.xu.cwiseAbs().maxCoeff() <= 1.0 + tol;
    }
};

/// Cone aperture pair 0 < alpha' < alpha < 1 (the image cones are
/// strictly thinner than the source cones).
struct ConeParams {
    double alpha{};
    double alpha_prime{};

    ConeParams(double a, double ap) : alpha(a), alpha_prime(ap) {
        if (!(0.0 < ap && ap < a && a < 1.0))
            throw std::invalid_argument("ConeParams: need 0 < alpha' < alpha < 1");
    }
};

enum class ConeKind { S, U, UU };

/// Signed slack of the cone inequality; >= 0 exactly when the vector
/// lies in the cone.
///   S : |(vc,vu)| <= alpha |vs|
///   U : |vs|      <= alpha |(vc,vu)|
///   UU: |(vs,vc)| <= alpha |vu|
inline double cone_margin(const Vec& v, int s, int u, ConeKind kind, double alpha) {
    if (v.size() != s + 1 + u)
        throw std::invalid_argument("cone_margin: vector dimension mismatch");
    const double ns = v.head(s).norm();
    const double nc = std::abs(v(s));
    const double nu = v.tail(u).norm();
    const double ncu = std::hypot(nc, nu);
    const double nsc = std::hypot(ns, nc);
    switch (kind) {
        case ConeKind::S: return alpha * ns - ncu;
        case ConeKind::U: return alpha * ncu - ns;
        case ConeKind::UU: return alpha * nu - nsc;
    }
    return 0.0;  // unreachable
}

inline bool in_cone(const Vec& v, int s, int u, ConeKind kind, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("in_cone: alpha must lie in (0,1)");
    return cone_margin(v, s, u, kind, alpha) >= 0.0;
}

/// Which parts of the cube boundary a point touches.  Edge and corner
/// points report every face they lie on; interior() means none.
struct BoundaryParts {
    bool d_s{false};   ///< some |xs_i| = 1
    bool d_c{false};   ///< |xc| = delta
    bool d_uu{false};  ///< some |xu_j| = 1

    bool interior() const { return !d_s && !d_c && !d_uu; }
    bool d_u() const { return d_c || d_uu; }  // del^u = del^c union del^uu
};

inline BoundaryParts boundary_part(const AmbientPoint& p, const ReferenceCube& c) {
    if (!c.contains(p))
        throw std::domain_error("boundary_part: point lies strictly outside the cube");
    BoundaryParts b;
    for (int i = 0; i < p.s(); ++i)
        if (std::abs(p.xs(i)) == 1.0) b.d_s = true;
    if (std::abs(p.xc) == c.delta) b.d_c = true;
    for (int j = 0; j < p.u(); ++j)
        if (std::abs(p.xu(j)) == 1.0) b.d_uu = true;
    return b;
}

/// Euclidean diameter of the unstable cube [-1,1]^u.
inline double unstable_diameter(int u) { return 2.0 * std::sqrt(static_cast<double>(u)); }

}  // namespace bhlab

#endif  // BHLAB_GEOMETRY_HPP
