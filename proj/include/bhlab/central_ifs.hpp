#ifndef BHLAB_CENTRAL_IFS_HPP
#define BHLAB_CENTRAL_IFS_HPP

// One-dimensional central reduction: the expanding pair
//   g_A(x) = lambda x,   g_B(x) = lambda x - mu,
// its superposition interval J = (0, mu/(lambda-1)), the branch
// admissibility intervals I1, I2, itineraries and the covering
// certificate.  Vertical disks move exactly by these maps, so this
// module carries the analytic core of the in-between position law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhlab {

enum class Branch : std::uint8_t { A, B };

inline char branch_char(Branch b) { return b == Branch::A ? 'A' : 'B'; }

inline std::string word_string(const std::vector<Branch>& w) {
    std::string s;
    s.reserve(w.size());
    for (Branch b : w) s.push_back(branch_char(b));
    return s;
}

enum class Region {
    OutsideLeft,
    BoundaryP,  // x = 0, fixed point of g_A
    I1Only,
    Overlap,    // closed overlap [mu/lambda, mu/(lambda(lambda-1))]
    I2Only,
    BoundaryQ,  // x = mu/(lambda-1), fixed point of g_B
    OutsideRight,
};

enum class BranchPolicy { PreferA, PreferB, Midpoint };

struct CentralIFS {
    double lambda{};
    double mu{};

    CentralIFS(double l, double m) : lambda(l), mu(m) {}

    bool params_admissible() const { return lambda > 1.0 && lambda < 2.0 && mu > 0.0; }

    // Thresholds are derived from q_c = mu/(lambda-1) so that the
    // endpoint identities lambda*sup(I1) = q_c and lambda*inf(I2) = mu
    // hold to a couple of ulp in floating point.
    double q_c() const { return mu / (lambda - 1.0); }      ///< sup(J), central value of Q
    double sup_i1() const { return q_c() / lambda; }        ///< mu/(lambda(lambda-1))
    double inf_i2() const { return mu / lambda; }
    double overlap_width() const { return sup_i1() - inf_i2(); }

    double apply(Branch b, double x) const {
        return b == Branch::A ? lambda * x : lambda * x - mu;
    }
    double invert(Branch b, double y) const {
        return b == Branch::A ? y / lambda : (y + mu) / lambda;
    }
};

inline Region classify(const CentralIFS& ifs, double x) {
    if (x < 0.0) return Region::OutsideLeft;
    if (x == 0.0) return Region::BoundaryP;
    const double qc = ifs.q_c();
    if (x > qc) return Region::OutsideRight;
    if (x == qc) return Region::BoundaryQ;
    if (x < ifs.inf_i2()) return Region::I1Only;
    if (x > ifs.sup_i1()) return Region::I2Only;
    return Region::Overlap;
}

namespace detail {
// Orbit values are allowed to stray from closure(J) by a few ulp of
// round-off before choose_branch refuses them.
inline double clamp_to_closure(const CentralIFS& ifs, double x) {
    const double qc = ifs.q_c();
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, qc);
    if (x < -slack || x > qc + slack)
        throw std::domain_error("choose_branch: x outside closure of the superposition interval");
    return std::clamp(x, 0.0, qc);
}
}  // namespace detail

inline Branch choose_branch(const CentralIFS& ifs, double x, BranchPolicy policy = BranchPolicy::PreferA) {
    x = detail::clamp_to_closure(ifs, x);
    switch (classify(ifs, x)) {
        case Region::BoundaryP:
        case Region::I1Only:
            return Branch::A;
        case Region::BoundaryQ:
        case Region::I2Only:
            return Branch::B;
        case Region::Overlap:
            switch (policy) {
                case BranchPolicy::PreferA: return Branch::A;
                case BranchPolicy::PreferB: return Branch::B;
                case BranchPolicy::Midpoint:
                    return x < 0.5 * (ifs.inf_i2() + ifs.sup_i1()) ? Branch::A : Branch::B;
            }
            return Branch::A;
        default:
            throw std::domain_error("choose_branch: x outside closure of the superposition interval");
    }
}

struct Itinerary {
    std::vector<Branch> word;   ///< length k
    std::vector<double> orbit;  ///< length k+1, orbit[0] = x
};

/// Forward itinerary of length k with every orbit value kept inside
/// closure(J) by the covering property.
inline Itinerary itinerary(const CentralIFS& ifs, double x, int k,
                           BranchPolicy policy = BranchPolicy::PreferA) {
    Itinerary it;
    it.word.reserve(k);
    it.orbit.reserve(k + 1);
    double v = detail::clamp_to_closure(ifs, x);
    it.orbit.push_back(v);
    for (int i = 0; i < k; ++i) {
        const Branch b = choose_branch(ifs, v, policy);
        v = detail::clamp_to_closure(ifs, ifs.apply(b, v));
        it.word.push_back(b);
        it.orbit.push_back(v);
    }
    return it;
}

struct CoveringReport {
    bool certified{false};
    std::string reason;
    double overlap_width{};         ///< sup(I1) - inf(I2)
    double residual_sup{};          ///< |lambda * sup(I1) - q_c|
    double residual_inf{};          ///< |lambda * inf(I2) - mu|
    double j_width{};               ///< q_c
};

/// Certifies g_A(cl I1) union g_B(cl I2) covers closure(J).  For the
/// exact maps the covering holds with equality at the endpoints; the
/// margin is the width of the branch overlap.
inline CoveringReport covering_check(const CentralIFS& ifs) {
    CoveringReport r;
    if (!(ifs.lambda > 1.0)) {
        r.reason = "lambda <= 1: central direction not expanding";
        return r;
    }
    if (!(ifs.lambda < 2.0)) {
        r.reason = "lambda >= 2: branch intervals I1, I2 no longer overlap";
        return r;
    }
    if (!(ifs.mu > 0.0)) {
        r.reason = "mu <= 0: superposition interval empty";
        return r;
    }
    r.j_width = ifs.q_c();
    r.overlap_width = ifs.overlap_width();
    r.residual_sup = std::abs(ifs.lambda * ifs.sup_i1() - ifs.q_c());
    r.residual_inf = std::abs(ifs.lambda * ifs.inf_i2() - ifs.mu);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ifs.q_c());
    if (r.overlap_width <= 0.0) {
        r.reason = "branch overlap degenerate";
        return r;
    }
    if (r.residual_sup > tol || r.residual_inf > tol) {
        r.reason = "endpoint identities violated beyond round-off";
        return r;
    }
    r.certified = true;
    return r;
}

}  // namespace bhlab

#endif  // BHLAB_CENTRAL_IFS_HPP
