#ifndef BHLAB_MODEL_HPP
#define BHLAB_MODEL_HPP

// The prototypical piecewise-affine family
//   f(x^s, x^c, x^u) = (S_i x^s + bs_i,  lambda x^c - mu_i,  U_i x^u + bu_i)
// with two branches A (mu_A = 0) and B (mu_B = mu), each an affine
// bijection from its horizontal slab onto a vertical sub-cube.  The
// map is defined only over the two branch domains; everything else is
// reported as outside-domain rather than extrapolated.

#include "central_ifs.hpp"
#include "geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bhlab {

/// Axis-aligned box.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.size() != hi.size()) throw std::invalid_argument("Box: bound size mismatch");
    }

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x, double tol = 0.0) const {
        return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
    }
    Vec center() const { return 0.5 * (lo + hi); }
    bool disjoint(const Box& o) const {
        for (int i = 0; i < dim(); ++i)
            if (lo(i) > o.hi(i) || hi(i) < o.lo(i)) return true;
        return false;
    }
    /// Largest separating gap over axes; > 0 iff the boxes are disjoint.
    double gap(const Box& o) const {
        double g = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i)
            g = std::max(g, std::max(o.lo(i) - hi(i), lo(i) - o.hi(i)));
        return g;
    }
};

inline double op_norm(const Mat& m) {
    return m.jacobiSvd().singularValues()(0);
}
inline double sigma_min(const Mat& m) {
    auto sv = m.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
}

/// One affine branch of the base horseshoe, extended by the central
/// multiplier: x |-> (S xs + bs, lambda xc - mu_c, U xu + bu).
struct BranchMap {
    Mat S;   ///< s x s stable contraction
    Vec bs;  ///< stable translation
    Mat U;   ///< u x u unstable expansion
    Vec bu;  ///< unstable translation
    Box dom; ///< branch domain in the unstable cube; U maps it onto [-1,1]^u
};

struct AffineHorseshoe {
    int s{1}, u{1};
    BranchMap branch_a, branch_b;

    const BranchMap& branch(Branch b) const { return b == Branch::A ? branch_a : branch_b; }

    /// Stable coordinate of the second fixed point q = (a_s, a_u).
    Vec a_s() const {
        return (Mat::Identity(s, s) - branch_b.S).partialPivLu().solve(branch_b.bs);
    }
    Vec a_u() const {
        return (Mat::Identity(u, u) - branch_b.U).partialPivLu().solve(branch_b.bu);
    }
};

struct BlenderModel {
    AffineHorseshoe F;
    double lambda{};
    double mu{};
    double delta{};

    int s() const { return F.s; }
    int u() const { return F.u; }
    int dim() const { return F.s + 1 + F.u; }

    ReferenceCube cube() const { return ReferenceCube(delta); }
    CentralIFS central() const { return CentralIFS(lambda, mu); }
    double q_central() const { return mu / (lambda - 1.0); }

    double central_shift(Branch b) const { return b == Branch::A ? 0.0 : mu; }

    /// Invariant audit; an empty list means the model satisfies every
    /// structural hypothesis of the family.
    std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Branch dynamics

inline std::optional<Branch> branch_of(const BlenderModel& m, const Vec& xu) {
    if (m.F.branch_a.dom.contains(xu)) return Branch::A;
    if (m.F.branch_b.dom.contains(xu)) return Branch::B;
    return std::nullopt;
}

inline AmbientPoint apply_branch(const BlenderModel& m, Branch b, const AmbientPoint& p) {
    const BranchMap& br = m.F.branch(b);
    return AmbientPoint{br.S * p.xs + br.bs,
                        m.lambda * p.xc - m.central_shift(b),
                        br.U * p.xu + br.bu};
}

inline AmbientPoint inverse_branch(const BlenderModel& m, Branch b, const AmbientPoint& q) {
    const BranchMap& br = m.F.branch(b);
    Vec xu = br.U.partialPivLu().solve(q.xu - br.bu);
    if (!br.dom.contains(xu, 1e-9))
        throw std::domain_error("inverse_branch: point not in the branch image");
    return AmbientPoint{br.S.partialPivLu().solve(q.xs - br.bs),
                        (q.xc + m.central_shift(b)) / m.lambda,
                        std::move(xu)};
}

struct ApplyResult {
    AmbientPoint image;
    Branch branch;
};

/// Applies the map where it is defined; nullopt when xu lies in
/// neither branch domain.
inline std::optional<ApplyResult> apply(const BlenderModel& m, const AmbientPoint& p) {
    auto b = branch_of(m, p.xu);
    if (!b) return std::nullopt;
    return ApplyResult{apply_branch(m, *b, p), *b};
}

/// Block-diagonal Jacobian diag(S_i, lambda, U_i); constant per branch.
inline Mat jacobian_branch(const BlenderModel& m, Branch b) {
    const BranchMap& br = m.F.branch(b);
    const int s = m.s(), u = m.u(), n = m.dim();
    Mat j = Mat::Zero(n, n);
    j.topLeftCorner(s, s) = br.S;
    j(s, s) = m.lambda;
    j.bottomRightCorner(u, u) = br.U;
    return j;
}

inline Mat jacobian(const BlenderModel& m, const AmbientPoint& p) {
    auto b = branch_of(m, p.xu);
    if (!b) throw std::domain_error("jacobian: point outside both branch domains");
    return jacobian_branch(m, *b);
}

// ---------------------------------------------------------------------------
// Fixed points and local invariant manifolds

inline AmbientPoint fixed_point_p(const BlenderModel& m) {
    return AmbientPoint{Vec::Zero(m.s()), 0.0, Vec::Zero(m.u())};
}
inline AmbientPoint fixed_point_q(const BlenderModel& m) {
    return AmbientPoint{m.F.a_s(), m.q_central(), m.F.a_u()};
}

/// Local invariant manifolds of P and Q as parametrized flats.
/// Ws_loc(X)  = [-1,1]^s x {xc(X)} x {xu(X)}   (an s-disk)
/// Wuu_loc(X) = {xs(X)} x {xc(X)} x [-1,1]^u   (a uu-disk)
struct LocalManifolds {
    AmbientPoint p, q;
    // a flat disk is pinned by the coordinates it does not span
    double ws_p_central{}, ws_q_central{};
    Vec ws_p_unstable, ws_q_unstable;
    Vec wuu_p_stable, wuu_q_stable;
    double wuu_p_central{}, wuu_q_central{};
};

inline LocalManifolds local_manifolds(const BlenderModel& m) {
    LocalManifolds lm;
    lm.p = fixed_point_p(m);
    lm.q = fixed_point_q(m);
    lm.ws_p_central = lm.p.xc;
    lm.ws_q_central = lm.q.xc;
    lm.ws_p_unstable = lm.p.xu;
    lm.ws_q_unstable = lm.q.xu;
    lm.wuu_p_stable = lm.p.xs;
    lm.wuu_q_stable = lm.q.xs;
    lm.wuu_p_central = lm.p.xc;
    lm.wuu_q_central = lm.q.xc;
    return lm;
}

/// Largest disk slope for which position classification by central
/// values is valid: disks through Ws_loc(P) and Ws_loc(Q) must stay
/// mutually disjoint and clear of the central faces.
inline double admissible_lip_bound(const BlenderModel& m) {
    const double d = unstable_diameter(m.u());
    const double qc = m.q_central();
    const double disjoint = qc / (2.0 * d);
    const double face = (m.delta - std::max(0.0, qc)) / d;
    return std::min(disjoint, face);
}

// ---------------------------------------------------------------------------
// Itinerary coding of the unstable Cantor coordinate

/// Point of the base Cantor set whose forward unstable itinerary starts
/// with the given word; obtained by pulling the word back through the
/// contracting inverse branches.
inline Vec cantor_point(const BlenderModel& m, const std::vector<Branch>& word) {
    Vec x = Vec::Zero(m.u());
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const BranchMap& br = m.F.branch(*it);
        x = br.U.partialPivLu().solve(x - br.bu);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Validation and canonical instance

inline std::vector<std::string> BlenderModel::validate() const {
    std::vector<std::string> bad;
    auto check = [&bad](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    check(lambda > 1.0 && lambda < 2.0, "lambda must lie in (1,2)");
    check(mu > 0.0, "mu must be positive");
    check(delta > 0.0, "delta must be positive");
    if (lambda > 1.0) check(mu < (lambda - 1.0) * delta, "mu must be below (lambda-1)*delta");
    for (Branch b : {Branch::A, Branch::B}) {
        const BranchMap& br = F.branch(b);
        const std::string tag = b == Branch::A ? "branch A" : "branch B";
        check(op_norm(br.S) < 0.5, tag + ": ||S|| must be < 1/2");
        check(op_norm(br.U.inverse()) < 0.5, tag + ": ||U^-1|| must be < 1/2");
        // U maps its domain onto the full unstable cube
        Vec lo_img = br.U * br.dom.lo + br.bu;
        Vec hi_img = br.U * br.dom.hi + br.bu;
        Vec lo = lo_img.cwiseMin(hi_img), hi = lo_img.cwiseMax(hi_img);
        check((lo.array() + 1.0).abs().maxCoeff() < 1e-12 &&
                  (hi.array() - 1.0).abs().maxCoeff() < 1e-12,
              tag + ": U must map its domain onto [-1,1]^u");
    }
    check(F.branch_a.dom.disjoint(F.branch_b.dom), "branch domains must be disjoint");
    check(F.branch_a.dom.contains(Vec::Zero(F.u)), "p must lie in the domain of branch A");
    // p = 0 fixed by branch A
    check(F.branch_a.bs.norm() < 1e-14 && F.branch_a.bu.norm() < 1e-14,
          "branch A must fix the origin");
    check(F.branch_b.dom.contains(F.a_u(), 1e-12), "a_u must lie in the domain of branch B");
    return bad;
}

/// Canonical instance (s = u = 1): branch A is y/3 x 3x on
/// [-1/3,1/3], branch B is y/4 + 0.675 x 4x - 2.8 on [0.45,0.95],
/// lambda = 1.2, mu = 0.02, delta = 0.125.  Expansion and contraction
/// rates differ across branches so symmetry cannot mask bugs, and all
/// six certificate margins are strictly positive.
inline BlenderModel default_instance() {
    BlenderModel m;
    m.F.s = 1;
    m.F.u = 1;
    m.lambda = 1.2;
    m.mu = 0.02;
    m.delta = 0.125;

    auto mat1 = [](double v) { Mat m1(1, 1); m1(0, 0) = v; return m1; };
    auto vec1 = [](double v) { Vec v1(1); v1(0) = v; return v1; };

    m.F.branch_a.S = mat1(1.0 / 3.0);
    m.F.branch_a.bs = vec1(0.0);
    m.F.branch_a.U = mat1(3.0);
    m.F.branch_a.bu = vec1(0.0);
    m.F.branch_a.dom = Box(vec1(-1.0 / 3.0), vec1(1.0 / 3.0));

    m.F.branch_b.S = mat1(0.25);
    m.F.branch_b.bs = vec1(0.675);
    m.F.branch_b.U = mat1(4.0);
    m.F.branch_b.bu = vec1(-2.8);
    m.F.branch_b.dom = Box(vec1(0.45), vec1(0.95));
    return m;
}

// ---------------------------------------------------------------------------
// Flat key=value config round-trip

namespace detail {
inline void put_matrix(std::map<std::string, std::string>& kv, const std::string& key, const Mat& m) {
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) os << (i + j ? " " : "") << m(i, j);
    kv[key] = os.str();
}
inline std::vector<double> parse_numbers(const std::string& text) {
    std::istringstream is(text);
    std::vector<double> v;
    double x;
    while (is >> x) v.push_back(x);
    return v;
}
inline Mat get_matrix(const std::map<std::string, std::string>& kv, const std::string& key,
                      int rows, int cols) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("model config: missing key " + key);
    auto nums = parse_numbers(it->second);
    if (static_cast<int>(nums.size()) != rows * cols)
        throw std::invalid_argument("model config: bad element count for " + key);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = nums[i * cols + j];
    return m;
}
inline double get_scalar(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("model config: missing key " + key);
    return std::stod(it->second);
}
}  // namespace detail

/// Serializes to flat key = value lines (matrices row-major, boxes as
/// min/max per axis).
inline std::string to_config_text(const BlenderModel& m) {
    std::map<std::string, std::string> kv;
    kv["s"] = std::to_string(m.s());
    kv["u"] = std::to_string(m.u());
    detail::put_matrix(kv, "lambda", Mat::Constant(1, 1, m.lambda));
    detail::put_matrix(kv, "mu", Mat::Constant(1, 1, m.mu));
    detail::put_matrix(kv, "delta", Mat::Constant(1, 1, m.delta));
    const char* names[2] = {"a", "b"};
    for (int k = 0; k < 2; ++k) {
        const BranchMap& br = m.F.branch(k == 0 ? Branch::A : Branch::B);
        const std::string p = std::string("branch_") + names[k] + "_";
        detail::put_matrix(kv, p + "S", br.S);
        detail::put_matrix(kv, p + "bs", br.bs);
        detail::put_matrix(kv, p + "U", br.U);
        detail::put_matrix(kv, p + "bu", br.bu);
        detail::put_matrix(kv, p + "dom_min", br.dom.lo);
        detail::put_matrix(kv, p + "dom_max", br.dom.hi);
    }
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            auto last = s.find_last_not_of(ws);
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

inline BlenderModel from_config_text(const std::string& text) {
    auto kv = parse_key_values(text);
    BlenderModel m;
    m.F.s = static_cast<int>(detail::get_scalar(kv, "s"));
    m.F.u = static_cast<int>(detail::get_scalar(kv, "u"));
    if (m.F.s < 1 || m.F.u < 1)
        throw std::invalid_argument("model config: s and u must be >= 1");
    m.lambda = detail::get_scalar(kv, "lambda");
    m.mu = detail::get_scalar(kv, "mu");
    m.delta = detail::get_scalar(kv, "delta");
    const char* names[2] = {"a", "b"};
    for (int k = 0; k < 2; ++k) {
        BranchMap& br = k == 0 ? m.F.branch_a : m.F.branch_b;
        const std::string p = std::string("branch_") + names[k] + "_";
        br.S = detail::get_matrix(kv, p + "S", m.F.s, m.F.s);
        br.bs = detail::get_matrix(kv, p + "bs", m.F.s, 1);
        br.U = detail::get_matrix(kv, p + "U", m.F.u, m.F.u);
        br.bu = detail::get_matrix(kv, p + "bu", m.F.u, 1);
        br.dom = Box(detail::get_matrix(kv, p + "dom_min", m.F.u, 1),
                     detail::get_matrix(kv, p + "dom_max", m.F.u, 1));
    }
    return m;
}

}  // namespace bhlab

#endif  // BHLAB_MODEL_HPP
