#ifndef BHLAB_TEST_ORACLES_HPP
#define BHLAB_TEST_ORACLES_HPP

// Test-only oracles, independent of the library's folding machinery.
//
// For a flat quadratic fold with clearance profile c(t) = a (1-(2t-1)^2)
// over the left saddle, the central value of the t-disk evolves under
// the branch word by the scalar maps x -> lambda x and x -> lambda x - mu.
// Everything the nested-window construction does can therefore be
// recomputed with closed-form interval arithmetic on the profile:
//   * survival of a parameter under a word  <=>  the scalar orbit of
//     c(t) stays in [0, q_c] for every prefix;
//   * the fold-level branch decision takes A when the whole image fold
//     stays below q_c, i.e. lambda * apex_k < q_c, and B otherwise;
//   * the B-window is the superlevel set {c > theta} of the concave
//     profile, a single interval around the apex.

#include <bhlab/model.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

struct FoldWindowOracle {
    double lambda, mu, qc, apex;

    // deterministic fold-level word: A while the image fold stays below q_c
    std::vector<bhlab::Branch> deterministic_word(int n) const {
        std::vector<bhlab::Branch> w;
        double a = apex;
        for (int i = 0; i < n; ++i) {
            if (lambda * a < qc) {
                w.push_back(bhlab::Branch::A);
                a = lambda * a;
            } else {
                w.push_back(bhlab::Branch::B);
                a = lambda * a - mu;
            }
        }
        return w;
    }

    // c-interval of survivors of a forced word: all prefixes of the
    // scalar orbit stay inside [0, qc]
    std::optional<std::pair<double, double>> surviving_c_interval(
        const std::vector<bhlab::Branch>& word) const {
        double lo = 0.0, hi = qc;   // constraints pulled back to c(t)
        double scale = 1.0, shift = 0.0;  // orbit value = scale * c + shift
        for (bhlab::Branch b : word) {
            scale *= lambda;
            shift = lambda * shift - (b == bhlab::Branch::B ? mu : 0.0);
            lo = std::max(lo, (0.0 - shift) / scale);
            hi = std::min(hi, (qc - shift) / scale);
            if (lo > hi) return std::nullopt;
        }
        return std::make_pair(lo, hi);
    }

    // t-window of survivors: preimage of the c-interval under the
    // concave profile; single interval when the interval reaches apex
    std::optional<std::pair<double, double>> surviving_t_window(
        const std::vector<bhlab::Branch>& word) const {
        auto ci = surviving_c_interval(word);
        if (!ci) return std::nullopt;
        auto [lo, hi] = *ci;
        if (hi < apex) return std::nullopt;  // window no longer contains the apex
        if (lo <= 0.0) return std::make_pair(0.0, 1.0);
        const double s = std::sqrt(1.0 - lo / apex);
        return std::make_pair(0.5 - 0.5 * s, 0.5 + 0.5 * s);
    }

    // exhaustive enumeration: c-survivor intervals of every word of
    // length n (2^n of them); empty survivors dropped
    std::vector<std::pair<double, double>> all_surviving_c_intervals(int n) const {
        std::vector<std::pair<double, double>> out;
        const std::uint64_t total = 1ULL << n;
        for (std::uint64_t bits = 0; bits < total; ++bits) {
            double lo = 0.0, hi = qc, scale = 1.0, shift = 0.0;
            bool alive = true;
            for (int k = 0; k < n && alive; ++k) {
                const bool is_b = (bits >> k) & 1ULL;
                scale *= lambda;
                shift = lambda * shift - (is_b ? mu : 0.0);
                lo = std::max(lo, -shift / scale);
                hi = std::min(hi, (qc - shift) / scale);
                alive = lo <= hi;
            }
            if (alive) out.emplace_back(lo, hi);
        }
        return out;
    }
};

// Affine fixed point of the branch composition along a word, solved by
// one linear system; the independent route to the periodic points.
inline bhlab::AmbientPoint periodic_point(const bhlab::BlenderModel& m,
                                          const std::vector<bhlab::Branch>& word) {
    using namespace bhlab;
    const int n = m.dim();
    Mat comp = Mat::Identity(n, n);
    Vec off = Vec::Zero(n);
    for (Branch b : word) {
        const BranchMap& br = m.F.branch(b);
        Mat j = jacobian_branch(m, b);
        Vec t(n);
        t.head(m.s()) = br.bs;
        t(m.s()) = -m.central_shift(b);
        t.tail(m.u()) = br.bu;
        comp = j * comp;
        off = j * off + t;
    }
    Vec fix = (Mat::Identity(n, n) - comp).partialPivLu().solve(off);
    return AmbientPoint::from_flat(fix, m.s(), m.u());
}

}  // namespace oracle

#endif  // BHLAB_TEST_ORACLES_HPP
