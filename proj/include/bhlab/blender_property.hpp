#ifndef BHLAB_BLENDER_PROPERTY_HPP
#define BHLAB_BLENDER_PROPERTY_HPP

// The defining property: every uu-disk in between the reference stable
// manifolds meets the local stable set.  The witness is the disk point
// whose central itinerary and unstable coding agree; the coupling is
// resolved by a self-consistency loop, and the result is certified by
// replaying the forward orbit with the unstable coordinate re-anchored
// from the shifted coding.

#include "disks.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bhlab {

struct IntersectionWitness {
    AmbientPoint point;
    std::vector<Branch> word;
    double forward_orbit_max_excursion{};  ///< max distance outside the closed cube
    double per_step_residual_max{};        ///< one-step replay consistency
    double self_consistency_gap{};         ///< |xu| change at loop exit
    int rounds{};
};

namespace property_detail {

/// Loop-internal itinerary: tolerates value drift up to the disk's
/// slope reach (the certificate below re-validates independently).
inline Itinerary soft_itinerary(const CentralIFS& ifs, double x, int k, BranchPolicy policy,
                                double slack) {
    const double qc = ifs.q_c();
    if (x < -slack || x > qc + slack)
        throw std::domain_error("intersect_disk: central value left the superposition interval");
    return itinerary(ifs, std::clamp(x, 0.0, qc), k, policy);
}

}  // namespace property_detail

/// Locates a point of the disk whose forward orbit stays in the
/// reference cube for n_steps steps.  Requires the disk to classify
/// between (or meeting a reference manifold) at admissible slope.
inline IntersectionWitness intersect_disk(const UUDisk& d, const BlenderModel& m, int n_steps = 200,
                                          BranchPolicy policy = BranchPolicy::PreferA,
                                          double tol = 1e-10) {
    Position pos = classify_position(d, m, tol);
    if (pos.cls == PositionClass::LeftOfP || pos.cls == PositionClass::RightOfQ)
        throw std::invalid_argument("intersect_disk: disk is not in the superposition region");

    const CentralIFS ifs = m.central();
    const int u = m.u();
    const double slack = d.lip() * std::sqrt(static_cast<double>(u)) + 1e-9;
    const int coding_letters = std::min(n_steps, 60);

    IntersectionWitness w;
    Vec xu = Vec::Zero(u);
    double gap = std::numeric_limits<double>::infinity();
    int round = 0;
    for (; round < 64; ++round) {
        const double c0 = d.central_at(xu);
        Itinerary loop_it = property_detail::soft_itinerary(ifs, c0, coding_letters, policy, slack);
        Vec xu_next = cantor_point(m, loop_it.word);
        gap = (xu_next - xu).norm();
        xu = xu_next;
        if (gap < 1e-13) break;
    }
    if (gap >= 1e-13)
        throw std::runtime_error(
            "intersect_disk: self-consistency loop did not converge (unexpected for an "
            "admissible disk; possible bug surface)");
    w.rounds = round + 1;
    w.self_consistency_gap = gap;
    w.point = d.point_at(xu);

    // certificate: replay the itinerary of the witness value; the
    // central orbit is the clamped itinerary orbit, the stable replay
    // contracts, and the unstable coordinate is re-anchored from the
    // shifted coding
    Itinerary it = property_detail::soft_itinerary(ifs, w.point.xc, n_steps, policy, slack);
    w.word = it.word;
    Vec xs = w.point.xs;
    Vec xu_k = xu;
    double excursion = 0.0, residual = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        AmbientPoint x_k{xs, it.orbit[k], xu_k};
        // distance outside the closed cube
        double out = 0.0;
        out = std::max(out, xs.cwiseAbs().maxCoeff() - 1.0);
        out = std::max(out, std::abs(it.orbit[k]) - m.delta);
        out = std::max(out, xu_k.cwiseAbs().maxCoeff() - 1.0);
        excursion = std::max(excursion, std::max(0.0, out));

        const Branch b = it.word[k];
        AmbientPoint img = apply_branch(m, b, x_k);
        std::vector<Branch> tail(it.word.begin() + k + 1,
                                 it.word.begin() + std::min(n_steps, k + 1 + coding_letters));
        Vec xu_next = cantor_point(m, tail);
        residual = std::max(residual, (img.xu - xu_next).norm());
        residual = std::max(residual, std::abs(img.xc - it.orbit[k + 1]));
        xs = img.xs;
        xu_k = xu_next;
    }
    double out_last = 0.0;
    out_last = std::max(out_last, xs.cwiseAbs().maxCoeff() - 1.0);
    out_last = std::max(out_last, std::abs(it.orbit[n_steps]) - m.delta);
    out_last = std::max(out_last, xu_k.cwiseAbs().maxCoeff() - 1.0);
    excursion = std::max(excursion, std::max(0.0, out_last));
    w.forward_orbit_max_excursion = excursion;
    w.per_step_residual_max = residual;
    return w;
}

}  // namespace bhlab

#endif  // BHLAB_BLENDER_PROPERTY_HPP
