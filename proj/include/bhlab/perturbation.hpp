#ifndef BHLAB_PERTURBATION_HPP
#define BHLAB_PERTURBATION_HPP

// C1-small perturbations of the model and the robustness suite:
// parameter jitters, compactly supported bumps, and composites, each
// with a certified upper bound on the C1 distance to the base map.
// The suite re-certifies the perturbed map on the sampled path,
// re-locates the tangency on a fold regenerated relative to the
// continued saddles, and reports the largest bound that survived.

#include "folding.hpp"

#include <atomic>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace bhlab {

struct Perturbation {
    double dlambda{0.0};
    double dmu{0.0};
    std::vector<BumpSpec> bumps;
    std::string label;

    static Perturbation param_jitter(double dl, double dm) {
        Perturbation p;
        p.dlambda = dl;
        p.dmu = dm;
        std::ostringstream os;
        os << "jitter(dlambda=" << dl << ", dmu=" << dm << ")";
        p.label = os.str();
        return p;
    }

    static Perturbation bump(const AmbientPoint& center, double radius, Vec amplitude) {
        Perturbation p;
        p.bumps.push_back(BumpSpec{center, radius, std::move(amplitude)});
        std::ostringstream os;
        os << "bump(radius=" << radius << ", amp=" << p.bumps.back().amplitude.norm() << ")";
        p.label = os.str();
        return p;
    }

    static Perturbation composite(const std::vector<Perturbation>& parts) {
        Perturbation p;
        p.label = "composite(";
        for (size_t i = 0; i < parts.size(); ++i) {
            p.dlambda += parts[i].dlambda;
            p.dmu += parts[i].dmu;
            for (const auto& b : parts[i].bumps) p.bumps.push_back(b);
            p.label += (i ? ", " : "") + parts[i].label;
        }
        p.label += ")";
        return p;
    }

    /// Certified C1 distance to the base model over the cube: the
    /// parameter change moves values by |dlambda| delta + |dmu| and the
    /// central derivative by |dlambda|; bumps add their own bounds.
    double c1_bound(const BlenderModel& base) const {
        double c = std::max(std::abs(dlambda) * base.delta + std::abs(dmu), std::abs(dlambda));
        for (const auto& b : bumps) c += b.c1_bound();
        return c;
    }
};

/// Map object for the perturbed family (evaluation + Jacobians).
inline MapSystem perturbed_map(const BlenderModel& m, const Perturbation& p) {
    BlenderModel adj = m;
    adj.lambda += p.dlambda;
    adj.mu += p.dmu;
    return MapSystem(adj, p.bumps);
}

// ---------------------------------------------------------------------------
// Robustness suite

struct FoldSpec {
    Saddle saddle{Saddle::P};
    double apex_fraction{0.5};  ///< apex as a fraction of the central gap
    double lip{0.0};
    int t_grid{257};
};

struct RobustnessCase {
    std::string label;
    double c1_bound{};
    bool newton_ok{false};
    bool bump_boundary_warning{false};
    Verdict certificate{Verdict::Inconclusive};
    double min_margin{};
    bool tangency_converged{false};
    double residual_angle{1.0};
    bool pass{false};
    std::string note;
};

struct RobustnessReport {
    double base_min_margin{};
    double perturbation_budget{};  ///< the c1 level the suite was asked to respect
    std::vector<RobustnessCase> cases;
    double max_safe_c1{0.0};

    bool all_in_budget_passed() const {
        for (const auto& c : cases)
            if (c.c1_bound <= perturbation_budget && !c.pass) return false;
        return true;
    }
};

struct RobustnessOptions {
    int tangency_iters = 25;
    double tangency_tol = 1e-12;       ///< interval-width stop (rarely reached)
    double residual_threshold = 1e-6;  ///< pass bar for the re-located tangency
    CheckOptions check;
    int jobs = 1;
};

/// Re-certify and re-locate under one perturbation.  The fold is
/// regenerated relative to the continued saddles rather than reusing
/// the base fold, so any nearby fold of the perturbed map counts.
inline RobustnessCase run_robustness_case(const BlenderModel& base, const Perturbation& p,
                                          const FoldSpec& fold_spec, const ConeParams& cones,
                                          const RobustnessOptions& opts) {
    RobustnessCase rc;
    rc.label = p.label;
    rc.c1_bound = p.c1_bound(base);
    MapSystem sys = perturbed_map(base, p);
    sys.treat_as_sampled = true;  // spec'd: robustness re-runs use the sampled path
    rc.bump_boundary_warning = sys.bump_crosses_branch_boundary();

    SystemFrame sf;
    try {
        sf = SystemFrame::build(sys, opts.check);
        rc.newton_ok = true;
    } catch (const std::exception& e) {
        rc.note = std::string("saddle continuation failed: ") + e.what();
        return rc;  // out of the continuation neighborhood
    }

    BlenderCertificate cert = certify_blender(sys, cones, opts.check);
    rc.certificate = cert.overall();
    rc.min_margin = cert.min_margin();
    if (rc.certificate != Verdict::Certified) {
        rc.note = "re-certification did not pass";
        return rc;
    }

    try {
        FoldingManifold fold =
            make_quadratic_fold(sys, sf, fold_spec.saddle, fold_spec.apex_fraction * sf.central_gap(),
                                fold_spec.lip, fold_spec.t_grid);
        TangencyOptions topt;
        topt.alpha = cones.alpha;
        topt.max_pullback = opts.tangency_iters;
        TangencyResult tr =
            locate_tangency(fold, sys, sf, opts.tangency_iters, opts.tangency_tol, topt);
        rc.residual_angle = tr.residual_angle;
        rc.tangency_converged = tr.residual_angle < opts.residual_threshold;
        rc.pass = rc.tangency_converged;
        if (!rc.pass) rc.note = "tangency residual above threshold";
    } catch (const std::exception& e) {
        rc.note = std::string("tangency relocation failed: ") + e.what();
    }
    return rc;
}

inline RobustnessReport robustness_suite(const BlenderModel& base,
                                         const std::vector<Perturbation>& perturbations,
                                         const FoldSpec& fold_spec, const ConeParams& cones,
                                         const RobustnessOptions& opts = {}) {
    RobustnessReport rep;
    {
        MapSystem base_sys(base);
        BlenderCertificate cert = certify_blender(base_sys, cones, opts.check);
        if (cert.overall() != Verdict::Certified)
            throw std::runtime_error("robustness_suite: base model is not certified");
        rep.base_min_margin = cert.min_margin();
    }
    rep.perturbation_budget = 0.1 * rep.base_min_margin;
    rep.cases.resize(perturbations.size());

    const int jobs = std::max(1, opts.jobs);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= perturbations.size()) break;
            rep.cases[i] = run_robustness_case(base, perturbations[i], fold_spec, cones, opts);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& c : rep.cases)
        if (c.pass) rep.max_safe_c1 = std::max(rep.max_safe_c1, c.c1_bound);
    return rep;
}

/// Deterministic family of random perturbations with c1_bound at or
/// below the budget: a mix of parameter jitters, bumps, and composites.
inline std::vector<Perturbation> random_perturbations(const BlenderModel& base, int count,
                                                      double c1_budget, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.2, 1.0);
    std::vector<Perturbation> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int kind = i % 3;
        const double scale = c1_budget * pos(rng);
        if (kind == 0) {
            // split the budget between dlambda and dmu
            const double dl = 0.5 * scale * unit(rng);
            const double dm = 0.5 * scale * unit(rng) * base.delta;
            out.push_back(Perturbation::param_jitter(dl, dm));
        } else {
            const double radius = 0.15 + 0.1 * pos(rng);
            Vec amp(base.dim());
            for (int k = 0; k < amp.size(); ++k) amp(k) = unit(rng);
            amp.normalize();
            amp *= scale / std::max(1.0, BumpSpec::profile_slope_max / radius);
            AmbientPoint center{Vec::Zero(base.s()), 0.5 * base.delta * unit(rng),
                                Vec::Zero(base.u())};
            for (int k = 0; k < base.s(); ++k) center.xs(k) = 0.5 * unit(rng);
            for (int k = 0; k < base.u(); ++k)
                center.xu(k) = base.F.branch_a.dom.center()(k) +
                               0.2 * unit(rng) * (base.F.branch_a.dom.hi(k) -
                                                  base.F.branch_a.dom.lo(k));
            Perturbation b = Perturbation::bump(center, radius, amp);
            if (kind == 2) {
                const double dl = 0.2 * scale * unit(rng);
                b = Perturbation::composite({b, Perturbation::param_jitter(dl, 0.0)});
            }
            // rescale to stay within budget
            const double c1 = b.c1_bound(base);
            if (c1 > c1_budget) {
                for (auto& bb : b.bumps) bb.amplitude *= 0.9 * c1_budget / c1;
                b.dlambda *= 0.9 * c1_budget / c1;
                b.dmu *= 0.9 * c1_budget / c1;
            }
            out.push_back(std::move(b));
        }
    }
    return out;
}

}  // namespace bhlab

#endif  // BHLAB_PERTURBATION_HPP
