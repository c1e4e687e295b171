#ifndef BHLAB_JSON_IO_HPP
#define BHLAB_JSON_IO_HPP

// JSON views of the result types.  Keys are emitted sorted (nlohmann's
// default object ordering) and every document carries schema_version.

#include "axioms.hpp"
#include "blender_property.hpp"
#include "folding.hpp"
#include "perturbation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bhlab {

inline constexpr const char* kSchemaVersion = "1";

using json = nlohmann::json;

inline json to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const AmbientPoint& p) {
    return json{{"xs", to_json(p.xs)}, {"xc", p.xc}, {"xu", to_json(p.xu)}};
}

inline json to_json(const ConditionReport& r) {
    return json{{"verdict", verdict_name(r.verdict)},
                {"margin", r.margin},
                {"method", r.method},
                {"note", r.note}};
}

inline json to_json(const MarkovBox& b) {
    return json{{"stable_min", to_json(b.stable.lo)},
                {"stable_max", to_json(b.stable.hi)},
                {"central", json::array({b.c_lo, b.c_hi})},
                {"unstable_min", to_json(b.unstable.lo)},
                {"unstable_max", to_json(b.unstable.hi)}};
}

inline json to_json(const BlenderCertificate& c) {
    json conditions;
    const char* names[6] = {"BH1", "BH2", "BH3", "BH4", "BH5", "BH6"};
    for (int i = 1; i <= 6; ++i) conditions[names[i - 1]] = to_json(c.condition(i));
    return json{{"schema_version", kSchemaVersion},
                {"overall", verdict_name(c.overall())},
                {"conditions", conditions},
                {"alpha", c.cones.alpha},
                {"alpha_prime", c.cones.alpha_prime},
                {"alpha_admissible", c.alpha_admissible},
                {"min_margin", c.min_margin()},
                {"markov", json{{"A", to_json(c.markov_a)}, {"B", to_json(c.markov_b)}}},
                {"splitting_rates",
                 json{{"stable_contraction", c.rates.stable_contraction},
                      {"central_min", c.rates.central_min},
                      {"central_max", c.rates.central_max},
                      {"unstable_expansion", c.rates.unstable_expansion},
                      {"dominated", c.rates.dominated}}}};
}

inline json to_json(const TangencyResult& t) {
    json intervals = json::array();
    for (const auto& [lo, hi] : t.parameter_intervals) intervals.push_back(json::array({lo, hi}));
    return json{{"schema_version", kSchemaVersion},
                {"converged", t.converged},
                {"t_star", t.t_star},
                {"interval_width", t.interval_width},
                {"itinerary", word_string(t.word)},
                {"point", to_json(t.point)},
                {"direction", to_json(t.direction)},
                {"residual_angle", t.residual_angle},
                {"direction_cone_margin", t.direction_cone_margin},
                {"forward_cone_margin_min", t.forward_cone_margin_min},
                {"orbit_residual_max", t.orbit_residual_max},
                {"rebrackets", t.rebrackets},
                {"parameter_intervals", intervals}};
}

inline json to_json(const IntersectionWitness& w) {
    return json{{"schema_version", kSchemaVersion},
                {"point", to_json(w.point)},
                {"itinerary", word_string(w.word)},
                {"forward_orbit_max_excursion", w.forward_orbit_max_excursion},
                {"per_step_residual_max", w.per_step_residual_max},
                {"self_consistency_gap", w.self_consistency_gap},
                {"rounds", w.rounds}};
}

inline json to_json(const RobustnessCase& c) {
    return json{{"label", c.label},
                {"c1_bound", c.c1_bound},
                {"newton_ok", c.newton_ok},
                {"bump_boundary_warning", c.bump_boundary_warning},
                {"certificate", verdict_name(c.certificate)},
                {"min_margin", c.min_margin},
                {"tangency_converged", c.tangency_converged},
                {"residual_angle", c.residual_angle},
                {"pass", c.pass},
                {"note", c.note}};
}

inline json to_json(const RobustnessReport& r) {
    json cases = json::array();
    for (const auto& c : r.cases) cases.push_back(to_json(c));
    return json{{"schema_version", kSchemaVersion},
                {"base_min_margin", r.base_min_margin},
                {"perturbation_budget", r.perturbation_budget},
                {"max_safe_c1", r.max_safe_c1},
                {"all_in_budget_passed", r.all_in_budget_passed()},
                {"cases", cases}};
}

inline json to_json(const UUDisk& d) {
    if (d.is_affine()) {
        const auto& g = d.affine();
        return json{{"type", "affine"},
                    {"xs0", to_json(g.xs0)},
                    {"xc0", g.xc0},
                    {"slope_s", to_json(g.Gs)},
                    {"slope_c", to_json(Vec(g.gc.transpose()))},
                    {"lip", d.lip()}};
    }
    const auto& g = d.sampled();
    return json{{"type", "sampled"},
                {"n_per_axis", g.n_per_axis},
                {"u", g.u},
                {"values", to_json(g.values)},
                {"lip", d.lip()}};
}

}  // namespace bhlab

#endif  // BHLAB_JSON_IO_HPP
