#include "oracles.hpp"

#include <bhlab/folding.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace bhlab;

namespace {
struct Setup {
    MapSystem sys{default_instance()};
    SystemFrame sf = SystemFrame::build(sys);
};
}  // namespace

TEST_CASE("quadratic fold construction and invariants") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.05, 0.0);
    auto v = validate_fold(fold, st.sf);
    CHECK(v.valid);
    CHECK(v.endpoint_worst < 1e-12);
    // apex clearance at t = 1/2
    CHECK(disk_clearance(fold.disk_at(0.5), st.sf.frame.ws_p) ==
          Catch::Approx(0.05).epsilon(1e-12));
    // endpoints meet the stable manifold of P
    CHECK(classify_position(fold.disk_at(0.0), st.sf.frame).cls == PositionClass::MeetsP);
    CHECK(classify_position(fold.disk_at(0.37), st.sf.frame).cls == PositionClass::Between);

    // apex must lie strictly inside the superposition interval
    CHECK_THROWS_AS(make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.1, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.15, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.05, 0.05),
                    std::invalid_argument);
}

TEST_CASE("the fold carries a stable-cone tangent vector at its apex") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.05, 0.01);
    const double h = 1e-6;
    Vec xu = Vec::Zero(1);
    Vec dt = fold.disk_at(0.5 + h).point_at(xu).flat() - fold.disk_at(0.5 - h).point_at(xu).flat();
    REQUIRE(dt.norm() > 0.0);
    CHECK(in_cone(dt, 1, 1, ConeKind::S, 0.01));
}

TEST_CASE("image lemma, branch A case") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.05, 0.0);
    auto step = image_fold(fold, st.sys, st.sf);
    CHECK(step.branch_used == Branch::A);
    CHECK(step.t_lo == Catch::Approx(0.0).margin(1e-12));
    CHECK(step.t_hi == Catch::Approx(1.0).margin(1e-12));
    CHECK_FALSE(step.rebracketed);
    // the image fold's apex clearance is lambda * apex
    CHECK(disk_clearance(step.image.disk_at(0.5), st.sf.frame.ws_p) ==
          Catch::Approx(0.06).epsilon(1e-10));
    CHECK(validate_fold(step.image, st.sf).valid);
}

TEST_CASE("image lemma, branch B window case") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.09, 0.0);
    auto step = image_fold(fold, st.sys, st.sf);
    CHECK(step.branch_used == Branch::B);
    // window endpoints solve c(t) = mu / lambda:
    // (2t-1)^2 = 1 - (mu/lambda)/apex
    const double s = std::sqrt(1.0 - (0.02 / 1.2) / 0.09);
    CHECK(step.t_lo == Catch::Approx(0.5 - 0.5 * s).margin(1e-10));
    CHECK(step.t_hi == Catch::Approx(0.5 + 0.5 * s).margin(1e-10));
    // new apex = lambda * apex - mu
    CHECK(disk_clearance(step.image.disk_at(0.5), st.sf.frame.ws_p) ==
          Catch::Approx(1.2 * 0.09 - 0.02).epsilon(1e-9));
    CHECK(validate_fold(step.image, st.sf).valid);
}

TEST_CASE("sub-tolerance folds are rejected") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 1e-15, 0.0);
    CHECK_THROWS_AS(image_fold(fold, st.sys, st.sf), std::runtime_error);
}

TEST_CASE("fold relative to the right saddle mirrors the construction") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::Q, 0.05, 0.0);
    CHECK(classify_position(fold.disk_at(0.0), st.sf.frame).cls == PositionClass::MeetsQ);
    CHECK(classify_position(fold.disk_at(0.5), st.sf.frame).cls == PositionClass::Between);
    auto step = image_fold(fold, st.sys, st.sf);
    CHECK(step.branch_used == Branch::B);
    CHECK(validate_fold(step.image, st.sf).valid);
    // relocating a tangency through the mirrored machinery works too
    TangencyResult tr = locate_tangency(fold, st.sys, st.sf, 40, 1e-10);
    CHECK(tr.residual_angle < 1e-8);
    CHECK(tr.t_star == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("fold-validity preservation over random apexes and slopes") {
    Setup st;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        const double apex = 0.005 + 0.09 * unif(rng);
        const double lip = 0.9 * st.sf.frame.lip_bound * unif(rng);
        FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, apex, lip);
        REQUIRE(validate_fold(fold, st.sf).valid);
        FoldingManifold cur = fold;
        for (int i = 0; i < 6; ++i) {
            auto step = image_fold(cur, st.sys, st.sf);
            auto v = validate_fold(step.image, st.sf);
            INFO("apex " << apex << " lip " << lip << " iter " << i
                         << " endpoint " << v.endpoint_worst
                         << " interior " << v.interior_worst);
            CHECK(v.valid);
            cur = step.image;
        }
    }
}

TEST_CASE("nested windows shrink and the tangency certificate is machine-tight") {
    Setup st;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, 0.05, 0.0);
    TangencyResult tr = locate_tangency(fold, st.sys, st.sf, 60, 1e-10);

    // the apex orbit enters the branch-B window after three A-steps
    REQUIRE(tr.word.size() >= 4);
    CHECK(tr.word[0] == Branch::A);
    CHECK(tr.word[1] == Branch::A);
    CHECK(tr.word[2] == Branch::A);
    CHECK(tr.word[3] == Branch::B);

    // windows are nested with non-increasing widths, strictly after the
    // first B-selection
    for (size_t i = 1; i < tr.parameter_intervals.size(); ++i) {
        auto [alo, ahi] = tr.parameter_intervals[i - 1];
        auto [blo, bhi] = tr.parameter_intervals[i];
        CHECK(blo >= alo - 1e-12);
        CHECK(bhi <= ahi + 1e-12);
        CHECK(bhi - blo <= (ahi - alo) * (1.0 + 1e-12));
        if (i >= 4 && tr.word[i - 1] == Branch::B)
            CHECK(bhi - blo < (ahi - alo) * (1.0 - 1e-6));
    }

    // by symmetry of the quadratic profile the tangency parameter is 1/2
    CHECK(tr.t_star == Catch::Approx(0.5).margin(1e-12));
    CHECK(tr.residual_angle < 1e-8);
    CHECK(tr.direction_cone_margin > 0.0);
    CHECK(tr.forward_cone_margin_min > 0.0);
    CHECK(tr.orbit_residual_max < 1e-12);
    // the pulled-back direction is the stable axis
    CHECK(std::abs(tr.direction(0)) == Catch::Approx(1.0).epsilon(1e-10));

    // the quadratic contact makes the window shrink like the square
    // root of the central pullback, far slower than the tolerance; the
    // run is flagged unconverged at this budget
    CHECK_FALSE(tr.converged);
    CHECK(tr.interval_width > 1e-10);
    CHECK(tr.interval_width < 0.05);
}

TEST_CASE("window recursion agrees with the closed-form oracle") {
    Setup st;
    const double apex = 0.05;
    FoldingManifold fold = make_quadratic_fold(st.sys, st.sf, Saddle::P, apex, 0.0);
    TangencyResult tr = locate_tangency(fold, st.sys, st.sf, 20, 1e-14);

    oracle::FoldWindowOracle orc{st.sys.model.lambda, st.sys.model.mu,
                                 st.sys.model.q_central(), apex};
    auto word = orc.deterministic_word(20);
    REQUIRE(word.size() == tr.word.size());
    for (size_t i = 0; i < word.size(); ++i) CHECK(word[i] == tr.word[i]);

    // per-step windows match the survivor sets of the forced word
    for (size_t i = 1; i < tr.parameter_intervals.size(); ++i) {
        std::vector<Branch> prefix(word.begin(), word.begin() + i);
        auto tw = orc.surviving_t_window(prefix);
        REQUIRE(tw.has_value());
        CHECK(tr.parameter_intervals[i].first == Catch::Approx(tw->first).margin(1e-9));
        CHECK(tr.parameter_intervals[i].second == Catch::Approx(tw->second).margin(1e-9));
    }
}

TEST_CASE("every fold parameter survives some word of the full shift") {
    // the covering property seen from the fold: the c-survivor
    // intervals of all words of length 12 cover the profile range
    oracle::FoldWindowOracle orc{1.2, 0.02, 0.1, 0.05};
    auto intervals = orc.all_surviving_c_intervals(12);
    std::sort(intervals.begin(), intervals.end());
    double covered = 0.0;
    for (auto& [lo, hi] : intervals) {
        if (lo > covered + 1e-12) break;
        covered = std::max(covered, hi);
    }
    CHECK(covered >= orc.apex);
}
