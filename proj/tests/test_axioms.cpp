#include <bhlab/axioms.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace bhlab;

namespace {
CheckOptions fast_opts() {
    CheckOptions o;
    o.disks_per_class = 60;  // unit-test budget; acceptance runs the full one
    return o;
}
}  // namespace

TEST_CASE("BH1 margins of the default instance") {
    MapSystem sys{default_instance()};
    auto rep = check_BH1(sys, sys.model.cube());
    CHECK(rep.verdict == Verdict::Certified);
    // binding constraints: branch-B stable image [0.45, 0.95] and the
    // branch-B unstable domain [0.45, 0.95], both 0.05 from the boundary
    CHECK(rep.margin == Catch::Approx(0.05).epsilon(1e-9));
    CHECK(rep.method == "analytic");
}

TEST_CASE("BH1 refutations") {
    // a 0.9-contraction makes the two vertical strips overlap
    BlenderModel bad = default_instance();
    bad.F.branch_a.S(0, 0) = 0.9;
    MapSystem sys{bad};
    auto rep = check_BH1(sys, bad.cube());
    CHECK(rep.verdict == Verdict::Refuted);
}

TEST_CASE("BH2 cone invariance rates on the default instance") {
    MapSystem sys{default_instance()};
    auto rep = check_BH2(sys, sys.model.cube(), ConeParams(0.2, 0.1));
    CHECK(rep.verdict == Verdict::Certified);
    // uu rate: max(||S||, lambda) * ||U^-1|| = 1.2/3 per branch A, so the
    // achieved aperture at alpha = 0.2 is 0.08 against alpha' = 0.1
    CHECK(rep.margin == Catch::Approx(0.1 - 0.08).epsilon(1e-9));

    CHECK_THROWS_AS(ConeParams(0.2, 0.2), std::invalid_argument);  // strictness
    CHECK_THROWS_AS(ConeParams(0.2, 0.25), std::invalid_argument);
}

TEST_CASE("BH2 refutes central domination of the unstable expansion") {
    BlenderModel bad = default_instance();
    bad.lambda = 3.5;
    bad.F.branch_a.U(0, 0) = 3.0;
    bad.F.branch_a.dom = Box(Vec::Constant(1, -1.0 / 3.0), Vec::Constant(1, 1.0 / 3.0));
    bad.F.branch_b.U(0, 0) = 3.0;
    bad.F.branch_b.bu = Vec::Constant(1, -1.6);
    bad.F.branch_b.dom = Box(Vec::Constant(1, 0.2), Vec::Constant(1, 13.0 / 15.0));
    MapSystem sys{bad};
    auto rep = check_BH2(sys, bad.cube(), ConeParams(0.2, 0.1));
    CHECK(rep.verdict == Verdict::Refuted);  // lambda ||U^-1|| = 3.5/3 > 1

    BlenderModel slow = default_instance();
    slow.lambda = 0.9;  // central direction not expanding
    auto rep2 = check_BH2(MapSystem{slow}, slow.cube(), ConeParams(0.2, 0.1));
    CHECK(rep2.verdict == Verdict::Refuted);
}

TEST_CASE("BH3 Markov rectangles match the branch slab formulas") {
    BlenderModel m = default_instance();
    MapSystem sys{m};
    auto out = check_BH3(sys, m.cube());
    CHECK(out.report.verdict == Verdict::Certified);
    CHECK(out.box_a.c_lo == Catch::Approx(-m.delta / m.lambda).epsilon(1e-12));
    CHECK(out.box_a.c_hi == Catch::Approx(m.delta / m.lambda).epsilon(1e-12));
    CHECK(out.box_b.c_lo == Catch::Approx((-m.delta + m.mu) / m.lambda).epsilon(1e-12));
    CHECK(out.box_b.c_hi == Catch::Approx((m.delta + m.mu) / m.lambda).epsilon(1e-12));
    // binding margin: delta - (delta + mu)/lambda
    CHECK(out.report.margin ==
          Catch::Approx(m.delta - (m.delta + m.mu) / m.lambda).epsilon(1e-9));

    BlenderModel tight = m;
    tight.mu = 0.024;
    auto out2 = check_BH3(MapSystem{tight}, tight.cube());
    CHECK(out2.report.verdict == Verdict::Certified);
    CHECK(out2.report.margin ==
          Catch::Approx(0.125 - (0.125 + 0.024) / 1.2).epsilon(1e-6));

    BlenderModel bad = m;
    bad.mu = 0.03;  // >= (lambda-1) delta: branch-B slab exits the cube
    auto out3 = check_BH3(MapSystem{bad}, bad.cube());
    CHECK(out3.report.verdict == Verdict::Refuted);
    // BH1 does not see the central overflow
    CHECK(check_BH1(MapSystem{bad}, bad.cube()).verdict == Verdict::Certified);
}

TEST_CASE("BH4 admissibility bound and conservative verdicts") {
    BlenderModel m = default_instance();
    MapSystem sys{m};
    SystemFrame sf = SystemFrame::build(sys);
    auto out = check_BH4(sys, m.cube(), 0.01, sf);
    CHECK(out.alpha_admissible == Catch::Approx(0.0125).epsilon(1e-12));
    CHECK(out.report.verdict == Verdict::Certified);
    CHECK(out.report.margin == Catch::Approx(0.0025).epsilon(1e-9));

    auto at_zero = check_BH4(sys, m.cube(), 0.0, sf);  // vertical disks
    CHECK(at_zero.report.verdict == Verdict::Certified);
    CHECK(at_zero.report.margin == Catch::Approx(0.0125).epsilon(1e-9));

    auto above = check_BH4(sys, m.cube(), 0.05, sf);
    CHECK(above.report.verdict == Verdict::Inconclusive);
}

TEST_CASE("BH5 analytic margin and Monte Carlo audit") {
    BlenderModel m = default_instance();
    MapSystem sys{m};
    SystemFrame sf = SystemFrame::build(sys);
    auto rep = check_BH5(sys, m.cube(), 0.01, sf, fast_opts());
    CHECK(rep.verdict == Verdict::Certified);
    // item 5: mu - lambda alpha |U_B^{-1}(-b_B)| = 0.02 - 1.2*0.01*0.7
    // item 6: mu - lambda alpha |U_A^{-1}(a_u) - a_u| with a_u = 14/15
    const double item5 = 0.02 - 1.2 * 0.01 * 0.7;
    const double item6 = 0.02 - 1.2 * 0.01 * (28.0 / 45.0);
    CHECK(rep.margin == Catch::Approx(std::min(item5, item6)).epsilon(1e-9));

    BlenderModel flipped = m;
    flipped.lambda = -1.2;  // orientation reversed
    auto rep2 = check_BH5(MapSystem{flipped}, flipped.cube(), 0.01, sf, fast_opts());
    CHECK(rep2.verdict == Verdict::Refuted);
}

TEST_CASE("BH6 covering margin") {
    BlenderModel m = default_instance();
    MapSystem sys{m};
    SystemFrame sf = SystemFrame::build(sys);
    auto rep = check_BH6(sys, m.cube(), 0.0125, sf, fast_opts());
    CHECK(rep.verdict == Verdict::Certified);
    // overlap width 0.0667, alpha reach 0.025: margin 0.00833
    CHECK(rep.margin == Catch::Approx(0.0666666 / 2.0 - 0.025).epsilon(1e-4));

    auto vertical = check_BH6(sys, m.cube(), 0.0, sf, fast_opts());
    CHECK(vertical.verdict == Verdict::Certified);

    BlenderModel narrow = m;
    narrow.lambda = 1.99;
    // overlap width ~ 5e-5 forces tiny apertures; alpha = 0.0125 overshoots
    auto rep2 = check_BH6(MapSystem{narrow}, narrow.cube(), 0.0125,
                          SystemFrame::build(MapSystem{narrow}), fast_opts());
    CHECK(rep2.verdict != Verdict::Certified);

    BlenderModel out_of_range = m;
    out_of_range.lambda = 2.0;
    auto rep3 = check_BH6(MapSystem{out_of_range}, out_of_range.cube(), 0.0125,
                          SystemFrame::build(MapSystem{out_of_range}), fast_opts());
    CHECK(rep3.verdict == Verdict::Refuted);
}

TEST_CASE("full certification of the default instance") {
    MapSystem sys{default_instance()};
    BlenderCertificate cert = certify_blender(sys, ConeParams(0.01, 0.006), fast_opts());
    CHECK(cert.overall() == Verdict::Certified);
    for (int i = 1; i <= 6; ++i) {
        INFO("condition BH" << i << ": " << cert.condition(i).note);
        CHECK(cert.condition(i).verdict == Verdict::Certified);
        CHECK(cert.condition(i).margin > 0.0);
    }
    CHECK(cert.alpha_admissible == Catch::Approx(0.0125).epsilon(1e-12));
    CHECK(cert.rates.stable_contraction == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(cert.rates.central_min == Catch::Approx(1.2).epsilon(1e-12));
    CHECK(cert.rates.unstable_expansion == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(cert.rates.dominated);
}

TEST_CASE("refuted families") {
    BlenderModel slow = default_instance();
    slow.lambda = 0.9;
    CHECK(certify_blender(MapSystem{slow}, ConeParams(0.01, 0.006), fast_opts()).overall() ==
          Verdict::Refuted);

    BlenderModel wide = default_instance();
    wide.mu = 0.03;
    CHECK(certify_blender(MapSystem{wide}, ConeParams(0.01, 0.006), fast_opts()).overall() ==
          Verdict::Refuted);
}

TEST_CASE("certification is monotone in the cone apertures") {
    MapSystem sys{default_instance()};
    auto base = certify_blender(sys, ConeParams(0.01, 0.006), fast_opts());
    REQUIRE(base.overall() == Verdict::Certified);
    // smaller alpha, relatively larger alpha' stays certified
    auto smaller = certify_blender(sys, ConeParams(0.008, 0.0064), fast_opts());
    CHECK(smaller.overall() == Verdict::Certified);
}

TEST_CASE("margins vary continuously along a parameter ray") {
    CheckOptions opts = fast_opts();
    double prev_margin = 0.0;
    bool prev_set = false;
    for (int i = 0; i <= 8; ++i) {
        BlenderModel m = default_instance();
        m.mu = 0.004 + i * 0.002;  // stays below (lambda-1) delta = 0.025
        auto cert = certify_blender(MapSystem{m}, ConeParams(0.005, 0.003), opts);
        const double mm = cert.bh3.margin;
        if (prev_set) CHECK(std::abs(mm - prev_margin) < 0.01);
        prev_margin = mm;
        prev_set = true;
    }
}
