#include <bhlab/blender_property.hpp>
#include <bhlab/disks.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace bhlab;

namespace {
UUDisk affine_disk(double xc0, double slope_c, double slope_s = 0.0, double xs0 = 0.0) {
    Mat gs(1, 1);
    gs(0, 0) = slope_s;
    RowVec gc(1);
    gc(0) = slope_c;
    return UUDisk::make_affine(Vec::Constant(1, xs0), xc0, gs, gc);
}
}  // namespace

TEST_CASE("position classification on the default instance") {
    BlenderModel m = default_instance();
    CHECK(classify_position(UUDisk::flat(Vec::Zero(1), 0.05, 1), m).cls ==
          PositionClass::Between);
    CHECK(classify_position(UUDisk::flat(Vec::Zero(1), 0.0, 1), m).cls == PositionClass::MeetsP);
    CHECK(classify_position(UUDisk::flat(Vec::Zero(1), m.q_central(), 1), m).cls ==
          PositionClass::MeetsQ);
    CHECK(classify_position(UUDisk::flat(Vec::Zero(1), -0.01, 1), m).cls ==
          PositionClass::LeftOfP);
    CHECK(classify_position(UUDisk::flat(Vec::Zero(1), 0.11, 1), m).cls ==
          PositionClass::RightOfQ);

    // affine disk xc(xu) = 0.02 + 0.01 xu: clearances 0.02 at P and
    // 0.02 + 0.01 a_u - 0.1 at Q
    Position pos = classify_position(affine_disk(0.02, 0.01), m);
    CHECK(pos.cls == PositionClass::Between);
    CHECK(pos.clearance_p == Catch::Approx(0.02).epsilon(1e-12));
    CHECK(pos.clearance_q ==
          Catch::Approx(0.02 + 0.01 * (14.0 / 15.0) - 0.1).epsilon(1e-10));
}

TEST_CASE("slope admissibility is enforced") {
    BlenderModel m = default_instance();
    CHECK_THROWS_AS(classify_position(affine_disk(0.05, 0.05), m), std::invalid_argument);
    // inconsistent clearances are rejected when a permissive frame allows big slopes
    StableFrame frame = StableFrame::for_model(m);
    frame.lip_bound = 1.0;
    CHECK_THROWS_AS(classify_position(affine_disk(-0.01, 0.2), frame), std::runtime_error);
}

TEST_CASE("graph transform of flat disks follows the central maps") {
    BlenderModel m = default_instance();
    MapSystem sys(m);
    UUDisk d = UUDisk::flat(Vec::Constant(1, 0.2), 0.05, 1);
    UUDisk ia = graph_transform(d, Branch::A, sys);
    REQUIRE(ia.is_affine());
    CHECK(ia.affine().xc0 == Catch::Approx(1.2 * 0.05).epsilon(1e-13));
    CHECK(ia.affine().xs0(0) == Catch::Approx(0.2 / 3.0).epsilon(1e-13));
    CHECK(ia.lip() == 0.0);

    UUDisk ib = graph_transform(d, Branch::B, sys);
    CHECK(ib.affine().xc0 == Catch::Approx(1.2 * 0.05 - 0.02).epsilon(1e-13));
    CHECK(ib.affine().xs0(0) == Catch::Approx(0.25 * 0.2 + 0.675).epsilon(1e-13));
}

TEST_CASE("graph transform contracts slopes by the advertised factor") {
    BlenderModel m = default_instance();
    MapSystem sys(m);
    UUDisk d = affine_disk(0.05, 0.2);
    UUDisk img = graph_transform(d, Branch::A, sys);
    CHECK(img.lip() <= 0.2 * 1.2 / 3.0 + 1e-12);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        UUDisk r = affine_disk(0.05 * unif(rng), 0.3 * unif(rng), 0.3 * unif(rng));
        if (r.lip() == 0.0) continue;
        for (Branch b : {Branch::A, Branch::B})
            CHECK(graph_transform(r, b, sys).lip() < r.lip());
    }
}

TEST_CASE("position laws of branch images, item by item") {
    BlenderModel m = default_instance();
    MapSystem sys(m);
    StableFrame frame = StableFrame::for_model(m);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double bound = frame.lip_bound;
    auto rand_disk = [&](double lo, double hi) {
        const double slope = bound * (2.0 * unif(rng) - 1.0);
        return affine_disk(lo + (hi - lo) * unif(rng), slope * 0.9);
    };
    for (int k = 0; k < 300; ++k) {
        // item 1: right of P stays right of P under branch A
        UUDisk right_p = rand_disk(1e-6, 0.05);
        CHECK(classify_position(graph_transform(right_p, Branch::A, sys), frame).clearance_p >
              0.0);
        // item 2: left of P stays left of P under branch A
        UUDisk left_p = rand_disk(-0.05, -1e-6);
        CHECK(classify_position(graph_transform(left_p, Branch::A, sys), frame).clearance_p <
              0.0);
        // items 5 and 6: the mu-clearance laws
        UUDisk meets_p = affine_disk(0.0, 0.9 * bound * (2.0 * unif(rng) - 1.0));
        CHECK(classify_position(graph_transform(meets_p, Branch::B, sys), frame).cls ==
              PositionClass::LeftOfP);
        UUDisk meets_q =
            affine_disk(m.q_central(), 0.0);
        CHECK(classify_position(graph_transform(meets_q, Branch::A, sys), frame).cls ==
              PositionClass::RightOfQ);
    }
}

TEST_CASE("in-between disks keep an in-between image under the chosen branch") {
    BlenderModel m = default_instance();
    MapSystem sys(m);
    StableFrame frame = StableFrame::for_model(m);
    CentralIFS ifs = m.central();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double reach = frame.lip_bound * 2.0;
    for (int k = 0; k < 500; ++k) {
        const double c = 1e-4 + (m.q_central() - reach - 2e-4) * unif(rng);
        UUDisk d = affine_disk(c, 0.9 * frame.lip_bound * (2.0 * unif(rng) - 1.0));
        REQUIRE(classify_position(d, frame).cls == PositionClass::Between);
        const Branch b = choose_branch(ifs, c);
        UUDisk img = graph_transform(d, b, sys);
        CHECK(classify_position(img, frame).cls == PositionClass::Between);
    }
}

TEST_CASE("sampled pipeline agrees with the affine pipeline on affine data") {
    BlenderModel m = default_instance();
    MapSystem sys(m);
    UUDisk d = affine_disk(0.03, 0.01, -0.005, 0.1);
    SampledGraph sg = d.to_sampled(65);
    UUDisk ds{sg};
    // multilinear interpolation reproduces an affine graph exactly
    Vec xu = Vec::Constant(1, 0.3217);
    auto [xs_a, xc_a] = d.eval(xu);
    auto [xs_s, xc_s] = ds.eval(xu);
    CHECK((xs_a - xs_s).norm() < 1e-14);
    CHECK(xc_a == Catch::Approx(xc_s).margin(1e-14));
    CHECK(ds.lip() >= d.lip());  // certified bound is conservative

    StableFrame frame = StableFrame::for_model(m);
    frame.lip_bound = 0.05;  // allow for the 1.5x inflation of the certificate
    Position pa = classify_position(d, frame);
    Position ps = classify_position(ds, frame);
    CHECK(pa.cls == ps.cls);
    CHECK(pa.clearance_p == Catch::Approx(ps.clearance_p).margin(1e-12));

    // the sampled graph-transform route lands on the affine image values
    UUDisk img_affine = graph_transform(d, Branch::B, sys);
    MapSystem sampled_sys(m);
    sampled_sys.treat_as_sampled = true;
    UUDisk img_sampled = graph_transform(ds, Branch::B, sampled_sys, 65);
    for (double x : {-0.7, -0.2, 0.0, 0.4, 0.9}) {
        Vec p = Vec::Constant(1, x);
        CHECK(img_affine.central_at(p) == Catch::Approx(img_sampled.central_at(p)).margin(1e-10));
    }
}

TEST_CASE("clearance against a sampled stable graph matches the flat case") {
    BlenderModel m = default_instance();
    StableGraph flat = StableFrame::for_model(m).ws_q;
    StableGraph sampled;
    sampled.grid = {-1.0, 0.0, 1.0};
    sampled.xc_values = {m.q_central(), m.q_central(), m.q_central()};
    sampled.xu_values = {m.F.a_u(), m.F.a_u(), m.F.a_u()};
    UUDisk d = affine_disk(0.03, 0.01, 0.2, 0.1);
    CHECK(disk_clearance(d, flat) == Catch::Approx(disk_clearance(d, sampled)).margin(1e-12));
}
