#include <bhlab/central_ifs.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace bhlab;

namespace {
// distance in ulps between two doubles
int ulps_apart(double a, double b) {
    int n = 0;
    while (a != b && n < 64) {
        a = std::nextafter(a, b);
        ++n;
    }
    return n;
}
}  // namespace

TEST_CASE("threshold arithmetic of the default parameters") {
    CentralIFS ifs(1.2, 0.02);
    CHECK(ifs.q_c() == Catch::Approx(0.1).epsilon(1e-14));
    CHECK(ifs.sup_i1() == Catch::Approx(0.02 / (1.2 * 0.2)).epsilon(1e-13));
    CHECK(ifs.inf_i2() == Catch::Approx(0.02 / 1.2).epsilon(1e-14));

    CHECK(classify(ifs, 0.05) == Region::Overlap);
    CHECK(classify(ifs, 0.0) == Region::BoundaryP);
    CHECK(classify(ifs, 0.0083) == Region::I1Only);
    CHECK(classify(ifs, 0.09) == Region::I2Only);
    CHECK(classify(ifs, ifs.q_c()) == Region::BoundaryQ);
    CHECK(classify(ifs, -0.01) == Region::OutsideLeft);
    CHECK(classify(ifs, 0.11) == Region::OutsideRight);
}

TEST_CASE("branch selection and policies") {
    CentralIFS ifs(1.2, 0.02);
    CHECK(choose_branch(ifs, 0.005) == Branch::A);
    CHECK(choose_branch(ifs, 0.095) == Branch::B);
    CHECK(choose_branch(ifs, 0.05, BranchPolicy::PreferA) == Branch::A);
    CHECK(choose_branch(ifs, 0.05, BranchPolicy::PreferB) == Branch::B);
    // midpoint of the overlap [mu/lambda, mu/(lambda(lambda-1))]
    const double mid = 0.5 * (ifs.inf_i2() + ifs.sup_i1());
    CHECK(choose_branch(ifs, mid - 1e-3, BranchPolicy::Midpoint) == Branch::A);
    CHECK(choose_branch(ifs, mid + 1e-3, BranchPolicy::Midpoint) == Branch::B);
    CHECK_THROWS_AS(choose_branch(ifs, -0.01), std::domain_error);
    CHECK_THROWS_AS(choose_branch(ifs, 0.11), std::domain_error);
}

TEST_CASE("itineraries of the fixed points are constant") {
    CentralIFS ifs(1.2, 0.02);
    auto at_p = itinerary(ifs, 0.0, 8);
    for (Branch b : at_p.word) CHECK(b == Branch::A);
    for (double v : at_p.orbit) CHECK(v == 0.0);
    auto at_q = itinerary(ifs, ifs.q_c(), 8);
    for (Branch b : at_q.word) CHECK(b == Branch::B);
    for (double v : at_q.orbit) CHECK(v == Catch::Approx(ifs.q_c()).epsilon(1e-12));
}

TEST_CASE("itinerary containment over a grid, both policies") {
    CentralIFS ifs(1.2, 0.02);
    const double qc = ifs.q_c();
    for (int i = 0; i <= 200; ++i) {
        const double x = qc * i / 200.0;
        for (BranchPolicy pol : {BranchPolicy::PreferA, BranchPolicy::PreferB}) {
            auto it = itinerary(ifs, x, 200, pol);
            for (double v : it.orbit) {
                CHECK(v >= 0.0);
                CHECK(v <= qc);
            }
        }
    }
}

TEST_CASE("endpoint identities exact to 2 ulp over random parameters") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> lam(1.05, 1.95);
    std::uniform_real_distribution<double> mu01(0.05, 0.95);
    for (int k = 0; k < 1000; ++k) {
        const double lambda = lam(rng);
        const double delta = 0.125;
        const double mu = mu01(rng) * (lambda - 1.0) * delta;
        CentralIFS ifs(lambda, mu);
        CHECK(ulps_apart(lambda * ifs.sup_i1(), ifs.q_c()) <= 2);
        CHECK(ulps_apart(lambda * ifs.inf_i2(), mu) <= 2);
    }
}

TEST_CASE("covering certificate and margins") {
    auto rep = covering_check(CentralIFS(1.2, 0.02));
    CHECK(rep.certified);
    // overlap width mu (2 - lambda) / (lambda (lambda - 1))
    const double width = 0.02 * 0.8 / (1.2 * 0.2);
    CHECK(rep.overlap_width == Catch::Approx(width).epsilon(1e-12));
    CHECK(rep.overlap_width == Catch::Approx(0.0666666).epsilon(1e-4));

    auto narrow = covering_check(CentralIFS(1.999, 0.02));
    CHECK(narrow.certified);
    CHECK(narrow.overlap_width ==
          Catch::Approx(0.02 * (2.0 - 1.999) / (1.999 * 0.999)).epsilon(1e-12));

    CHECK_FALSE(covering_check(CentralIFS(2.0, 0.02)).certified);
    CHECK_FALSE(covering_check(CentralIFS(1.0, 0.02)).certified);
    CHECK_FALSE(covering_check(CentralIFS(1.2, 0.0)).certified);
    CHECK_FALSE(covering_check(CentralIFS(0.9, 0.02)).certified);
}

TEST_CASE("orbits of distinct points separate at rate lambda while words agree") {
    CentralIFS ifs(1.2, 0.02);
    const double x = 0.031, y = x + 1e-9;
    auto ix = itinerary(ifs, x, 60);
    auto iy = itinerary(ifs, y, 60);
    for (int k = 0; k < 60; ++k) {
        if (ix.word[k] != iy.word[k]) break;
        const double expect = (y - x) * std::pow(1.2, k + 1);
        CHECK(std::abs(iy.orbit[k + 1] - ix.orbit[k + 1]) ==
              Catch::Approx(expect).epsilon(1e-6));
    }
}
