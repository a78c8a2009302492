#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "physadv/powergrid.hpp"
#include "testutil.hpp"

using namespace physadv;

namespace {

power::GridSystem twoMeterGrid() {
    power::GridSystem g;
    g.h = Matrix::Ones(2, 1);
    g.w = Matrix::Identity(2, 2);
    g.tau = 0.5;
    return g;
}

std::string tempPath(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

power::FdiaSynthParams smallParams() {
    power::FdiaSynthParams p;
    p.trainCount = 400;
    p.testCount = 60;
    p.calibrationCount = 200;
    return p;
}

}  // namespace

TEST_CASE("bundled grid has the documented shape and full column rank") {
    const auto g = power::bundledGrid();
    CHECK(g.branches() == 12);
    CHECK(g.states() == 6);
    CHECK(linalg::rank(g.h) == 6);
    Eigen::FullPivLU<Matrix> lu(g.h);
    CHECK(lu.rank() == 6);
    CHECK(((g.h.array() == 0) || (g.h.array() == 1) || (g.h.array() == -1)).all());
    // deterministic construction
    CHECK((power::bundledGrid().h.array() == g.h.array()).all());
}

TEST_CASE("grid csv round trip is exact and rejects short systems") {
    const auto g = power::bundledGrid();
    const auto path = tempPath("physadv_test_grid.csv");
    power::saveGrid(path, g);
    const auto back = power::loadGrid(path);
    CHECK((back.h.array() == g.h.array()).all());
    std::remove(path.c_str());

    const auto badPath = tempPath("physadv_test_grid_bad.csv");
    {
        std::ofstream out(badPath);
        out << "1,0,0\n0,1,0\n0,0,1\n";  // m == n
    }
    CHECK_THROWS_AS(power::loadGrid(badPath), RankDeficientH);
    std::remove(badPath.c_str());
}

TEST_CASE("estimateState averages redundant equal-weight readings") {
    const auto g = twoMeterGrid();
    Vector z(2);
    z << 1, 3;
    CHECK(power::estimateState(g, z)(0) == doctest::Approx(2.0));
    CHECK(power::residualNorm(g, z) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("residual is zero on exact measurements and invariant to Hc") {
    std::mt19937_64 rng(3);
    const auto g = power::bundledGrid();
    const Vector x = testutil::randomVector(rng, 6, 2.0);
    CHECK(power::residualNorm(g, g.h * x) < 1e-9);

    for (int t = 0; t < 100; ++t) {
        const Vector z = testutil::randomVector(rng, 12, 3.0);
        const Vector c = testutil::randomVector(rng, 6, 2.0);
        CHECK(std::abs(power::residualNorm(g, z + g.h * c) - power::residualNorm(g, z)) < 1e-8);
    }
}

TEST_CASE("detectBad thresholds the residual") {
    auto g = power::bundledGrid();
    std::mt19937_64 rng(5);
    const Vector x = testutil::randomVector(rng, 6, 2.0);
    g.tau = 0.5;
    CHECK_FALSE(power::detectBad(g, g.h * x));

    g.tau = 0.0;
    const Vector noisy = g.h * x + testutil::randomVector(rng, 12, 0.1);
    CHECK(power::detectBad(g, noisy));

    // FDIA on a passing measurement still passes
    g.tau = 0.5;
    const Vector z = g.h * x + testutil::randomVector(rng, 12, 0.05);
    REQUIRE_FALSE(power::detectBad(g, z));
    const Vector a = power::makeFdiaVector(g, testutil::randomVector(rng, 6, 2.0));
    CHECK_FALSE(power::detectBad(g, z + a));
}

TEST_CASE("fdiaB matches the rank-one hand computation") {
    const auto g = twoMeterGrid();
    const Matrix b = power::fdiaB(g);
    CHECK(b(0, 0) == doctest::Approx(-0.5));
    CHECK(b(0, 1) == doctest::Approx(0.5));
    CHECK(b(1, 0) == doctest::Approx(0.5));
    CHECK(b(1, 1) == doctest::Approx(-0.5));
}

TEST_CASE("fdiaB annihilates the column space and squares to its negation") {
    std::mt19937_64 rng(7);
    const auto g = power::bundledGrid();
    const Matrix b = power::fdiaB(g);
    for (int t = 0; t < 20; ++t) {
        const Vector c = testutil::randomVector(rng, 6, 2.0);
        CHECK((b * (g.h * c)).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(((b * b) + b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(linalg::rank(b, 1e-7) == 6);  // m - n
    Eigen::FullPivLU<Matrix> lu(b);
    lu.setThreshold(1e-7);
    CHECK(lu.rank() == 6);
}

TEST_CASE("makeFdiaVector is H times c") {
    const auto g = twoMeterGrid();
    CHECK(power::makeFdiaVector(g, Vector::Zero(1)).cwiseAbs().maxCoeff() == 0.0);
    const Vector a = power::makeFdiaVector(g, Vector::Constant(1, 0.5));
    CHECK(a(0) == doctest::Approx(0.5));
    CHECK(a(1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(power::makeFdiaVector(g, Vector::Zero(2)), DimensionMismatch);
}

TEST_CASE("fdiaConstraint needs a compromised set larger than m minus n") {
    const auto g = power::bundledGrid();
    const Matrix b = power::fdiaB(g);

    // a single compromised branch is always pinned: its B column is nonzero
    REQUIRE(b.col(0).cwiseAbs().maxCoeff() > 1e-9);
    CHECK_THROWS_AS(power::fdiaConstraint(g, {0}), DegenerateConstraint);

    // scan for a 6-branch set whose restriction has full column rank
    bool foundDegenerate = false;
    for (Eigen::Index start = 0; start + 6 <= 12 && !foundDegenerate; ++start) {
        IndexList six;
        for (Eigen::Index j = 0; j < 6; ++j) six.push_back(start + j);
        Matrix bS(12, 6);
        for (int j = 0; j < 6; ++j) bS.col(j) = b.col(six[static_cast<size_t>(j)]);
        if (linalg::rank(bS, 1e-7) == 6) {
            CHECK_THROWS_AS(power::fdiaConstraint(g, six), DegenerateConstraint);
            foundDegenerate = true;
        }
    }
    CHECK(foundDegenerate);

    IndexList eight = {0, 1, 3, 4, 6, 8, 10, 11};
    const auto cs = power::fdiaConstraint(g, eight);
    const auto dep = linalg::dependency(cs.phi, 1e-7);
    CHECK(static_cast<Eigen::Index>(dep.independent.size()) >= 2);
}

TEST_CASE("perturbations from the fdia constraint stay residual stealthy") {
    std::mt19937_64 rng(11);
    auto g = power::bundledGrid();
    g.tau = 0.5;
    IndexList c = {0, 1, 3, 4, 6, 8, 10, 11};
    const auto cs = power::fdiaConstraint(g, c);
    const Matrix basis = linalg::dependency(cs.phi, 1e-7).nullBasis();

    const Vector x = testutil::randomVector(rng, 6, 2.0);
    const Vector z = g.h * x + testutil::randomVector(rng, 12, 0.05);
    REQUIRE_FALSE(power::detectBad(g, z));
    const Vector a = power::makeFdiaVector(g, testutil::randomVector(rng, 6, 1.0));
    REQUIRE_FALSE(power::detectBad(g, z + a));

    const Matrix bFull = power::fdiaB(g);
    for (int t = 0; t < 50; ++t) {
        const Vector vC = basis * testutil::randomVector(rng, basis.cols(), 2.0);
        Vector v = Vector::Zero(12);
        scatterInto(v, c, vC);
        CHECK((bFull * v).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(power::detectBad(g, z + a + v) == power::detectBad(g, z + a));
    }
}

TEST_CASE("synthesized fdia datasets honor labels, stealth, and balance") {
    const auto g = power::bundledGrid();
    const IndexList c = {0, 1, 3, 4, 6, 8, 10, 11};
    const auto data = power::synthesizeFdiaDataset(g, smallParams(), c, 42);
    CHECK(data.tau > 0.0);

    auto calibrated = g;
    calibrated.tau = data.tau;

    int attacks = 0;
    for (Eigen::Index i = 0; i < data.defender.size(); ++i) {
        const int label = data.defender.labels[static_cast<size_t>(i)];
        attacks += label;
        if (label == 1) {
            CHECK_FALSE(power::detectBad(calibrated, data.defender.features.row(i).transpose()));
        }
    }
    const double ratio = static_cast<double>(attacks) / static_cast<double>(data.defender.size());
    CHECK(std::abs(ratio - 0.5) < 0.01);

    // test vectors: stealthy, supported on C only
    for (Eigen::Index i = 0; i < data.testPolluted.rows(); ++i) {
        const Vector poll = data.testPolluted.row(i).transpose();
        const Vector clean = data.testClean.row(i).transpose();
        CHECK_FALSE(power::detectBad(calibrated, poll));
        CHECK(std::abs(power::residualNorm(calibrated, poll) -
                       power::residualNorm(calibrated, clean)) < 1e-8);
        const Vector diff = poll - clean;
        for (auto u : complementIndices(c, 12)) {
            CHECK(diff(u) == 0.0);
        }
        CHECK(diff.cwiseAbs().maxCoeff() > 0.0);
    }

    // defender and attacker splits come from different streams
    CHECK_FALSE((data.defender.features.row(0).array() == data.attacker.features.row(0).array()).all());

    // identical seed reproduces the datasets bit for bit
    const auto again = power::synthesizeFdiaDataset(g, smallParams(), c, 42);
    CHECK((again.defender.features.array() == data.defender.features.array()).all());
    CHECK((again.testPolluted.array() == data.testPolluted.array()).all());
}
