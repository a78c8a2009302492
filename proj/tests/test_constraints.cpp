#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "physadv/constraints.hpp"
#include "physadv/water.hpp"
#include "testutil.hpp"

using namespace physadv;

namespace {

ConstraintSet kirchhoffLaw() {
    // Meter1 = Meter2 + Meter3
    ConstraintSet cs;
    cs.phi.resize(1, 3);
    cs.phi << 1, -1, -1;
    cs.phiTilde = Vector::Zero(1);
    cs.kind = ConstraintKind::Equality;
    cs.compromised = {0, 1, 2};
    return cs;
}

Vector vec(std::initializer_list<double> vals) {
    Vector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("subvector gathers in the given order") {
    const Vector a = vec({10, 20, 30, 40, 50});
    CHECK(subvector(a, {0, 2, 4}).isApprox(vec({10, 30, 50})));
    CHECK(subvector(a, {}).size() == 0);
    CHECK(subvector(a, {3, 1}).isApprox(vec({40, 20})));
    CHECK_THROWS_AS(subvector(a, {5}), IndexOutOfBounds);
}

TEST_CASE("subvector and scatter round trip") {
    std::mt19937_64 rng(3);
    Vector full = testutil::randomVector(rng, 9);
    const Vector original = full;
    const IndexList c = {1, 4, 7};
    const Vector taken = subvector(full, c);
    scatterInto(full, c, taken);
    CHECK(full.isApprox(original));

    Vector replaced = full;
    scatterInto(replaced, c, vec({-1, -2, -3}));
    for (auto i : complementIndices(c, 9)) {
        CHECK(replaced(i) == original(i));
    }
    CHECK(replaced(1) == -1);
}

TEST_CASE("equality violations against the three-meter law") {
    const auto cs = kirchhoffLaw();
    CHECK(violatedEqualities(cs, vec({5, 2, 3})).empty());
    CHECK(violatedEqualities(cs, vec({5, 2, 2})) == IndexList{0});
    CHECK(violatedEqualities(cs, vec({5, 2, 2.6}), 0.5).empty());
}

TEST_CASE("inequality violations on the water system") {
    const auto swat = water::swatConstraints();
    // FIT301 above FIT201 breaks the first pipeline row.
    Vector mC = Vector::Zero(7);
    mC(0) = 1.0;
    mC(1) = 1.5;
    const auto violated = violatedInequalities(swat, mC);
    CHECK(std::find(violated.begin(), violated.end(), 0) != violated.end());

    CHECK(violatedInequalities(swat, Vector::Zero(7)).empty());

    // The bound itself is inclusive.
    ConstraintSet row;
    row.phi.resize(1, 2);
    row.phi << -1, 1;
    row.phiTilde = Vector::Zero(1);
    row.kind = ConstraintKind::Inequality;
    row.compromised = {0, 1};
    CHECK(violatedInequalities(row, vec({1.0, 1.0})).empty());
}

TEST_CASE("validatePerturbation is the null space membership test") {
    const auto cs = kirchhoffLaw();
    CHECK(validatePerturbation(cs, Vector::Zero(3)));
    CHECK(validatePerturbation(cs, vec({3, 1, 2})));
    CHECK_FALSE(validatePerturbation(cs, vec({3, 1, 1})));
}

TEST_CASE("linear combinations of valid perturbations stay valid") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coeff(-4.0, 4.0);
    for (int t = 0; t < 50; ++t) {
        const Matrix phi = testutil::randomRankDeficient(rng, 5, 7);
        if (linalg::rank(phi) == 0) continue;
        ConstraintSet cs;
        cs.phi = phi;
        cs.phiTilde = Vector::Zero(5);
        cs.kind = ConstraintKind::Equality;
        cs.compromised = {0, 1, 2, 3, 4, 5, 6};
        const Matrix basis = linalg::dependency(phi).nullBasis();
        const Vector d0 = basis * testutil::randomVector(rng, basis.cols());
        const Vector d1 = basis * testutil::randomVector(rng, basis.cols());
        const Vector combo = coeff(rng) * d0 + coeff(rng) * d1;
        CHECK(validatePerturbation(cs, combo, 1e-6 * std::max(1.0, combo.norm())));
    }
}

TEST_CASE("rowSubset extracts an equality system and deduplicates") {
    const auto swat = water::swatConstraints();
    const auto one = rowSubset(swat, {0});
    CHECK(one.phi.rows() == 1);
    CHECK(one.phi.cols() == 7);
    CHECK(one.kind == ConstraintKind::Equality);
    CHECK(one.phiTilde(0) == 0.0);

    CHECK(rowSubset(swat, {}).phi.rows() == 0);
    CHECK(rowSubset(swat, {2, 2}).phi.rows() == 1);

    const auto pair = rowSubset(swat, {3, 1});
    CHECK(pair.phi.row(0).isApprox(swat.phi.row(3)));
    CHECK(pair.phi.row(1).isApprox(swat.phi.row(1)));

    CHECK_THROWS_AS(rowSubset(swat, {9}), IndexOutOfBounds);
}

TEST_CASE("an equality encoded as two opposing inequalities agrees") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Index k = 3, r = 5;
        ConstraintSet eq;
        eq.phi = testutil::randomMatrix(rng, k, r);
        eq.phiTilde = testutil::randomVector(rng, k);
        eq.kind = ConstraintKind::Equality;
        eq.compromised = {0, 1, 2, 3, 4};

        ConstraintSet iq;
        iq.phi.resize(2 * k, r);
        iq.phi << eq.phi, -eq.phi;
        iq.phiTilde.resize(2 * k);
        iq.phiTilde << eq.phiTilde, -eq.phiTilde;
        iq.kind = ConstraintKind::Inequality;
        iq.compromised = eq.compromised;

        const Vector mC = testutil::randomVector(rng, r);
        const auto eqViol = violatedEqualities(eq, mC, 0.0);
        const auto iqViol = violatedInequalities(iq, mC);
        for (Eigen::Index row = 0; row < k; ++row) {
            const bool eqHit = std::find(eqViol.begin(), eqViol.end(), row) != eqViol.end();
            const bool iqHit =
                std::find(iqViol.begin(), iqViol.end(), row) != iqViol.end() ||
                std::find(iqViol.begin(), iqViol.end(), row + k) != iqViol.end();
            CHECK(eqHit == iqHit);
        }
    }
}

TEST_CASE("constraint set file round trip") {
    const auto swat = water::swatConstraints();
    const auto path =
        (std::filesystem::temp_directory_path() / "physadv_test_constraint.csv").string();
    saveConstraintSet(path, swat);
    const auto back = loadConstraintSet(path);
    CHECK(back.kind == ConstraintKind::Inequality);
    CHECK((back.phi.array() == swat.phi.array()).all());
    CHECK((back.phiTilde.array() == swat.phiTilde.array()).all());
    CHECK(back.compromised == swat.compromised);
    std::remove(path.c_str());
}

TEST_CASE("measurement vector partition is validated") {
    MeasurementVector mv{vec({1, 2, 3}), {0, 2}, {1}};
    CHECK_NOTHROW(mv.validate());
    MeasurementVector overlap{vec({1, 2, 3}), {0, 1}, {1, 2}};
    CHECK_THROWS_AS(overlap.validate(), Error);
    MeasurementVector incomplete{vec({1, 2, 3}), {0}, {1}};
    CHECK_THROWS_AS(incomplete.validate(), Error);
}
