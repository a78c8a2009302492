#pragma once

#include <string>

#include "physadv/linalg.hpp"

namespace physadv {

// Absolute tolerance for equality constraint checks.
inline constexpr double kEqualityTol = 1e-6;
// Inequality bounds are already slackened by the system's noise allowances,
// so the check is strict with the boundary itself inclusive.
inline constexpr double kInequalitySlack = 0.0;

enum class ConstraintKind { Equality, Inequality };

// Linear physical law over the compromised measurement subvector:
// phi * M_C = phiTilde (equality) or phi * M_C <= phiTilde (inequality).
struct ConstraintSet {
    Matrix phi;             // k x r
    Vector phiTilde;        // k
    ConstraintKind kind = ConstraintKind::Equality;
    IndexList compromised;  // C, strictly increasing indices into the full vector

    Eigen::Index rows() const { return phi.rows(); }
    Eigen::Index cols() const { return phi.cols(); }
    void validate(Eigen::Index fullDim = -1) const;
};

// Full sensor reading with the attacker's read-write/compromised partition.
struct MeasurementVector {
    Vector values;
    IndexList compromised;    // C
    IndexList uncompromised;  // U

    void validate() const;
};

IndexList complementIndices(const IndexList& idx, Eigen::Index dim);

// Gathers values at idx, in the given order.
Vector subvector(const Vector& values, const IndexList& idx);

// Writes vals back into full at the given positions.
void scatterInto(Vector& full, const IndexList& idx, const Vector& vals);

// Indices of equality rows violated beyond tol.
IndexList violatedEqualities(const ConstraintSet& cs, const Vector& mC, double tol = kEqualityTol);

// Indices of inequality rows with phi_i . mC > phiTilde_i + slackTol.
IndexList violatedInequalities(const ConstraintSet& cs, const Vector& mC,
                               double slackTol = kInequalitySlack);

// Theorem-1 test: a perturbation of M_C keeps an equality constraint
// satisfied iff phi * deltaC = 0.
bool validatePerturbation(const ConstraintSet& cs, const Vector& deltaC, double tol = kEqualityTol);

// Equality-kind subset of rows (the violated-row system of the inequality
// search). Duplicate indices are dropped, first occurrence wins.
ConstraintSet rowSubset(const ConstraintSet& cs, const IndexList& v);

void saveConstraintSet(const std::string& path, const ConstraintSet& cs);
ConstraintSet loadConstraintSet(const std::string& path);

}  // namespace physadv
