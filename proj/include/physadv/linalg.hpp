#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "physadv/errors.hpp"

namespace physadv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<Eigen::Index>;

}  // namespace physadv

namespace physadv::linalg {

// Entries with magnitude below kPivotTol * max|entry| are treated as zero
// during pivot selection. Constraint matrices here are small and mostly
// exact 0/±1, so a relative tolerance this tight is safe.
inline constexpr double kPivotTol = 1e-9;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
bool allFinite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Derived>
void requireFinite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) {
        throw Error(std::string(what) + ": non-finite entries");
    }
}

template <typename Scalar>
struct RrefResult {
    DenseMatrix<Scalar> reduced;
    IndexList pivotCols;  // one per nonzero row, ascending
};

// Partition of the columns of a constraint matrix phi into independent
// (free) indices I and dependent (pivot) indices D, with x_D = B x_I for
// every x in the null space of phi.
template <typename Scalar>
struct DependencyDecomposition {
    IndexList independent;            // I, sorted ascending
    IndexList dependent;              // D, sorted ascending
    DenseMatrix<Scalar> dependency;   // B, |D| x |I|

    Eigen::Index cols() const {
        return static_cast<Eigen::Index>(independent.size() + dependent.size());
    }

    // Basis of the null space, one column per independent variable.
    DenseMatrix<Scalar> nullBasis() const {
        const auto r = cols();
        const auto nfree = static_cast<Eigen::Index>(independent.size());
        DenseMatrix<Scalar> basis = DenseMatrix<Scalar>::Zero(r, nfree);
        for (Eigen::Index j = 0; j < nfree; ++j) {
            basis(independent[static_cast<size_t>(j)], j) = Scalar(1);
            for (size_t k = 0; k < dependent.size(); ++k) {
                basis(dependent[k], j) = dependency(static_cast<Eigen::Index>(k), j);
            }
        }
        return basis;
    }
};

// Reduced row echelon form with partial pivoting by largest magnitude.
// Pivot columns come out leftmost-first; ties between candidate pivot rows
// go to the first (topmost) row of maximal magnitude.
template <typename Derived>
RrefResult<typename Derived::Scalar> rref(const Eigen::MatrixBase<Derived>& input,
                                          double pivotTol = kPivotTol) {
    using Scalar = typename Derived::Scalar;
    if (pivotTol <= 0) {
        throw Error("rref: pivotTol must be positive");
    }
    DenseMatrix<Scalar> m = input.derived();
    requireFinite(m, "rref");

    const double scale = m.size() > 0 ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
    const double thresh = pivotTol * std::max(1.0, scale);

    IndexList pivots;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
        Eigen::Index best = row;
        double bestMag = std::abs(static_cast<double>(m(row, col)));
        for (Eigen::Index i = row + 1; i < m.rows(); ++i) {
            const double mag = std::abs(static_cast<double>(m(i, col)));
            if (mag > bestMag) {
                best = i;
                bestMag = mag;
            }
        }
        if (bestMag < thresh) {
            continue;  // free column
        }
        m.row(row).swap(m.row(best));
        m.row(row) /= m(row, col);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i != row && m(i, col) != Scalar(0)) {
                m.row(i) -= m(i, col) * m.row(row);
            }
        }
        // Pin the pivot column exactly; keeps rref idempotent.
        m.col(col).setZero();
        m(row, col) = Scalar(1);
        pivots.push_back(col);
        ++row;
    }
    return {std::move(m), std::move(pivots)};
}

template <typename Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& m, double pivotTol = kPivotTol) {
    return static_cast<Eigen::Index>(rref(m, pivotTol).pivotCols.size());
}

// Extracts [I, D, B] from phi so that x_D = B x_I spans the null space of
// phi. Pivot columns become the dependent set: rref expresses exactly those
// in terms of the free columns, which yields B directly.
template <typename Derived>
DependencyDecomposition<typename Derived::Scalar> dependency(
    const Eigen::MatrixBase<Derived>& phi, double pivotTol = kPivotTol) {
    using Scalar = typename Derived::Scalar;
    const auto rr = rref(phi, pivotTol);
    const auto r = phi.cols();
    const auto n = static_cast<Eigen::Index>(rr.pivotCols.size());
    if (n == 0) {
        throw EmptyConstraint("dependency: rank-zero constraint matrix");
    }
    if (n == r) {
        throw DegenerateConstraint(
            "dependency: full column rank, only the zero perturbation exists");
    }

    DependencyDecomposition<Scalar> out;
    out.dependent = rr.pivotCols;
    out.independent.reserve(static_cast<size_t>(r - n));
    size_t next = 0;
    for (Eigen::Index c = 0; c < r; ++c) {
        if (next < rr.pivotCols.size() && rr.pivotCols[next] == c) {
            ++next;
        } else {
            out.independent.push_back(c);
        }
    }
    out.dependency.resize(n, r - n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < r - n; ++j) {
            out.dependency(k, j) = -rr.reduced(k, out.independent[static_cast<size_t>(j)]);
        }
    }
    return out;
}

// Weighted least squares x = argmin ||sqrt(W)(Hx - z)||, solved by QR
// rather than forming (H^T W H)^-1.
Vector leastSquares(const Matrix& h, const Matrix& w, const Vector& z);

// CSV import/export: comma separated, one row per line. A leading header
// line is ignored when its first cell is not numeric.
Matrix loadCsv(const std::string& path);
void saveCsv(const std::string& path, const Matrix& m);

}  // namespace physadv::linalg
