#include "physadv/powergrid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace physadv::power {

namespace {

std::mt19937_64 streamRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

void validateGrid(const GridSystem& g) {
    if (g.h.rows() <= g.h.cols()) {
        throw RankDeficientH("GridSystem: need more branches than states");
    }
    if (linalg::rank(g.h) < g.h.cols()) {
        throw RankDeficientH("GridSystem: H must have full column rank");
    }
}

}  // namespace

GridSystem bundledGrid() {
    constexpr Eigen::Index kBuses = 7;   // bus 0 is the reference
    constexpr Eigen::Index kBranches = 12;
    GridSystem g;
    g.h = Matrix::Zero(kBranches, kBuses - 1);

    // Spanning chain keeps the graph connected, then extra seeded branches.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index b = 0; b + 1 < kBuses; ++b) {
        edges.emplace_back(b, b + 1);
    }
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<Eigen::Index> bus(0, kBuses - 1);
    while (edges.size() < static_cast<size_t>(kBranches)) {
        const Eigen::Index a = bus(rng);
        const Eigen::Index b = bus(rng);
        if (a == b) continue;
        const auto e = std::minmax(a, b);
        if (std::find(edges.begin(), edges.end(), std::make_pair(e.first, e.second)) != edges.end()) {
            continue;
        }
        edges.emplace_back(e.first, e.second);
    }
    for (Eigen::Index row = 0; row < kBranches; ++row) {
        const auto [a, b] = edges[static_cast<size_t>(row)];
        if (a > 0) g.h(row, a - 1) = 1.0;
        if (b > 0) g.h(row, b - 1) = -1.0;
    }

    g.w = Matrix::Identity(kBranches, kBranches);
    validateGrid(g);
    return g;
}

GridSystem loadGrid(const std::string& path) {
    GridSystem g;
    g.h = linalg::loadCsv(path);
    g.w = Matrix::Identity(g.h.rows(), g.h.rows());
    validateGrid(g);
    return g;
}

void saveGrid(const std::string& path, const GridSystem& g) {
    linalg::saveCsv(path, g.h);
}

Vector estimateState(const GridSystem& g, const Vector& z) {
    return linalg::leastSquares(g.h, g.w, z);
}

double residualNorm(const GridSystem& g, const Vector& z) {
    return (z - g.h * estimateState(g, z)).norm();
}

bool detectBad(const GridSystem& g, const Vector& z) {
    return residualNorm(g, z) > g.tau;
}

double calibrateTau(const GridSystem& g, const Matrix& cleanSamples, double quantile) {
    if (cleanSamples.rows() == 0) {
        throw EmptyDataset("calibrateTau: no calibration samples");
    }
    if (!(quantile > 0.0) || quantile > 1.0) {
        throw Error("calibrateTau: quantile must be in (0,1]");
    }
    std::vector<double> residuals;
    residuals.reserve(static_cast<size_t>(cleanSamples.rows()));
    for (Eigen::Index i = 0; i < cleanSamples.rows(); ++i) {
        residuals.push_back(residualNorm(g, cleanSamples.row(i).transpose()));
    }
    std::sort(residuals.begin(), residuals.end());
    const auto idx = static_cast<size_t>(
        std::ceil(quantile * static_cast<double>(residuals.size()))) - 1;
    return residuals[std::min(idx, residuals.size() - 1)];
}

Matrix fdiaB(const GridSystem& g) {
    Eigen::ColPivHouseholderQR<Matrix> qr(g.h);
    if (qr.rank() < g.h.cols()) {
        throw SingularSystem("fdiaB: H is rank deficient");
    }
    const Matrix q = qr.householderQ() * Matrix::Identity(g.h.rows(), g.h.cols());
    return q * q.transpose() - Matrix::Identity(g.h.rows(), g.h.rows());
}

Vector makeFdiaVector(const GridSystem& g, const Vector& c) {
    if (c.size() != g.h.cols()) {
        throw DimensionMismatch("makeFdiaVector: |c| must equal states");
    }
    return g.h * c;
}

ConstraintSet fdiaConstraint(const GridSystem& g, const IndexList& c) {
    ConstraintSet cs;
    cs.kind = ConstraintKind::Equality;
    cs.compromised = c;
    const Matrix b = fdiaB(g);
    cs.phi.resize(b.rows(), static_cast<Eigen::Index>(c.size()));
    for (size_t j = 0; j < c.size(); ++j) {
        if (c[j] < 0 || c[j] >= b.cols()) {
            throw IndexOutOfBounds("fdiaConstraint: compromised index out of range");
        }
        cs.phi.col(static_cast<Eigen::Index>(j)) = b.col(c[j]);
    }
    cs.phiTilde = Vector::Zero(b.rows());
    cs.validate(g.branches());
    if (linalg::rank(cs.phi) == cs.phi.cols()) {
        throw DegenerateConstraint(
            "fdiaConstraint: B restricted to C has full column rank; enlarge C");
    }
    return cs;
}

namespace {

Vector gaussian(std::mt19937_64& rng, Eigen::Index n, double sigma) {
    std::normal_distribution<double> dist(0.0, sigma);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

Vector cleanMeasurement(const GridSystem& g, const Vector& x0, const FdiaSynthParams& p,
                        std::mt19937_64& rng) {
    return g.h * (x0 + gaussian(rng, g.states(), p.stateSigma)) +
           gaussian(rng, g.branches(), p.noiseSigma);
}

// Clean base that passes the detector; FDIA on top of it inherits the pass.
Vector stealthyBase(const GridSystem& g, const Vector& x0, const FdiaSynthParams& p,
                    std::mt19937_64& rng) {
    for (int tries = 0; tries < 1000; ++tries) {
        Vector z = cleanMeasurement(g, x0, p, rng);
        if (!detectBad(g, z)) return z;
    }
    throw GenerationStall("synthesizeFdiaDataset: cannot draw a detector-passing base");
}

}  // namespace

FdiaData synthesizeFdiaDataset(const GridSystem& gridIn, const FdiaSynthParams& p,
                               const IndexList& c, std::uint64_t seed) {
    GridSystem g = gridIn;
    validateGrid(g);
    FdiaData out;

    auto rngX0 = streamRng(seed, 0);
    std::uniform_real_distribution<double> stateDist(-5.0, 5.0);
    out.operatingPoint.resize(g.states());
    for (Eigen::Index i = 0; i < g.states(); ++i) out.operatingPoint(i) = stateDist(rngX0);
    // Gaussian c gives naturally chi-distributed injection norms; sigmaC
    // pins their rms at attackFactor times the nominal measurement norm.
    const double attackNorm = p.attackFactor * (g.h * out.operatingPoint).norm();
    const double sigmaC = attackNorm / g.h.norm();

    // Threshold before anything that rejects on it.
    {
        auto rng = streamRng(seed, 4);
        Matrix calib(p.calibrationCount, g.branches());
        for (Eigen::Index i = 0; i < calib.rows(); ++i) {
            calib.row(i) = cleanMeasurement(g, out.operatingPoint, p, rng).transpose();
        }
        g.tau = calibrateTau(g, calib);
        out.tau = g.tau;
    }

    auto makeTrainSplit = [&](std::uint64_t stream) {
        auto rng = streamRng(seed, stream);
        nn::LabeledDataset d;
        d.features.resize(p.trainCount, g.branches());
        d.labels.resize(static_cast<size_t>(p.trainCount));
        for (int i = 0; i < p.trainCount; ++i) {
            const bool attackLabel = (i % 2) == 1;
            Vector z = attackLabel ? stealthyBase(g, out.operatingPoint, p, rng)
                                   : cleanMeasurement(g, out.operatingPoint, p, rng);
            if (attackLabel) {
                z += g.h * gaussian(rng, g.states(), sigmaC);
            }
            d.features.row(i) = z.transpose();
            d.labels[static_cast<size_t>(i)] = attackLabel ? 1 : 0;
        }
        return d;
    };
    out.defender = makeTrainSplit(1);
    out.attacker = makeTrainSplit(2);

    // Test vectors: FDIA restricted to the compromised branches, built from
    // the null-space basis of B[:,C] with the same rms injection norm.
    const ConstraintSet cs = fdiaConstraint(g, c);
    const Matrix basis = linalg::dependency(cs.phi).nullBasis();
    const double sigmaT = attackNorm / basis.norm();
    {
        auto rng = streamRng(seed, 3);
        out.testPolluted.resize(p.testCount, g.branches());
        out.testClean.resize(p.testCount, g.branches());
        for (int i = 0; i < p.testCount; ++i) {
            const Vector z = stealthyBase(g, out.operatingPoint, p, rng);
            Vector aC;
            do {
                aC = basis * gaussian(rng, basis.cols(), sigmaT);
            } while (aC.norm() < 1e-12);
            Vector a = Vector::Zero(g.branches());
            scatterInto(a, c, aC);
            out.testClean.row(i) = z.transpose();
            out.testPolluted.row(i) = (z + a).transpose();
        }
    }
    return out;
}

}  // namespace physadv::power
