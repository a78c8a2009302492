#include "physadv/water.hpp"

#include <random>

namespace physadv::water {

namespace {

// Indices into the 25-feature vector.
enum Feature : Eigen::Index {
    FIT101 = 0, LIT101, AIT201, AIT202, AIT203, FIT201, DPIT301, FIT301, LIT301,
    AIT401, AIT402, FIT401, LIT401, AIT501, AIT502, AIT503, AIT504, FIT501,
    FIT502, FIT503, FIT504, PIT501, PIT502, PIT503, FIT601
};

constexpr double kEps1 = 0.0403;
constexpr double kEps2 = 0.153;

std::mt19937_64 streamRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

const std::array<FeatureProfile, kFeatureCount>& featureProfiles() {
    static const std::array<FeatureProfile, kFeatureCount> profiles = {{
        {"FIT101", 2.55, 0.06},
        {"LIT101", 820.0, 25.0},
        {"AIT201", 262.0, 4.0},
        {"AIT202", 8.4, 0.08},
        {"AIT203", 328.0, 6.0},
        {"FIT201", 2.45, 0.05},
        {"DPIT301", 22.0, 1.2},
        {"FIT301", 2.365, 0.05},  // generated as FIT201 minus a positive slack
        {"LIT301", 940.0, 20.0},
        {"AIT401", 148.0, 5.0},
        {"AIT402", 238.0, 4.0},
        {"FIT401", 1.70, 0.04},
        {"LIT401", 800.0, 18.0},
        {"AIT501", 7.9, 0.06},
        {"AIT502", 180.0, 4.0},
        {"AIT503", 260.0, 5.0},
        {"AIT504", 12.0, 0.8},
        {"FIT501", 1.70, 0.04},   // tied to FIT401 within eps1
        {"FIT502", 1.25, 0.03},
        {"FIT503", 0.90, 0.03},
        {"FIT504", 0.45, 0.04},   // balances FIT502+FIT503 against FIT501 within eps2
        {"PIT501", 250.0, 4.0},
        {"PIT502", 2.0, 0.15},
        {"PIT503", 190.0, 4.0},
        {"FIT601", 1.40, 0.03},
    }};
    return profiles;
}

const IndexList& fitColumns() {
    static const IndexList cols = {FIT201, FIT301, FIT401, FIT501, FIT502, FIT503, FIT504};
    return cols;
}

std::string datasetHeader() {
    std::string h;
    for (const auto& p : featureProfiles()) {
        h += p.name;
        h += ',';
    }
    h += "label";
    return h;
}

ConstraintSet swatConstraints() {
    ConstraintSet cs;
    cs.kind = ConstraintKind::Inequality;
    cs.phi.resize(5, 7);
    cs.phi << -1, 1,  0,  0,  0,  0,  0,
               0, 0,  1, -1,  0,  0,  0,
               0, 0, -1,  1,  0,  0,  0,
               0, 0,  0, -1,  1,  1, -1,
               0, 0,  0,  1, -1, -1,  1;
    cs.phiTilde.resize(5);
    cs.phiTilde << 0.0, kEps1, kEps1, kEps2, kEps2;
    cs.compromised = fitColumns();
    cs.validate(kFeatureCount);
    return cs;
}

IndexList scenarioFitPositions(int caseId) {
    switch (caseId) {
        case 2:
            return {FIT201, FIT301};
        case 5:
            return {FIT401, FIT501, FIT502, FIT503, FIT504};
        case 7:
            return fitColumns();
        default:
            throw InvalidCase("scenarioFitPositions: case must be 2, 5, or 7");
    }
}

ConstraintSet scenarioConstraints(int caseId) {
    const ConstraintSet full = swatConstraints();
    IndexList rows;
    IndexList cols;  // into the 7 constraint columns
    switch (caseId) {
        case 2:
            rows = {0};
            cols = {0, 1};
            break;
        case 5:
            rows = {1, 2, 3, 4};
            cols = {2, 3, 4, 5, 6};
            break;
        case 7:
            return full;
        default:
            throw InvalidCase("scenarioConstraints: case must be 2, 5, or 7");
    }
    ConstraintSet cs;
    cs.kind = ConstraintKind::Inequality;
    cs.phi.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    cs.phiTilde.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < cols.size(); ++j) {
            cs.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                full.phi(rows[i], cols[j]);
        }
        cs.phiTilde(static_cast<Eigen::Index>(i)) = full.phiTilde(rows[i]);
    }
    cs.compromised = scenarioFitPositions(caseId);
    cs.validate(kFeatureCount);
    return cs;
}

namespace {

// Structural draw that lands inside the published constraint region; the
// explicit check afterwards is the contract.
Vector normalRecord(std::mt19937_64& rng, const ConstraintSet& fullCs, int retryBudget) {
    const auto& profiles = featureProfiles();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> slack201(0.02, 0.15);
    std::uniform_real_distribution<double> slack401(-0.015, 0.015);
    std::uniform_real_distribution<double> slack504(-0.06, 0.06);

    for (int attempt = 0; attempt < std::max(1, retryBudget); ++attempt) {
        Vector v(kFeatureCount);
        for (Eigen::Index i = 0; i < kFeatureCount; ++i) {
            v(i) = profiles[static_cast<size_t>(i)].mean +
                   profiles[static_cast<size_t>(i)].sigma * gauss(rng);
        }
        v(FIT301) = v(FIT201) - slack201(rng);
        v(FIT501) = v(FIT401) + slack401(rng);
        v(FIT504) = v(FIT502) + v(FIT503) - v(FIT501) + slack504(rng);
        if (violatedInequalities(fullCs, subvector(v, fullCs.compromised)).empty()) {
            return v;
        }
    }
    throw GenerationStall("synthesizeWaterDataset: normal record rejection stalled");
}

}  // namespace

WaterData synthesizeWaterDataset(const WaterSynthParams& p, int caseId, std::uint64_t seed) {
    const ConstraintSet fullCs = swatConstraints();
    const IndexList caseFits = scenarioFitPositions(caseId);
    const auto& profiles = featureProfiles();
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto makeTrainSplit = [&](std::uint64_t stream) {
        auto rng = streamRng(seed, stream);
        nn::LabeledDataset d;
        d.features.resize(p.trainCount, kFeatureCount);
        d.labels.resize(static_cast<size_t>(p.trainCount));
        for (int i = 0; i < p.trainCount; ++i) {
            Vector v = normalRecord(rng, fullCs, p.retryBudget);
            const bool attackLabel = (i % 2) == 1;
            if (attackLabel) {
                // Training anomalies may violate the constraints; the models
                // are expected to flag obviously unphysical records too.
                for (auto col : fitColumns()) {
                    v(col) += p.noiseScale * profiles[static_cast<size_t>(col)].mean * gauss(rng);
                }
            }
            d.features.row(i) = v.transpose();
            d.labels[static_cast<size_t>(i)] = attackLabel ? 1 : 0;
        }
        return d;
    };

    WaterData out;
    out.defender = makeTrainSplit(1);
    out.attacker = makeTrainSplit(2);

    {
        auto rng = streamRng(seed, 3);
        out.testPolluted.resize(p.testCount, kFeatureCount);
        out.testClean.resize(p.testCount, kFeatureCount);
        for (int i = 0; i < p.testCount; ++i) {
            const Vector base = normalRecord(rng, fullCs, p.retryBudget);
            bool accepted = false;
            for (int attempt = 0; attempt < p.retryBudget; ++attempt) {
                Vector v = base;
                for (auto col : caseFits) {
                    v(col) += p.noiseScale * profiles[static_cast<size_t>(col)].mean * gauss(rng);
                }
                if (violatedInequalities(fullCs, subvector(v, fullCs.compromised)).empty()) {
                    out.testClean.row(i) = base.transpose();
                    out.testPolluted.row(i) = v.transpose();
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                throw GenerationStall("synthesizeWaterDataset: test record rejection stalled");
            }
        }
    }
    return out;
}

}  // namespace physadv::water
