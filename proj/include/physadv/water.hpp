#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "physadv/constraints.hpp"
#include "physadv/nn.hpp"

namespace physadv::water {

inline constexpr Eigen::Index kFeatureCount = 25;
inline constexpr Eigen::Index kFitCount = 7;

struct FeatureProfile {
    const char* name;
    double mean;
    double sigma;
};

// The 25 analog sensor channels; means/sigmas drive synthetic generation.
const std::array<FeatureProfile, kFeatureCount>& featureProfiles();

// Positions of the constrained flow meters within the 25-feature vector, in
// constraint-column order (FIT201, FIT301, FIT401, FIT501, FIT502, FIT503,
// FIT504).
const IndexList& fitColumns();

// Comma-separated feature names followed by "label"; used as dataset header.
std::string datasetHeader();

// The published 5x7 flow-meter inequality system over the 7 FIT sensors.
ConstraintSet swatConstraints();

// Row/column subset for the 2-, 5-, or 7-sensor compromise case.
ConstraintSet scenarioConstraints(int caseId);

// Positions (within the 25-feature vector) compromised in the given case.
IndexList scenarioFitPositions(int caseId);

struct WaterSynthParams {
    int trainCount = 6000;   // records per training dataset, half polluted
    int testCount = 200;     // constraint-satisfying anomalies
    double noiseScale = 0.1; // anomaly noise as a fraction of feature mean
    int retryBudget = 2000;  // rejection attempts per record
};

struct WaterData {
    nn::LabeledDataset defender;
    nn::LabeledDataset attacker;
    Matrix testPolluted;  // anomalies on the case FITs, all constraints met
    Matrix testClean;     // matching normal bases
};

WaterData synthesizeWaterDataset(const WaterSynthParams& p, int caseId, std::uint64_t seed);

}  // namespace physadv::water
