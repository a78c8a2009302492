#pragma once

#include <cstdint>
#include <string>

#include "physadv/constraints.hpp"
#include "physadv/nn.hpp"

namespace physadv::power {

// DC measurement model z = Hx + e with a residual-based bad data detector.
struct GridSystem {
    Matrix h;         // branches x states, full column rank
    Matrix w;         // diagonal meter weights
    double tau = 0.0; // residual threshold, measurement units

    Eigen::Index branches() const { return h.rows(); }
    Eigen::Index states() const { return h.cols(); }
};

// Deterministic 12-branch / 6-state system with incidence-style {-1,0,1}
// rows; stands in for a full-size grid matrix, which can still be imported
// from CSV.
GridSystem bundledGrid();

GridSystem loadGrid(const std::string& path);
void saveGrid(const std::string& path, const GridSystem& g);

// Weighted least squares state estimate.
Vector estimateState(const GridSystem& g, const Vector& z);

// ||z - H x_hat||_2
double residualNorm(const GridSystem& g, const Vector& z);

bool detectBad(const GridSystem& g, const Vector& z);

// Residual threshold from a clean calibration set (quantile of residuals).
double calibrateTau(const GridSystem& g, const Matrix& cleanSamples, double quantile = 0.99);

// B = H (H^T H)^-1 H^T - I; satisfies B H = 0 and B^2 = -B. Any injection
// a with B a = 0 leaves the estimation residual unchanged.
Matrix fdiaB(const GridSystem& g);

// a = H c, the classic residual-stealthy injection.
Vector makeFdiaVector(const GridSystem& g, const Vector& c);

// Equality constraint over the compromised columns of B: a perturbation v
// supported on C keeps FDIA stealth iff B[:,C] v_C = 0.
ConstraintSet fdiaConstraint(const GridSystem& g, const IndexList& c);

struct FdiaSynthParams {
    int trainCount = 3000;      // records per training dataset, half polluted
    int testCount = 200;        // FDIA-only test vectors, injection restricted to C
    int calibrationCount = 500; // clean records used to set tau
    double stateSigma = 0.1;    // state fluctuation around the operating point
    double noiseSigma = 0.02;   // meter noise
    double attackFactor = 0.3;  // ||a|| relative to ||H x0||
};

struct FdiaData {
    nn::LabeledDataset defender;
    nn::LabeledDataset attacker;
    Matrix testPolluted;   // rows z + a with supp(a) in C, all label 1
    Matrix testClean;      // matching clean z rows
    Vector operatingPoint; // x0
    double tau = 0.0;      // calibrated threshold used during synthesis
};

// Defender/attacker/test splits from split seed streams. Every polluted
// record carries a = Hc and passes the residual detector exactly when its
// clean base does; test-set bases are rejection sampled to pass.
FdiaData synthesizeFdiaDataset(const GridSystem& g, const FdiaSynthParams& p,
                               const IndexList& c, std::uint64_t seed);

}  // namespace physadv::power
