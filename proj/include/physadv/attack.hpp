#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "physadv/constraints.hpp"
#include "physadv/nn.hpp"

namespace physadv::attack {

// The search algorithms only need loss gradients and class decisions, so
// they run against this adapter. The harness decides which network plays
// which role per scenario; tests can plug in analytic losses.
struct AttackModel {
    std::function<Vector(const Vector&, int label)> lossGradient;
    std::function<int(const Vector&)> predict;
};

AttackModel makeAttackModel(const nn::Network& net);

struct AttackConfig {
    int step = 40;               // search steps per best-effort call
    double size = 1.0;           // largest single-step change of one measurement
    double lambdaThreshold = 0.1;
    int maxItera = 10;           // outer bound of the universal search
    int sampleCount = 5;         // N sampled uncompromised hypotheses
    std::uint64_t seed = 0;

    void validate() const;
};

struct SearchResult {
    Vector v;             // accumulated perturbation, zero outside C
    int stepsUsed = 0;
    bool evaded = false;  // model misclassifies m + v
};

struct AttackResult {
    MeasurementVector adversarial;  // M* = M + perturbation
    Vector perturbation;            // zero outside C
    bool succeeded = false;
    int stepsUsed = 0;
    double elapsedMs = 0.0;
};

// Pure cores, exposed for direct testing against hand-computed gradients.
//
// maskedStep: zero g at u, then scale so the largest magnitude entry moves
// by exactly `size`. An all-zero gradient yields a zero step.
Vector maskedStep(Vector g, const IndexList& u, double size);
// constrainStep: rebuild the dependent entries of g restricted to C from
// the independent ones via the dependency of cs.phi, write them back, and
// scale as maskedStep. Entries outside C are ignored and come out zero.
// The result r satisfies cs.phi * r_C = 0.
Vector constrainStep(const Vector& g, const ConstraintSet& cs, double size);

// Gradient step that leaves the uncompromised entries untouched.
Vector freeStep(const AttackModel& model, const IndexList& u, const Vector& m,
                double size, int label);

// Single equality-constrained attack step at m.
Vector eqOneStep(const AttackModel& model, const Vector& m, double size,
                 const ConstraintSet& cs, int label);

// Best-effort search under an equality constraint: accumulates eqOneStep
// perturbations starting from delta and returns as soon as the model
// misclassifies m + v. The returned v always satisfies cs.
SearchResult searchEquality(const Vector& delta, const AttackModel& model, const Vector& m,
                            int step, double size, const ConstraintSet& cs, int label);

// Best-effort search under inequality constraints, tracking a probing
// pioneer point and the last feasible point. Violated rows become a
// temporary homogeneous equality system parallel to the active boundary;
// reaching a fresh feasible point clears it. Returns the last feasible v.
SearchResult searchInequality(const Vector& delta, const AttackModel& model,
                              const IndexList& u, const Vector& m, int step, double size,
                              const ConstraintSet& cs, int label);

// Fraction of the spliced sample set still classified as `label` after
// adding delta.
double sampleSetAccuracy(const AttackModel& model, int label,
                         const std::vector<Vector>& muc, const Vector& delta);

// Universal search over sampled uncompromised hypotheses: grows one delta
// across all spliced vectors until their classification accuracy drops
// below lambda or maxItera passes are spent. The returned adversarial
// vector is the attacker's true measurement plus that delta.
AttackResult universalSearch(const AttackModel& model, const std::vector<Vector>& mu,
                             const MeasurementVector& m, double lambda, int label,
                             int maxItera, const ConstraintSet& cs, const AttackConfig& cfg);

// Unconstrained white-box baseline: iterated raw-gradient steps over all
// features, stopping early on misclassification.
AttackResult supremeAttack(const AttackModel& model, const Vector& m, int label,
                           int step, double size);

}  // namespace physadv::attack
