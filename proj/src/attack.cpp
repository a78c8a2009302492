#include "physadv/attack.hpp"

#include <chrono>

namespace physadv::attack {

namespace {

using Clock = std::chrono::steady_clock;

double msSince(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

AttackModel makeAttackModel(const nn::Network& net) {
    AttackModel m;
    m.lossGradient = [&net](const Vector& x, int label) {
        return nn::inputGradient(net, x, nn::oneHot(label, net.outputDim()));
    };
    m.predict = [&net](const Vector& x) { return nn::predictLabel(net, x); };
    return m;
}

void AttackConfig::validate() const {
    if (step < 1) throw Error("AttackConfig: step must be at least 1");
    if (!(size > 0.0)) throw Error("AttackConfig: size must be positive");
    if (!(lambdaThreshold > 0.0) || lambdaThreshold > 1.0) {
        throw Error("AttackConfig: lambda must be in (0,1]");
    }
    if (maxItera < 1) throw Error("AttackConfig: maxItera must be at least 1");
    if (sampleCount < 1) throw Error("AttackConfig: sampleCount must be at least 1");
}

Vector maskedStep(Vector g, const IndexList& u, double size) {
    for (auto i : u) {
        if (i < 0 || i >= g.size()) {
            throw IndexOutOfBounds("maskedStep: mask index out of range");
        }
        g(i) = 0.0;
    }
    const double gmax = g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    if (gmax <= 0.0) {
        return Vector::Zero(g.size());  // flat loss: zero step
    }
    return (size / gmax) * g;
}

Vector constrainStep(const Vector& g, const ConstraintSet& cs, double size) {
    Vector gc = subvector(g, cs.compromised);
    const auto dep = linalg::dependency(cs.phi);
    const Vector gI = subvector(gc, dep.independent);
    for (size_t k = 0; k < dep.dependent.size(); ++k) {
        gc(dep.dependent[k]) = dep.dependency.row(static_cast<Eigen::Index>(k)).dot(gI);
    }
    const double gmax = gc.size() > 0 ? gc.cwiseAbs().maxCoeff() : 0.0;
    Vector r = Vector::Zero(g.size());
    if (gmax <= 0.0) {
        return r;
    }
    scatterInto(r, cs.compromised, (size / gmax) * gc);
    return r;
}

Vector freeStep(const AttackModel& model, const IndexList& u, const Vector& m,
                double size, int label) {
    return maskedStep(model.lossGradient(m, label), u, size);
}

Vector eqOneStep(const AttackModel& model, const Vector& m, double size,
                 const ConstraintSet& cs, int label) {
    if (cs.kind != ConstraintKind::Equality) {
        throw Error("eqOneStep: equality constraint required");
    }
    return constrainStep(model.lossGradient(m, label), cs, size);
}

SearchResult searchEquality(const Vector& delta, const AttackModel& model, const Vector& m,
                            int step, double size, const ConstraintSet& cs, int label) {
    if (delta.size() != m.size()) {
        throw DimensionMismatch("searchEquality: delta/m size mismatch");
    }
    if (!validatePerturbation(cs, subvector(delta, cs.compromised))) {
        throw Error("searchEquality: starting delta violates the constraint");
    }
    SearchResult out;
    out.v = delta;
    for (int stepNum = 0; stepNum <= step - 1; ++stepNum) {
        if (model.predict(m + out.v) != label) {
            out.evaded = true;
            return out;
        }
        out.v += eqOneStep(model, m + out.v, size, cs, label);
        ++out.stepsUsed;
    }
    out.evaded = model.predict(m + out.v) != label;
    return out;
}

SearchResult searchInequality(const Vector& delta, const AttackModel& model,
                              const IndexList& u, const Vector& m, int step, double size,
                              const ConstraintSet& cs, int label) {
    if (cs.kind != ConstraintKind::Inequality) {
        throw Error("searchInequality: inequality constraint required");
    }
    if (delta.size() != m.size()) {
        throw DimensionMismatch("searchInequality: delta/m size mismatch");
    }
    SearchResult out;
    Vector pioneer = delta;
    Vector valid = pioneer;
    IndexList violated;
    for (int stepNum = 0; stepNum <= step - 1; ++stepNum) {
        if (model.predict(m + valid) != label) {
            break;
        }
        const IndexList chk =
            violatedInequalities(cs, subvector(m + pioneer, cs.compromised));
        if (chk.empty()) {
            valid = pioneer;
            const Vector r = freeStep(model, u, m + valid, size, label);
            pioneer = valid + r;
            violated.clear();
        } else {
            violated.insert(violated.end(), chk.begin(), chk.end());
            const ConstraintSet active = rowSubset(cs, violated);
            Vector r;
            try {
                r = eqOneStep(model, m + valid, size, active, label);
            } catch (const DegenerateConstraint&) {
                break;  // active set pins every compromised coordinate
            } catch (const EmptyConstraint&) {
                break;  // violated rows are identically zero; nothing can fix them
            }
            pioneer = valid + r;
        }
        ++out.stepsUsed;
    }
    out.v = valid;
    out.evaded = model.predict(m + out.v) != label;
    return out;
}

double sampleSetAccuracy(const AttackModel& model, int label,
                         const std::vector<Vector>& muc, const Vector& delta) {
    if (muc.empty()) {
        throw EmptyDataset("sampleSetAccuracy: empty sample set");
    }
    int hits = 0;
    for (const auto& mi : muc) {
        if (model.predict(mi + delta) == label) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(muc.size());
}

AttackResult universalSearch(const AttackModel& model, const std::vector<Vector>& mu,
                             const MeasurementVector& m, double lambda, int label,
                             int maxItera, const ConstraintSet& cs, const AttackConfig& cfg) {
    if (mu.empty()) {
        throw EmptyDataset("universalSearch: no sampled uncompromised vectors");
    }
    m.validate();
    const auto t0 = Clock::now();
    const Vector mC = subvector(m.values, m.compromised);

    std::vector<Vector> muc;
    muc.reserve(mu.size());
    for (const auto& sample : mu) {
        if (sample.size() != m.values.size()) {
            throw DimensionMismatch("universalSearch: sampled vector size mismatch");
        }
        Vector spliced = sample;
        scatterInto(spliced, m.compromised, mC);
        muc.push_back(std::move(spliced));
    }

    AttackResult out;
    Vector delta = Vector::Zero(m.values.size());
    int cycNum = 0;
    bool success = false;
    while (cycNum < maxItera && !success) {
        for (const auto& spliced : muc) {
            SearchResult sr;
            if (cs.kind == ConstraintKind::Equality) {
                sr = searchEquality(delta, model, spliced, cfg.step, cfg.size, cs, label);
            } else {
                sr = searchInequality(delta, model, m.uncompromised, spliced, cfg.step,
                                      cfg.size, cs, label);
            }
            delta = sr.v;
            out.stepsUsed += sr.stepsUsed;
            if (sampleSetAccuracy(model, label, muc, delta) < lambda) {
                success = true;
                break;
            }
        }
        ++cycNum;
    }

    out.perturbation = delta;
    out.adversarial = MeasurementVector{m.values + delta, m.compromised, m.uncompromised};
    out.succeeded = success;
    out.elapsedMs = msSince(t0);
    return out;
}

AttackResult supremeAttack(const AttackModel& model, const Vector& m, int label,
                           int step, double size) {
    const auto t0 = Clock::now();
    AttackResult out;
    Vector pert = Vector::Zero(m.size());
    for (int i = 0; i < step; ++i) {
        if (model.predict(m + pert) != label) {
            break;
        }
        const Vector g = model.lossGradient(m + pert, label);
        const double gmax = g.cwiseAbs().maxCoeff();
        if (gmax <= 0.0) {
            break;
        }
        pert += (size / gmax) * g;
        ++out.stepsUsed;
    }
    out.perturbation = pert;
    IndexList all(static_cast<size_t>(m.size()));
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
    out.adversarial = MeasurementVector{m + pert, all, {}};
    out.succeeded = model.predict(m + pert) != label;
    out.elapsedMs = msSince(t0);
    return out;
}

}  // namespace physadv::attack
