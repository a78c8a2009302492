#include "physadv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace physadv::harness {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

std::uint64_t subSeed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 over seed xor tag keeps the streams well separated
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 streamRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t sub = 0) {
    std::mt19937_64 rng(subSeed(subSeed(seed, tag), sub));
    return rng;
}

nn::NetworkSpec denseSpec(Eigen::Index inputDim, std::uint64_t seed,
                          std::vector<nn::LayerSpec> layers) {
    nn::NetworkSpec spec;
    spec.inputDim = inputDim;
    spec.layers = std::move(layers);
    spec.seed = seed;
    return spec;
}

using nn::Activation;

nn::NetworkSpec defenderSpec(Domain domain, Eigen::Index inputDim, std::uint64_t seed) {
    if (domain == Domain::Power) {
        return denseSpec(inputDim, seed,
                         {{32, Activation::Relu, 0.0},
                          {48, Activation::Relu, 0.0},
                          {56, Activation::Relu, 0.0},
                          {48, Activation::Relu, 0.0},
                          {32, Activation::Relu, 0.25},
                          {16, Activation::Relu, 0.25},
                          {2, Activation::Softmax, 0.0}});
    }
    return denseSpec(inputDim, seed,
                     {{20, Activation::Relu, 0.0},
                      {40, Activation::Relu, 0.0},
                      {30, Activation::Relu, 0.25},
                      {20, Activation::Relu, 0.25},
                      {2, Activation::Softmax, 0.0}});
}

nn::NetworkSpec surrogateSpec(Domain domain, Eigen::Index inputDim, std::uint64_t seed) {
    if (domain == Domain::Power) {
        return denseSpec(inputDim, seed,
                         {{30, Activation::Relu, 0.0},
                          {40, Activation::Relu, 0.0},
                          {30, Activation::Relu, 0.25},
                          {20, Activation::Relu, 0.25},
                          {2, Activation::Softmax, 0.0}});
    }
    return denseSpec(inputDim, seed,
                     {{24, Activation::Relu, 0.0},
                      {32, Activation::Relu, 0.0},
                      {32, Activation::Relu, 0.0},
                      {16, Activation::Relu, 0.0},
                      {2, Activation::Softmax, 0.0}});
}

struct TrainedPair {
    nn::Network net;
    double heldOutAcc = 0.0;
};

// 75/25 train/held-out split; construction interleaves the labels, so a
// contiguous split stays balanced.
std::pair<nn::LabeledDataset, nn::LabeledDataset> splitTrainHeld(const nn::LabeledDataset& data) {
    const Eigen::Index n = data.size();
    const Eigen::Index trainN = (n * 3) / 4;
    nn::LabeledDataset train{data.features.topRows(trainN),
                             {data.labels.begin(), data.labels.begin() + trainN}};
    nn::LabeledDataset held{data.features.bottomRows(n - trainN),
                            {data.labels.begin() + trainN, data.labels.end()}};
    return {std::move(train), std::move(held)};
}

TrainedPair trainOnSplit(const nn::LabeledDataset& data, const nn::NetworkSpec& spec,
                         const TrainingParams& tp, std::uint64_t trainSeed, bool standardize,
                         const std::string& pretrainedPath) {
    auto [train, held] = splitTrainHeld(data);

    nn::Network net;
    bool loaded = false;
    if (!pretrainedPath.empty()) {
        std::ifstream probe(pretrainedPath);
        if (probe) {
            net = nn::loadNetwork(pretrainedPath);
            loaded = true;
        }
    }
    if (!loaded) {
        net = nn::buildNetwork(spec);
        if (standardize) {
            net.scaler = nn::fitScaler(train.features);
        }
        nn::TrainConfig cfg;
        cfg.learningRate = tp.learningRate;
        cfg.batchSize = tp.batchSize;
        cfg.epochs = tp.epochs;
        cfg.patience = tp.patience;
        cfg.seed = trainSeed;
        net = nn::trainSgd(std::move(net), train, cfg);
    }
    const double heldOutAcc = nn::classAccuracy(net, held);
    return {std::move(net), heldOutAcc};
}

std::string modelPath(const ScenarioConfig& cfg, std::uint64_t seed, const char* role) {
    if (cfg.modelsDir.empty()) return {};
    return cfg.modelsDir + "/" + domainName(cfg.domain) + "_case" + std::to_string(cfg.caseSize) +
           "_seed" + std::to_string(seed) + "_" + role + ".json";
}

Matrix normalRows(const nn::LabeledDataset& data) {
    Eigen::Index count = 0;
    for (int l : data.labels) count += (l == 0);
    Matrix out(count, data.features.cols());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (data.labels[static_cast<size_t>(i)] == 0) {
            out.row(k++) = data.features.row(i);
        }
    }
    return out;
}

IndexList drawCompromised(Eigen::Index dim, int count, std::mt19937_64& rng) {
    std::vector<Eigen::Index> pool(static_cast<size_t>(dim));
    for (size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<Eigen::Index>(i);
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i), pool.size() - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[pick(rng)]);
    }
    IndexList c(pool.begin(), pool.begin() + count);
    std::sort(c.begin(), c.end());
    return c;
}

// Mean per-feature standard deviation of the clean rows; anchors the power
// step size the way the published sweeps anchor theirs to the grid's
// measurement spread.
double measurementSpread(const Matrix& rows) {
    const Vector mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - mean.transpose();
    const Vector var = centered.array().square().colwise().mean();
    return var.cwiseSqrt().mean();
}

}  // namespace

std::string domainName(Domain d) {
    return d == Domain::Power ? "power" : "water";
}

std::string scenarioName(Scenario s) {
    switch (s) {
        case Scenario::WhiteBox: return "white-box";
        case Scenario::GrayBox1: return "gray-box1";
        case Scenario::GrayBox2: return "gray-box2";
        case Scenario::BlackBox: return "black-box";
        case Scenario::Supreme: return "supreme";
    }
    throw Error("scenarioName: unknown scenario");
}

Domain domainFromString(const std::string& s) {
    if (s == "power") return Domain::Power;
    if (s == "water") return Domain::Water;
    throw Error("unknown domain: " + s);
}

Scenario scenarioFromString(const std::string& s) {
    if (s == "white-box") return Scenario::WhiteBox;
    if (s == "gray-box1") return Scenario::GrayBox1;
    if (s == "gray-box2") return Scenario::GrayBox2;
    if (s == "black-box") return Scenario::BlackBox;
    if (s == "supreme") return Scenario::Supreme;
    throw Error("unknown scenario: " + s);
}

IndexList powerCompromisedForSeed(const power::GridSystem& g, int caseSize, std::uint64_t seed) {
    if (caseSize < 1 || caseSize > static_cast<int>(g.branches())) {
        throw InvalidCase("powerCompromisedForSeed: case size out of range");
    }
    auto rng = streamRng(seed, 10);
    return drawCompromised(g.branches(), caseSize, rng);
}

World buildWorld(const ScenarioConfig& cfg, std::uint64_t seed) {
    World w;
    w.domain = cfg.domain;
    w.caseSize = cfg.caseSize;
    w.seed = seed;

    if (cfg.domain == Domain::Power) {
        w.grid = power::bundledGrid();
        w.compromised = powerCompromisedForSeed(w.grid, cfg.caseSize, seed);
        w.uncompromised = complementIndices(w.compromised, w.grid.branches());

        auto data = power::synthesizeFdiaDataset(w.grid, cfg.powerParams, w.compromised, seed);
        w.grid.tau = data.tau;
        w.cs = power::fdiaConstraint(w.grid, w.compromised);

        const auto def = trainOnSplit(data.defender,
                                      defenderSpec(cfg.domain, w.grid.branches(), subSeed(seed, 20)),
                                      cfg.training, subSeed(seed, 22), false,
                                      modelPath(cfg, seed, "defender"));
        const auto att = trainOnSplit(data.attacker,
                                      surrogateSpec(cfg.domain, w.grid.branches(), subSeed(seed, 21)),
                                      cfg.training, subSeed(seed, 23), false,
                                      modelPath(cfg, seed, "attacker"));
        w.defender = def.net;
        w.attacker = att.net;
        w.defenderCleanAcc = def.heldOutAcc;
        w.attackerCleanAcc = att.heldOutAcc;
        w.testPolluted = std::move(data.testPolluted);
        w.testClean = std::move(data.testClean);
        w.attackerNormals = normalRows(data.attacker);

        w.resolvedStep = cfg.attack.step > 0 ? cfg.attack.step : 40;
        if (cfg.attack.size > 0.0) {
            w.resolvedSize = cfg.attack.size;
        } else {
            // Published sweeps use size 20 on a grid whose flows spread about
            // 40 units; keep the same ratio against this grid's spread.
            w.resolvedSize = (20.0 / 40.0) * measurementSpread(normalRows(data.defender));
        }
    } else {
        w.cs = water::scenarioConstraints(cfg.caseSize);
        w.compromised = w.cs.compromised;
        w.uncompromised = complementIndices(w.compromised, water::kFeatureCount);

        auto data = water::synthesizeWaterDataset(cfg.waterParams, cfg.caseSize, seed);
        const auto def = trainOnSplit(data.defender,
                                      defenderSpec(cfg.domain, water::kFeatureCount, subSeed(seed, 20)),
                                      cfg.training, subSeed(seed, 22), true,
                                      modelPath(cfg, seed, "defender"));
        const auto att = trainOnSplit(data.attacker,
                                      surrogateSpec(cfg.domain, water::kFeatureCount, subSeed(seed, 21)),
                                      cfg.training, subSeed(seed, 23), true,
                                      modelPath(cfg, seed, "attacker"));
        w.defender = def.net;
        w.attacker = att.net;
        w.defenderCleanAcc = def.heldOutAcc;
        w.attackerCleanAcc = att.heldOutAcc;
        w.testPolluted = std::move(data.testPolluted);
        w.testClean = std::move(data.testClean);
        w.attackerNormals = normalRows(data.attacker);

        w.resolvedStep = cfg.attack.step > 0 ? cfg.attack.step : 50;
        w.resolvedSize = cfg.attack.size > 0.0 ? cfg.attack.size : 0.06;
    }
    return w;
}

std::shared_ptr<const World> WorldCache::get(const ScenarioConfig& cfg, std::uint64_t seed) {
    std::ostringstream key;
    key << domainName(cfg.domain) << '|' << cfg.caseSize << '|' << seed << '|'
        << cfg.training.learningRate << '|' << cfg.training.batchSize << '|'
        << cfg.training.epochs << '|' << cfg.training.patience << '|'
        << cfg.powerParams.trainCount << '|' << cfg.powerParams.testCount << '|'
        << cfg.powerParams.stateSigma << '|' << cfg.powerParams.noiseSigma << '|'
        << cfg.powerParams.attackFactor << '|' << cfg.waterParams.trainCount << '|'
        << cfg.waterParams.testCount << '|' << cfg.waterParams.noiseScale << '|'
        << cfg.attack.step << '|' << cfg.attack.size << '|' << cfg.modelsDir;
    auto it = cache_.find(key.str());
    if (it != cache_.end()) {
        return it->second;
    }
    auto world = std::make_shared<const World>(buildWorld(cfg, seed));
    cache_.emplace(key.str(), world);
    return world;
}

namespace {

std::vector<Vector> sampleHypotheses(const World& w, int count, std::uint64_t seed,
                                     std::uint64_t sampleIndex) {
    if (w.attackerNormals.rows() == 0) {
        throw EmptyDataset("sampleHypotheses: attacker dataset has no normal rows");
    }
    auto rng = streamRng(seed, 30, sampleIndex);
    std::uniform_int_distribution<Eigen::Index> pick(0, w.attackerNormals.rows() - 1);
    std::vector<Vector> mu;
    mu.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        mu.push_back(w.attackerNormals.row(pick(rng)).transpose());
    }
    return mu;
}

SeedOutcome attackSeed(const ScenarioConfig& cfg, const World& w) {
    SeedOutcome out;
    out.seed = w.seed;
    out.compromised = w.compromised;
    out.defenderCleanAcc = w.defenderCleanAcc;
    out.attackerCleanAcc = w.attackerCleanAcc;
    out.resolvedSize = w.resolvedSize;
    out.examples = static_cast<int>(w.testPolluted.rows());

    const attack::AttackModel defModel = attack::makeAttackModel(w.defender);
    const attack::AttackModel attModel = attack::makeAttackModel(w.attacker);
    const bool surrogateDriven =
        cfg.scenario == Scenario::GrayBox1 || cfg.scenario == Scenario::BlackBox;
    const attack::AttackModel& gradModel = surrogateDriven ? attModel : defModel;

    attack::AttackConfig acfg = cfg.attack;
    acfg.step = w.resolvedStep;
    acfg.size = w.resolvedSize;
    acfg.validate();

    const bool equality = w.cs.kind == ConstraintKind::Equality;
    const int label = 1;  // every test vector is an injected anomaly

    int detected = 0;
    int preDetected = 0;
    double l2Sum = 0.0;
    double relSum = 0.0;
    double timeSum = 0.0;
    long stepSum = 0;

    for (Eigen::Index i = 0; i < w.testPolluted.rows(); ++i) {
        const Vector m = w.testPolluted.row(i).transpose();
        if (nn::predictLabel(w.defender, m) == label) {
            ++preDetected;
        }

        Vector adv;
        const auto t0 = Clock::now();
        switch (cfg.scenario) {
            case Scenario::Supreme: {
                const auto ar = attack::supremeAttack(gradModel, m, label, acfg.step, acfg.size);
                adv = ar.adversarial.values;
                stepSum += ar.stepsUsed;
                break;
            }
            case Scenario::WhiteBox:
            case Scenario::GrayBox1: {
                const Vector zero = Vector::Zero(m.size());
                const auto sr = equality
                    ? attack::searchEquality(zero, gradModel, m, acfg.step, acfg.size, w.cs, label)
                    : attack::searchInequality(zero, gradModel, w.uncompromised, m, acfg.step,
                                               acfg.size, w.cs, label);
                adv = m + sr.v;
                stepSum += sr.stepsUsed;
                break;
            }
            case Scenario::GrayBox2:
            case Scenario::BlackBox: {
                const auto mu = sampleHypotheses(w, acfg.sampleCount, w.seed,
                                                 static_cast<std::uint64_t>(i));
                const MeasurementVector mv{m, w.compromised, w.uncompromised};
                const auto ar = attack::universalSearch(gradModel, mu, mv, acfg.lambdaThreshold,
                                                        label, acfg.maxItera, w.cs, acfg);
                adv = ar.adversarial.values;
                stepSum += ar.stepsUsed;
                break;
            }
        }
        const double ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        timeSum += ms;
        if (ms > cfg.deadlineMs) {
            ++out.deadlineMisses;
        }

        if (cfg.scenario != Scenario::Supreme) {
            const Vector deltaC = subvector(adv - m, w.cs.compromised);
            if (equality) {
                if (!validatePerturbation(w.cs, deltaC)) {
                    ++out.constraintViolations;
                }
            } else if (!violatedInequalities(w.cs, subvector(adv, w.cs.compromised)).empty()) {
                ++out.constraintViolations;
            }
            if (cfg.domain == Domain::Power && power::detectBad(w.grid, adv)) {
                ++out.residualViolations;
            }
        }

        if (nn::predictLabel(w.defender, adv) == label) {
            ++detected;
        } else {
            ++out.evaded;
            const Vector clean = w.testClean.row(i).transpose();
            const double l2 = (adv - clean).norm();
            l2Sum += l2;
            relSum += l2 / std::max(clean.norm(), 1e-12);
        }
    }

    const double n = static_cast<double>(out.examples);
    out.detectionAccuracy = detected / n;
    out.preAttackDetection = preDetected / n;
    out.meanL2 = out.evaded > 0 ? l2Sum / out.evaded : 0.0;
    out.relativeL2 = out.evaded > 0 ? relSum / out.evaded : 0.0;
    out.meanStepsUsed = stepSum / n;
    out.meanTimeMs = timeSum / n;
    return out;
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) {
        throw EmptyDataset("median: no values");
    }
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ScenarioReport runScenario(const ScenarioConfig& cfg, WorldCache* cache) {
    if (cfg.seeds.empty()) {
        throw Error("runScenario: at least one seed required");
    }
    WorldCache local;
    WorldCache& worlds = cache ? *cache : local;

    ScenarioReport report;
    report.config = cfg;
    std::vector<double> acc, pre, defAcc, attAcc, l2, rel, times;
    for (const auto seed : cfg.seeds) {
        const auto world = worlds.get(cfg, seed);
        SeedOutcome outcome = attackSeed(cfg, *world);
        acc.push_back(outcome.detectionAccuracy);
        pre.push_back(outcome.preAttackDetection);
        defAcc.push_back(outcome.defenderCleanAcc);
        attAcc.push_back(outcome.attackerCleanAcc);
        l2.push_back(outcome.meanL2);
        rel.push_back(outcome.relativeL2);
        times.push_back(outcome.meanTimeMs);
        report.constraintViolations += outcome.constraintViolations;
        report.residualViolations += outcome.residualViolations;
        report.deadlineMisses += outcome.deadlineMisses;
        report.perSeed.push_back(std::move(outcome));
    }
    report.detectionAccuracy = median(acc);
    report.preAttackDetection = median(pre);
    report.defenderCleanAcc = median(defAcc);
    report.attackerCleanAcc = median(attAcc);
    report.meanL2 = median(l2);
    report.relativeL2 = median(rel);
    report.medianTimeMs = median(times);
    return report;
}

std::vector<ScenarioReport> runLambdaSweep(const ScenarioConfig& cfg, WorldCache* cache) {
    if (cfg.lambdaGrid.empty()) {
        throw Error("runLambdaSweep: lambdaGrid is empty");
    }
    WorldCache local;
    WorldCache& worlds = cache ? *cache : local;
    std::vector<ScenarioReport> reports;
    for (const double lambda : cfg.lambdaGrid) {
        ScenarioConfig run = cfg;
        run.attack.lambdaThreshold = lambda;
        reports.push_back(runScenario(run, &worlds));
    }
    return reports;
}

json configToJson(const ScenarioConfig& cfg) {
    json j;
    j["domain"] = domainName(cfg.domain);
    j["scenario"] = scenarioName(cfg.scenario);
    j["case"] = cfg.caseSize;
    json a;
    a["step"] = cfg.attack.step;
    a["size"] = cfg.attack.size;
    a["lambda"] = cfg.attack.lambdaThreshold;
    a["maxItera"] = cfg.attack.maxItera;
    a["sampleCount"] = cfg.attack.sampleCount;
    j["attack"] = std::move(a);
    j["seeds"] = cfg.seeds;
    json t;
    t["learningRate"] = cfg.training.learningRate;
    t["batchSize"] = cfg.training.batchSize;
    t["epochs"] = cfg.training.epochs;
    t["patience"] = cfg.training.patience;
    j["training"] = std::move(t);
    json pw;
    pw["trainCount"] = cfg.powerParams.trainCount;
    pw["testCount"] = cfg.powerParams.testCount;
    pw["calibrationCount"] = cfg.powerParams.calibrationCount;
    pw["stateSigma"] = cfg.powerParams.stateSigma;
    pw["noiseSigma"] = cfg.powerParams.noiseSigma;
    pw["attackFactor"] = cfg.powerParams.attackFactor;
    j["power"] = std::move(pw);
    json wt;
    wt["trainCount"] = cfg.waterParams.trainCount;
    wt["testCount"] = cfg.waterParams.testCount;
    wt["noiseScale"] = cfg.waterParams.noiseScale;
    wt["retryBudget"] = cfg.waterParams.retryBudget;
    j["water"] = std::move(wt);
    j["deadlineMs"] = cfg.deadlineMs;
    if (!cfg.lambdaGrid.empty()) {
        j["lambdaGrid"] = cfg.lambdaGrid;
    }
    if (!cfg.modelsDir.empty()) {
        j["modelsDir"] = cfg.modelsDir;
    }
    return j;
}

ScenarioConfig configFromJson(const json& j) {
    ScenarioConfig cfg;
    if (j.contains("domain")) cfg.domain = domainFromString(j["domain"].get<std::string>());
    if (j.contains("scenario")) cfg.scenario = scenarioFromString(j["scenario"].get<std::string>());
    if (j.contains("case")) cfg.caseSize = j["case"].get<int>();
    if (j.contains("attack")) {
        const auto& a = j["attack"];
        if (a.contains("step")) cfg.attack.step = a["step"].get<int>();
        if (a.contains("size")) cfg.attack.size = a["size"].get<double>();
        if (a.contains("lambda")) cfg.attack.lambdaThreshold = a["lambda"].get<double>();
        if (a.contains("maxItera")) cfg.attack.maxItera = a["maxItera"].get<int>();
        if (a.contains("sampleCount")) cfg.attack.sampleCount = a["sampleCount"].get<int>();
    }
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("training")) {
        const auto& t = j["training"];
        if (t.contains("learningRate")) cfg.training.learningRate = t["learningRate"].get<double>();
        if (t.contains("batchSize")) cfg.training.batchSize = t["batchSize"].get<int>();
        if (t.contains("epochs")) cfg.training.epochs = t["epochs"].get<int>();
        if (t.contains("patience")) cfg.training.patience = t["patience"].get<int>();
    }
    if (j.contains("power")) {
        const auto& p = j["power"];
        if (p.contains("trainCount")) cfg.powerParams.trainCount = p["trainCount"].get<int>();
        if (p.contains("testCount")) cfg.powerParams.testCount = p["testCount"].get<int>();
        if (p.contains("calibrationCount")) cfg.powerParams.calibrationCount = p["calibrationCount"].get<int>();
        if (p.contains("stateSigma")) cfg.powerParams.stateSigma = p["stateSigma"].get<double>();
        if (p.contains("noiseSigma")) cfg.powerParams.noiseSigma = p["noiseSigma"].get<double>();
        if (p.contains("attackFactor")) cfg.powerParams.attackFactor = p["attackFactor"].get<double>();
    }
    if (j.contains("water")) {
        const auto& w = j["water"];
        if (w.contains("trainCount")) cfg.waterParams.trainCount = w["trainCount"].get<int>();
        if (w.contains("testCount")) cfg.waterParams.testCount = w["testCount"].get<int>();
        if (w.contains("noiseScale")) cfg.waterParams.noiseScale = w["noiseScale"].get<double>();
        if (w.contains("retryBudget")) cfg.waterParams.retryBudget = w["retryBudget"].get<int>();
    }
    if (j.contains("deadlineMs")) cfg.deadlineMs = j["deadlineMs"].get<double>();
    if (j.contains("lambdaGrid")) cfg.lambdaGrid = j["lambdaGrid"].get<std::vector<double>>();
    if (j.contains("modelsDir")) cfg.modelsDir = j["modelsDir"].get<std::string>();
    return cfg;
}

json reportToJson(const ScenarioReport& r) {
    json j;
    j["format"] = "physadv-report-v1";
    j["config"] = configToJson(r.config);
    json seeds = json::array();
    for (const auto& s : r.perSeed) {
        json sj;
        sj["seed"] = s.seed;
        sj["compromised"] = s.compromised;
        sj["examples"] = s.examples;
        sj["evaded"] = s.evaded;
        sj["detectionAccuracy"] = s.detectionAccuracy;
        sj["preAttackDetection"] = s.preAttackDetection;
        sj["defenderCleanAccuracy"] = s.defenderCleanAcc;
        sj["attackerCleanAccuracy"] = s.attackerCleanAcc;
        sj["meanL2"] = s.meanL2;
        sj["relativeL2"] = s.relativeL2;
        sj["meanStepsUsed"] = s.meanStepsUsed;
        sj["constraintViolations"] = s.constraintViolations;
        sj["residualViolations"] = s.residualViolations;
        sj["resolvedSize"] = s.resolvedSize;
        seeds.push_back(std::move(sj));
    }
    j["perSeed"] = std::move(seeds);
    json m;
    m["detectionAccuracy"] = r.detectionAccuracy;
    m["preAttackDetection"] = r.preAttackDetection;
    m["defenderCleanAccuracy"] = r.defenderCleanAcc;
    m["attackerCleanAccuracy"] = r.attackerCleanAcc;
    m["meanL2"] = r.meanL2;
    m["relativeL2"] = r.relativeL2;
    j["median"] = std::move(m);
    json totals;
    totals["constraintViolations"] = r.constraintViolations;
    totals["residualViolations"] = r.residualViolations;
    j["totals"] = std::move(totals);
    return j;
}

json timingToJson(const ScenarioReport& r) {
    json j;
    j["format"] = "physadv-timing-v1";
    json seeds = json::array();
    for (const auto& s : r.perSeed) {
        json sj;
        sj["seed"] = s.seed;
        sj["meanTimeMs"] = s.meanTimeMs;
        sj["deadlineMisses"] = s.deadlineMisses;
        seeds.push_back(std::move(sj));
    }
    j["perSeed"] = std::move(seeds);
    j["medianMeanTimeMs"] = r.medianTimeMs;
    j["deadlineMisses"] = r.deadlineMisses;
    return j;
}

std::string reportCsvHeader() {
    return "domain,scenario,case,lambda,seed,detection_accuracy,pre_attack_detection,"
           "defender_clean_acc,attacker_clean_acc,mean_l2,relative_l2,evaded,examples,"
           "constraint_violations,residual_violations,mean_steps\n";
}

std::string reportCsvRows(const ScenarioReport& r) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& s : r.perSeed) {
        out << domainName(r.config.domain) << ',' << scenarioName(r.config.scenario) << ','
            << r.config.caseSize << ',' << r.config.attack.lambdaThreshold << ',' << s.seed << ','
            << s.detectionAccuracy << ',' << s.preAttackDetection << ',' << s.defenderCleanAcc
            << ',' << s.attackerCleanAcc << ',' << s.meanL2 << ',' << s.relativeL2 << ','
            << s.evaded << ',' << s.examples << ',' << s.constraintViolations << ','
            << s.residualViolations << ',' << s.meanStepsUsed << '\n';
    }
    return out.str();
}

void writeReportFiles(const std::string& stem, const ScenarioReport& r) {
    {
        std::ofstream out(stem + ".json");
        if (!out) throw MalformedFile("writeReportFiles: cannot open " + stem + ".json");
        out << reportToJson(r).dump(1) << '\n';
    }
    {
        std::ofstream out(stem + ".csv");
        if (!out) throw MalformedFile("writeReportFiles: cannot open " + stem + ".csv");
        out << reportCsvHeader() << reportCsvRows(r);
    }
    {
        std::ofstream out(stem + ".timing.json");
        if (!out) throw MalformedFile("writeReportFiles: cannot open " + stem + ".timing.json");
        out << timingToJson(r).dump(1) << '\n';
    }
}

std::string renderTable(const std::vector<ScenarioReport>& reports) {
    std::ostringstream out;
    out << "Attack      Case  Lambda  Accu     PreAccu  L2-Norm    RelL2    CViol  Time(ms)\n";
    out << "---------------------------------------------------------------------------------\n";
    char line[256];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%-11s %-5d %-7.2f %-8.4f %-8.4f %-10.4f %-8.4f %-6d %-8.2f\n",
                      scenarioName(r.config.scenario).c_str(), r.config.caseSize,
                      r.config.attack.lambdaThreshold, r.detectionAccuracy, r.preAttackDetection,
                      r.meanL2, r.relativeL2, r.constraintViolations, r.medianTimeMs);
        out << line;
    }
    return out.str();
}

}  // namespace physadv::harness
