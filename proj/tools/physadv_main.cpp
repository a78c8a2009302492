// Command line front end: dataset synthesis, model training, scenario
// attacks, lambda sweeps, and report rendering.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "physadv/harness.hpp"

namespace fs = std::filesystem;
using namespace physadv;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitInvariantBreach = 2;
constexpr int kExitDegenerateConstraint = 3;

std::string artifactStem(const harness::ScenarioConfig& cfg, std::uint64_t seed) {
    return harness::domainName(cfg.domain) + "_case" + std::to_string(cfg.caseSize) + "_seed" +
           std::to_string(seed);
}

std::vector<double> parseLambdaGrid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double lo = 0, hi = 0, step = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0) {
            throw Error("bad lambda range, expected lo:hi:step");
        }
        for (double v = lo; v <= hi + 1e-12; v += step) {
            grid.push_back(v);
        }
    } else {
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            grid.push_back(std::stod(cell));
        }
    }
    if (grid.empty()) {
        throw Error("empty lambda grid");
    }
    return grid;
}

struct CommonOpts {
    std::string domain = "power";
    int caseSize = -1;
    std::vector<std::uint64_t> seeds;
    std::string configPath;
};

void addCommon(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--domain", o.domain, "power or water");
    cmd->add_option("--case", o.caseSize, "compromised-set size (power 8/9/10, water 2/5/7)");
    cmd->add_option("--seed,--seeds", o.seeds, "run seeds");
    cmd->add_option("--config", o.configPath, "JSON config file (flags override)");
}

harness::ScenarioConfig resolveConfig(const CommonOpts& o) {
    harness::ScenarioConfig cfg;
    if (!o.configPath.empty()) {
        std::ifstream in(o.configPath);
        if (!in) throw Error("cannot open config " + o.configPath);
        json j;
        in >> j;
        cfg = harness::configFromJson(j);
    }
    cfg.domain = harness::domainFromString(o.domain);
    if (o.caseSize > 0) {
        cfg.caseSize = o.caseSize;
    } else if (o.configPath.empty()) {
        cfg.caseSize = cfg.domain == harness::Domain::Power ? 8 : 2;
    }
    if (!o.seeds.empty()) {
        cfg.seeds = o.seeds;
    }
    return cfg;
}

int runSynth(const harness::ScenarioConfig& cfg, const std::string& outDir) {
    fs::create_directories(outDir);
    for (const auto seed : cfg.seeds) {
        const std::string stem = outDir + "/" + artifactStem(cfg, seed);
        if (cfg.domain == harness::Domain::Power) {
            auto grid = power::bundledGrid();
            const auto compromised = harness::powerCompromisedForSeed(grid, cfg.caseSize, seed);
            auto data = power::synthesizeFdiaDataset(grid, cfg.powerParams, compromised, seed);
            grid.tau = data.tau;
            power::saveGrid(stem + "_H.csv", grid);
            saveConstraintSet(stem + "_constraint.csv", power::fdiaConstraint(grid, compromised));
            nn::LabeledDataset test{data.testPolluted,
                                    std::vector<int>(static_cast<size_t>(data.testPolluted.rows()), 1)};
            nn::saveDataset(stem + "_defender.csv", data.defender, "branch flow features, label last");
            nn::saveDataset(stem + "_attacker.csv", data.attacker, "branch flow features, label last");
            nn::saveDataset(stem + "_test.csv", test, "FDIA-only vectors, label last");
            linalg::saveCsv(stem + "_test_clean.csv", data.testClean);
            std::cout << "wrote " << stem << "_{defender,attacker,test}.csv (tau=" << data.tau
                      << ")\n";
        } else {
            auto data = water::synthesizeWaterDataset(cfg.waterParams, cfg.caseSize, seed);
            saveConstraintSet(outDir + "/water_case" + std::to_string(cfg.caseSize) + "_constraint.csv",
                              water::scenarioConstraints(cfg.caseSize));
            nn::saveDataset(stem + "_defender.csv", data.defender, water::datasetHeader());
            nn::saveDataset(stem + "_attacker.csv", data.attacker, water::datasetHeader());
            nn::LabeledDataset test{data.testPolluted,
                                    std::vector<int>(static_cast<size_t>(data.testPolluted.rows()), 1)};
            nn::saveDataset(stem + "_test.csv", test, water::datasetHeader());
            linalg::saveCsv(stem + "_test_clean.csv", data.testClean);
            std::cout << "wrote " << stem << "_{defender,attacker,test}.csv\n";
        }
    }
    return 0;
}

int runTrain(const harness::ScenarioConfig& cfg, const std::string& outDir) {
    fs::create_directories(outDir);
    for (const auto seed : cfg.seeds) {
        auto world = harness::buildWorld(cfg, seed);
        const std::string stem = outDir + "/" + artifactStem(cfg, seed);
        nn::saveNetwork(stem + "_defender.json", world.defender);
        nn::saveNetwork(stem + "_attacker.json", world.attacker);
        std::cout << artifactStem(cfg, seed) << ": defender test accuracy "
                  << world.defenderCleanAcc << ", attacker test accuracy "
                  << world.attackerCleanAcc << "\n";
    }
    return 0;
}

int finishReport(const harness::ScenarioReport& report, const std::string& outStem) {
    harness::writeReportFiles(outStem, report);
    std::cout << harness::renderTable({report});
    std::cout << "report written to " << outStem << ".json\n";
    if (report.constraintViolations > 0 || report.residualViolations > 0) {
        std::cerr << "invariant breach: " << report.constraintViolations
                  << " constraint violations, " << report.residualViolations
                  << " residual violations\n";
        return kExitInvariantBreach;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physically constrained adversarial example toolkit"};
    app.require_subcommand(1);

    CommonOpts synthOpts, trainOpts, attackOpts, sweepOpts;
    std::string synthOut = "data", trainOut = "models", attackOut = "report";
    std::string sweepOut = "sweep.csv";
    std::string scenarioName = "white-box";
    std::string sweepScenarioName = "black-box";
    std::string modelsDir;
    std::string lambdaText = "0.1:0.9:0.2";
    double lambdaOne = -1.0;
    int stepOverride = 0;
    double sizeOverride = 0.0;
    std::string reportIn, reportTiming;

    auto* synth = app.add_subcommand("synth", "synthesize datasets");
    addCommon(synth, synthOpts);
    synth->add_option("--out", synthOut, "output directory");

    auto* train = app.add_subcommand("train", "train defender and surrogate models");
    addCommon(train, trainOpts);
    train->add_option("--out", trainOut, "output directory");

    auto* atk = app.add_subcommand("attack", "run one scenario and write reports");
    addCommon(atk, attackOpts);
    atk->add_option("--scenario", scenarioName, "white-box|gray-box1|gray-box2|black-box|supreme");
    atk->add_option("--models", modelsDir, "directory of pretrained model JSON files");
    atk->add_option("--lambda", lambdaOne, "lambda threshold for the universal search");
    atk->add_option("--step", stepOverride, "search steps per best-effort call");
    atk->add_option("--size", sizeOverride, "largest single-step change");
    atk->add_option("--out", attackOut, "output stem for .json/.csv/.timing.json");

    auto* sweep = app.add_subcommand("sweep", "lambda sweep, tidy CSV output");
    addCommon(sweep, sweepOpts);
    sweep->add_option("--scenario", sweepScenarioName, "scenario to sweep");
    sweep->add_option("--lambda", lambdaText, "grid as lo:hi:step or comma list");
    sweep->add_option("--out", sweepOut, "output CSV path");

    auto* rep = app.add_subcommand("report", "render a saved report as a table");
    rep->add_option("--in", reportIn, "report JSON")->required();
    rep->add_option("--timing", reportTiming, "timing sidecar JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return runSynth(resolveConfig(synthOpts), synthOut);
        }
        if (train->parsed()) {
            return runTrain(resolveConfig(trainOpts), trainOut);
        }
        if (atk->parsed()) {
            auto cfg = resolveConfig(attackOpts);
            cfg.scenario = harness::scenarioFromString(scenarioName);
            cfg.modelsDir = modelsDir;
            if (lambdaOne > 0) cfg.attack.lambdaThreshold = lambdaOne;
            if (stepOverride > 0) cfg.attack.step = stepOverride;
            if (sizeOverride > 0) cfg.attack.size = sizeOverride;
            const auto report = harness::runScenario(cfg);
            return finishReport(report, attackOut);
        }
        if (sweep->parsed()) {
            auto cfg = resolveConfig(sweepOpts);
            cfg.scenario = harness::scenarioFromString(sweepScenarioName);
            cfg.lambdaGrid = parseLambdaGrid(lambdaText);
            const auto reports = harness::runLambdaSweep(cfg);
            std::ofstream out(sweepOut);
            if (!out) throw Error("cannot open " + sweepOut);
            out << harness::reportCsvHeader();
            int breaches = 0;
            for (const auto& r : reports) {
                out << harness::reportCsvRows(r);
                breaches += r.constraintViolations + r.residualViolations;
            }
            std::cout << harness::renderTable(reports);
            std::cout << "sweep written to " << sweepOut << "\n";
            return breaches > 0 ? kExitInvariantBreach : 0;
        }
        if (rep->parsed()) {
            std::ifstream in(reportIn);
            if (!in) throw Error("cannot open " + reportIn);
            json j;
            in >> j;
            harness::ScenarioReport r;
            r.config = harness::configFromJson(j.at("config"));
            const auto& med = j.at("median");
            r.detectionAccuracy = med.at("detectionAccuracy").get<double>();
            r.preAttackDetection = med.at("preAttackDetection").get<double>();
            r.meanL2 = med.at("meanL2").get<double>();
            r.relativeL2 = med.at("relativeL2").get<double>();
            r.constraintViolations = j.at("totals").at("constraintViolations").get<int>();
            r.residualViolations = j.at("totals").at("residualViolations").get<int>();
            if (!reportTiming.empty()) {
                std::ifstream tin(reportTiming);
                if (tin) {
                    json tj;
                    tin >> tj;
                    r.medianTimeMs = tj.value("medianMeanTimeMs", 0.0);
                }
            }
            std::cout << harness::renderTable({r});
            return 0;
        }
    } catch (const DegenerateConstraint& e) {
        std::cerr << "degenerate constraint: " << e.what() << "\n";
        return kExitDegenerateConstraint;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
