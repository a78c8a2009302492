#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "physadv/harness.hpp"

using namespace physadv;
namespace hn = physadv::harness;

namespace {

// Small but complete configuration: real training, desk-sized counts.
hn::ScenarioConfig tinyPowerConfig() {
    hn::ScenarioConfig cfg;
    cfg.domain = hn::Domain::Power;
    cfg.scenario = hn::Scenario::WhiteBox;
    cfg.caseSize = 8;
    cfg.seeds = {1, 2};
    cfg.training.epochs = 40;
    cfg.training.patience = 10;
    cfg.powerParams.trainCount = 400;
    cfg.powerParams.testCount = 20;
    cfg.powerParams.calibrationCount = 100;
    return cfg;
}

}  // namespace

TEST_CASE("scenario and domain names round trip") {
    for (const auto s : {hn::Scenario::WhiteBox, hn::Scenario::GrayBox1, hn::Scenario::GrayBox2,
                         hn::Scenario::BlackBox, hn::Scenario::Supreme}) {
        CHECK(hn::scenarioFromString(hn::scenarioName(s)) == s);
    }
    CHECK(hn::domainFromString("power") == hn::Domain::Power);
    CHECK(hn::domainFromString("water") == hn::Domain::Water);
    CHECK_THROWS_AS(hn::domainFromString("gas"), Error);
}

TEST_CASE("median of odd and even sample counts") {
    CHECK(hn::median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(hn::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS_AS(hn::median({}), EmptyDataset);
}

TEST_CASE("compromised branch choice is deterministic, sorted, and sized") {
    const auto g = power::bundledGrid();
    const auto a = hn::powerCompromisedForSeed(g, 8, 7);
    const auto b = hn::powerCompromisedForSeed(g, 8, 7);
    CHECK(a == b);
    CHECK(a.size() == 8);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
    const auto c = hn::powerCompromisedForSeed(g, 8, 8);
    CHECK(a != c);
}

TEST_CASE("config json round trips every field") {
    hn::ScenarioConfig cfg = tinyPowerConfig();
    cfg.scenario = hn::Scenario::BlackBox;
    cfg.attack.step = 17;
    cfg.attack.size = 0.42;
    cfg.attack.lambdaThreshold = 0.3;
    cfg.attack.maxItera = 4;
    cfg.attack.sampleCount = 3;
    cfg.lambdaGrid = {0.1, 0.5};
    cfg.modelsDir = "somewhere";
    const auto j = hn::configToJson(cfg);
    const auto back = hn::configFromJson(j);
    CHECK(back.domain == cfg.domain);
    CHECK(back.scenario == cfg.scenario);
    CHECK(back.caseSize == cfg.caseSize);
    CHECK(back.attack.step == cfg.attack.step);
    CHECK(back.attack.size == cfg.attack.size);
    CHECK(back.attack.lambdaThreshold == cfg.attack.lambdaThreshold);
    CHECK(back.attack.maxItera == cfg.attack.maxItera);
    CHECK(back.attack.sampleCount == cfg.attack.sampleCount);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.training.epochs == cfg.training.epochs);
    CHECK(back.powerParams.trainCount == cfg.powerParams.trainCount);
    CHECK(back.lambdaGrid == cfg.lambdaGrid);
    CHECK(back.modelsDir == cfg.modelsDir);
}

TEST_CASE("a full scenario run is deterministic and invariant clean") {
    const auto cfg = tinyPowerConfig();
    const auto first = hn::runScenario(cfg);
    const auto second = hn::runScenario(cfg);
    CHECK(hn::reportToJson(first).dump() == hn::reportToJson(second).dump());

    CHECK(first.perSeed.size() == 2);
    CHECK(first.constraintViolations == 0);
    CHECK(first.residualViolations == 0);
    for (const auto& s : first.perSeed) {
        CHECK(s.examples == 20);
        CHECK(s.compromised.size() == 8);
        CHECK(s.resolvedSize > 0.0);
    }

    const std::string csv = hn::reportCsvRows(first);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(hn::renderTable({first}).find("white-box") != std::string::npos);
}

TEST_CASE("world cache shares builds across scenarios") {
    hn::WorldCache cache;
    auto cfg = tinyPowerConfig();
    cfg.seeds = {1};
    const auto w1 = cache.get(cfg, 1);
    auto cfg2 = cfg;
    cfg2.scenario = hn::Scenario::Supreme;  // scenario does not key the world
    const auto w2 = cache.get(cfg2, 1);
    CHECK(w1.get() == w2.get());
}

TEST_CASE("report files are written as a triple") {
    const auto cfg = tinyPowerConfig();
    hn::WorldCache cache;
    const auto report = hn::runScenario(cfg, &cache);
    const auto stem =
        (std::filesystem::temp_directory_path() / "physadv_test_report").string();
    hn::writeReportFiles(stem, report);
    CHECK(std::filesystem::exists(stem + ".json"));
    CHECK(std::filesystem::exists(stem + ".csv"));
    CHECK(std::filesystem::exists(stem + ".timing.json"));
    std::filesystem::remove(stem + ".json");
    std::filesystem::remove(stem + ".csv");
    std::filesystem::remove(stem + ".timing.json");
}
