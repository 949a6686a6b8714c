#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoisim/experiment.hpp"
#include "test_util.hpp"

using namespace aoisim;

namespace {

std::string writeTemp(const std::string& name, const std::string& body) {
    std::ofstream out(name);
    out << body;
    return name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config loading") {
    SECTION("fields are applied over the defaults") {
        const auto path = writeTemp("cfg_ok.json", R"({
            "V": 5, "F": 4, "T": 7, "seed": 42,
            "demand": [[1,0,0,1],[1,0,1,0],[1,0,0,1],[1,1,1,0],[1,1,0,0]],
            "Pmax": 2.0,
            "road": {"xMin": -80, "xMax": 80, "laneOffset": 12},
            "speed": {"min": 11, "max": 14},
            "solver": {"name": "aco", "zeta": 0.25, "aco": {"ants": 17, "kappa": 0.2}},
            "replications": 3, "baseSeed": 1234
        })");
        const auto spec = loadExperimentSpec(path);
        std::filesystem::remove(path);
        CHECK(spec.scenario.V == 5);
        CHECK(spec.scenario.F == 4);
        CHECK(spec.scenario.Pmax == 2.0);
        CHECK(spec.scenario.roadXMin == -80.0);
        CHECK(spec.scenario.laneOffset == 12.0);
        CHECK(spec.scenario.speedMin == 11.0);
        REQUIRE(spec.scenario.demandRows.size() == 5);
        CHECK(spec.solver.name == "aco");
        CHECK(spec.solver.zeta == 0.25);
        CHECK(spec.solver.aco.ants == 17);
        CHECK(spec.solver.aco.kappa == 0.2);
        CHECK(spec.solver.aco.colonies == 400);  // untouched default
        CHECK(spec.replications == 3);
        CHECK(spec.baseSeed == 1234);
    }
    SECTION("missing file is reported with its path") {
        CHECK_THROWS_WITH(loadExperimentSpec("definitely_absent.json"),
                          Catch::Matchers::ContainsSubstring("definitely_absent.json"));
    }
    SECTION("malformed JSON is reported as a parse error") {
        const auto path = writeTemp("cfg_bad.json", "{ not json");
        CHECK_THROWS_WITH(loadExperimentSpec(path), Catch::Matchers::ContainsSubstring("parse error"));
        std::filesystem::remove(path);
    }
    SECTION("zeta outside (0,1] is rejected by name") {
        const auto path = writeTemp("cfg_zeta.json", R"({"solver": {"zeta": 0.0}})");
        CHECK_THROWS_WITH(loadExperimentSpec(path), Catch::Matchers::ContainsSubstring("zeta"));
        std::filesystem::remove(path);
    }
    SECTION("replications below one is rejected by name") {
        const auto path = writeTemp("cfg_reps.json", R"({"replications": 0})");
        CHECK_THROWS_WITH(loadExperimentSpec(path), Catch::Matchers::ContainsSubstring("replications"));
        std::filesystem::remove(path);
    }
}

TEST_CASE("trajectory CSV round trip reproduces the objective") {
    const Scenario sc = buildScenario(test::toyConfig(6));
    const auto res = exhaustivePolicy(sc, 0.5);
    const std::string path = "traj_roundtrip.csv";
    writeTrajectoryCsv(path, sc, res);
    const auto rows = readTrajectoryCsv(path, sc.V, sc.F);
    std::filesystem::remove(path);

    REQUIRE(rows.size() == res.trajectory.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].t == res.trajectory[k].t);
        CHECK(rows[k].assignment.mu == res.trajectory[k].assignment.mu);
        CHECK(rows[k].success == res.trajectory[k].success);
        for (int l = 0; l < sc.F; ++l)
            CHECK(rows[k].powers[static_cast<std::size_t>(l)] ==
                  Catch::Approx(res.trajectory[k].powers[static_cast<std::size_t>(l)]).margin(1e-12));
    }
    CHECK(replayObjective(sc, rows, 0.5) == Catch::Approx(res.breakdown.value).margin(1e-9));
}

TEST_CASE("CSV output is bit-identical across writes") {
    const Scenario sc = buildScenario(test::toyConfig(8));
    const auto res = randomPolicy(sc, 0.5, 15);
    writeTrajectoryCsv("traj_a.csv", sc, res);
    writeTrajectoryCsv("traj_b.csv", sc, res);
    CHECK(slurp("traj_a.csv") == slurp("traj_b.csv"));
    std::filesystem::remove("traj_a.csv");
    std::filesystem::remove("traj_b.csv");
}

TEST_CASE("experiment runs are reproducible under derived seeds") {
    ExperimentSpec spec;
    spec.scenario = test::toyConfig();
    spec.solver.name = "random";
    spec.solver.zeta = 0.5;
    spec.replications = 3;
    spec.baseSeed = 777;
    const auto a = runExperiment(spec);
    const auto b = runExperiment(spec);
    REQUIRE(a.runs.size() == 3);
    REQUIRE(b.runs.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(a.runs[k].objective == b.runs[k].objective);
        CHECK(a.runs[k].seed == b.runs[k].seed);
        CHECK(a.runs[k].seed == derive_seed(777, k));
    }
    // distinct replications should not all coincide
    CHECK((a.runs[0].objective != a.runs[1].objective || a.runs[1].objective != a.runs[2].objective));
}

TEST_CASE("experiment output files are written when requested") {
    ExperimentSpec spec;
    spec.scenario = test::toyConfig();
    spec.solver.name = "random";
    spec.replications = 2;
    spec.baseSeed = 5;
    spec.outDir = "exp_out_test";
    const auto out = runExperiment(spec);
    REQUIRE(out.runs.size() == 2);
    CHECK(std::filesystem::exists("exp_out_test/random_rep0_trajectory.csv"));
    CHECK(std::filesystem::exists("exp_out_test/random_rep1_trajectory.csv"));
    REQUIRE(std::filesystem::exists("exp_out_test/random_summary.json"));
    const auto j = nlohmann::json::parse(slurp("exp_out_test/random_summary.json"));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0].at("solver").get<std::string>() == "random");
    CHECK(j[0].at("objective").get<double>() == Catch::Approx(out.runs[0].objective));
    std::filesystem::remove_all("exp_out_test");
}

TEST_CASE("solver comparison on common seeds") {
    ExperimentSpec spec;
    spec.scenario = test::toyConfig();
    spec.replications = 3;
    spec.baseSeed = 11;

    CHECK_THROWS_AS(compareSolvers(spec, {"random"}, {0.5}), std::invalid_argument);

    const auto rows = compareSolvers(spec, {"random", "exhaustive"}, {0.3, 0.7});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].zeta == 0.3);
    CHECK(rows[1].zeta == 0.7);
    for (const auto& row : rows) {
        REQUIRE(row.meanObjective.count("random") == 1);
        REQUIRE(row.meanObjective.count("exhaustive") == 1);
        CHECK(row.meanObjective.at("exhaustive") <= row.meanObjective.at("random") + 1e-12);
        REQUIRE(row.winRateVsFirst.count("exhaustive") == 1);
        CHECK(row.winRateVsFirst.at("exhaustive") >= 0.0);
        CHECK(row.winRateVsFirst.at("exhaustive") <= 1.0);
    }
}

TEST_CASE("unknown solver name is rejected") {
    const Scenario sc = buildScenario(test::toyConfig());
    SolverSettings s;
    s.name = "magic";
    CHECK_THROWS_WITH(runSolver(sc, s, 1), Catch::Matchers::ContainsSubstring("magic"));
}

TEST_CASE("number formatting is stable and locale independent") {
    CHECK(formatNumber(0.0) == "0");
    CHECK(formatNumber(0.5) == "0.5");
    CHECK(formatNumber(1e-6) == "1e-06");
    CHECK(std::stod(formatNumber(118.0 / 7.0)) == Catch::Approx(118.0 / 7.0).epsilon(1e-11));
}
