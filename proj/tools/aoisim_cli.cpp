// Command-line harness: single runs, zeta/demand sweeps, solver comparisons,
// and DQN train/eval, all seeded and reproducible.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoisim/experiment.hpp"

using namespace aoisim;

namespace {

bool verboseLogging() {
    const char* v = std::getenv("AOISIM_LOG");
    return v != nullptr && std::string(v) != "quiet" && std::string(v) != "0";
}

ExperimentSpec loadSpec(const std::string& configPath) {
    if (!configPath.empty()) return loadExperimentSpec(configPath);
    ExperimentSpec spec;
    spec.scenario.demandRows = {
        {1, 0, 0, 1},
        {1, 0, 1, 0},
        {1, 0, 0, 1},
        {1, 1, 1, 0},
        {1, 1, 0, 0},
    };
    return spec;
}

void printRuns(const std::vector<RunSummary>& runs) {
    std::printf("%-12s %-20s %8s %14s %14s %14s %10s\n", "solver", "seed", "zeta", "normAoi",
                "normPower", "objective", "wall[s]");
    double mean = 0.0;
    for (const auto& r : runs) {
        std::printf("%-12s %-20llu %8s %14s %14s %14s %10.3f\n", r.solver.c_str(),
                    static_cast<unsigned long long>(r.seed), formatNumber(r.zeta).c_str(),
                    formatNumber(r.normalizedAoi).c_str(), formatNumber(r.normalizedPower).c_str(),
                    formatNumber(r.objective).c_str(), r.wallSeconds);
        mean += r.objective;
    }
    if (runs.size() > 1) {
        mean /= static_cast<double>(runs.size());
        double var = 0.0;
        for (const auto& r : runs) var += (r.objective - mean) * (r.objective - mean);
        std::printf("mean objective %s  stddev %s\n", formatNumber(mean).c_str(),
                    formatNumber(std::sqrt(var / (runs.size() - 1))).c_str());
    }
}

int cmdRun(ExperimentSpec spec) {
    const auto out = runExperiment(spec);
    printRuns(out.runs);
    return 0;
}

int cmdSweepZeta(ExperimentSpec spec, const std::vector<double>& zetas) {
    std::printf("%-8s %-12s %14s %14s %14s\n", "zeta", "solver", "meanNormAoi", "meanNormPower",
                "meanObjective");
    std::vector<std::string> lines;
    for (double z : zetas) {
        spec.solver.zeta = z;
        const auto out = runExperiment(spec);
        double aoi = 0.0, pow = 0.0, obj = 0.0;
        for (const auto& r : out.runs) {
            aoi += r.normalizedAoi;
            pow += r.normalizedPower;
            obj += r.objective;
        }
        const double n = static_cast<double>(out.runs.size());
        std::printf("%-8s %-12s %14s %14s %14s\n", formatNumber(z).c_str(), spec.solver.name.c_str(),
                    formatNumber(aoi / n).c_str(), formatNumber(pow / n).c_str(),
                    formatNumber(obj / n).c_str());
        lines.push_back(formatNumber(z) + "," + formatNumber(aoi / n) + "," + formatNumber(pow / n) +
                        "," + formatNumber(obj / n));
    }
    if (!spec.outDir.empty()) {
        std::ofstream f(spec.outDir + "/sweep_zeta_" + spec.solver.name + ".csv");
        f << "zeta,meanNormAoi,meanNormPower,meanObjective\n";
        for (const auto& l : lines) f << l << '\n';
    }
    return 0;
}

int cmdSweepDemand(ExperimentSpec spec, const std::vector<int>& demands) {
    std::printf("%-8s %-12s %14s %14s %14s\n", "|R_i|", "solver", "meanNormAoi", "meanNormPower",
                "meanObjective");
    std::vector<std::string> lines;
    for (int k : demands) {
        spec.scenario.demandRows.clear();
        spec.scenario.randomDemandPerVehicle = k;
        const auto out = runExperiment(spec);
        double aoi = 0.0, pow = 0.0, obj = 0.0;
        for (const auto& r : out.runs) {
            aoi += r.normalizedAoi;
            pow += r.normalizedPower;
            obj += r.objective;
        }
        const double n = static_cast<double>(out.runs.size());
        std::printf("%-8d %-12s %14s %14s %14s\n", k, spec.solver.name.c_str(),
                    formatNumber(aoi / n).c_str(), formatNumber(pow / n).c_str(),
                    formatNumber(obj / n).c_str());
        lines.push_back(std::to_string(k) + "," + formatNumber(aoi / n) + "," + formatNumber(pow / n) +
                        "," + formatNumber(obj / n));
    }
    if (!spec.outDir.empty()) {
        std::ofstream f(spec.outDir + "/sweep_demand_" + spec.solver.name + ".csv");
        f << "perVehicleDemand,meanNormAoi,meanNormPower,meanObjective\n";
        for (const auto& l : lines) f << l << '\n';
    }
    return 0;
}

int cmdCompare(const ExperimentSpec& spec, const std::vector<std::string>& solvers,
               const std::vector<double>& zetas) {
    const auto rows = compareSolvers(spec, solvers, zetas);
    std::printf("%-8s", "zeta");
    for (const auto& s : solvers) std::printf(" %14s", s.c_str());
    std::printf("  winRate vs %s\n", solvers[0].c_str());
    for (const auto& row : rows) {
        std::printf("%-8s", formatNumber(row.zeta).c_str());
        for (const auto& s : solvers) std::printf(" %14s", formatNumber(row.meanObjective.at(s)).c_str());
        for (const auto& [name, wr] : row.winRateVsFirst)
            std::printf("  %s:%s", name.c_str(), formatNumber(wr).c_str());
        std::printf("\n");
    }
    return 0;
}

int cmdTrainDqn(const ExperimentSpec& spec, const std::string& checkpoint, const std::string& logPath) {
    ScenarioConfig cfg = spec.scenario;
    cfg.seed = spec.baseSeed;
    const Scenario sc = buildScenario(cfg);
    DqnHyperparams hp = spec.solver.dqn;
    hp.seed = spec.baseSeed;
    const auto res = trainAgent(sc, hp, spec.solver.zeta);
    res.net.save(checkpoint);
    if (!logPath.empty()) {
        std::ofstream f(logPath);
        f << "episode,epsilon,meanLoss,episodeReward,objective\n";
        for (const auto& e : res.log)
            f << e.episode << ',' << formatNumber(e.epsilon) << ',' << formatNumber(e.meanLoss) << ','
              << formatNumber(e.episodeReward) << ',' << formatNumber(e.objective) << '\n';
    }
    const auto st = evaluatePolicy(res.net, sc, 1, spec.solver.zeta);
    std::printf("trained %d episodes; greedy objective %s; checkpoint %s\n", hp.episodes,
                formatNumber(st.meanObjective).c_str(), checkpoint.c_str());
    return 0;
}

int cmdEvalDqn(const ExperimentSpec& spec, const std::string& checkpoint, int episodes) {
    ScenarioConfig cfg = spec.scenario;
    cfg.seed = spec.baseSeed;
    const Scenario sc = buildScenario(cfg);
    const QNetwork net = QNetwork::load(checkpoint);
    const auto st = evaluatePolicy(net, sc, episodes, spec.solver.zeta);
    std::printf("objective mean %s stddev %s  avgAoi %s s  avgPower %s W\n",
                formatNumber(st.meanObjective).c_str(), formatNumber(st.stddevObjective).c_str(),
                formatNumber(st.meanAvgAoi).c_str(), formatNumber(st.meanAvgPower).c_str());
    return 0;
}

int cmdToyExample(const ExperimentSpec& spec) {
    ScenarioConfig cfg = spec.scenario;
    cfg.seed = spec.baseSeed;
    const Scenario sc = buildScenario(cfg);
    std::printf("toy scenario: V=%d F=%d T=%d, total demands %d\n", sc.V, sc.F, sc.T,
                sc.demand.totalDemands());
    std::printf("AoI upper bound: %s s\n", formatNumber(aoiUpperBound(sc)).c_str());
    std::printf("AoI lower bound: %s s\n", formatNumber(aoiLowerBound(sc)).c_str());
    const auto exh = exhaustivePolicy(sc, spec.solver.zeta);
    std::printf("exhaustive: avg AoI %s s, avg power %s W, objective %s\n",
                formatNumber(exh.breakdown.avgAoi).c_str(),
                formatNumber(exh.breakdown.avgPower).c_str(),
                formatNumber(exh.breakdown.value).c_str());
    double randAoi = 0.0, randPower = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const auto res = randomPolicy(sc, spec.solver.zeta, derive_seed(spec.baseSeed, static_cast<std::uint64_t>(r)));
        randAoi += res.breakdown.avgAoi;
        randPower += res.breakdown.avgPower;
    }
    std::printf("random (mean of %d seeds): avg AoI %s s, avg power %s W\n", reps,
                formatNumber(randAoi / reps).c_str(), formatNumber(randPower / reps).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age-of-information scheduling and power allocation simulator"};
    app.require_subcommand(1);

    std::string configPath, outDir, checkpoint = "qnet.ckpt", trainLog;
    std::string solverName;
    double zeta = -1.0;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int reps = 0, episodes = 0;
    std::vector<double> zetas{0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<int> demands{2, 3, 4, 5, 6, 7, 8};
    std::vector<std::string> solvers{"exhaustive", "aco", "random"};

    app.add_option("--config", configPath, "experiment config (JSON)");
    app.add_option("--solver", solverName, "random|exhaustive|aco|dqn");
    app.add_option("--zeta", zeta, "relative weight in (0,1]");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seedSet = true; }, "base seed");
    app.add_option("--reps", reps, "replications");
    app.add_option("--out", outDir, "output directory");
    app.add_option("--episodes", episodes, "DQN training episodes");

    auto* run = app.add_subcommand("run", "single experiment");
    auto* sweepZeta = app.add_subcommand("sweep-zeta", "sweep the relative weight");
    sweepZeta->add_option("--zetas", zetas, "zeta values");
    auto* sweepDemand = app.add_subcommand("sweep-demand", "sweep per-vehicle demand count");
    sweepDemand->add_option("--demands", demands, "per-vehicle demand counts");
    auto* compare = app.add_subcommand("compare", "compare solvers on common seeds");
    compare->add_option("--solvers", solvers, "solvers to compare");
    compare->add_option("--zetas", zetas, "zeta values");
    auto* trainDqn = app.add_subcommand("train-dqn", "train a DQN agent");
    trainDqn->add_option("--checkpoint", checkpoint, "checkpoint path");
    trainDqn->add_option("--train-log", trainLog, "training log CSV path");
    auto* evalDqn = app.add_subcommand("eval-dqn", "evaluate a DQN checkpoint");
    evalDqn->add_option("--checkpoint", checkpoint, "checkpoint path");
    auto* toy = app.add_subcommand("toy-example", "run the built-in 5x4 fixture with bound checks");

    // Let global options appear after the subcommand name as well.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentSpec spec = loadSpec(configPath);
        if (!solverName.empty()) spec.solver.name = solverName;
        if (zeta > 0.0) spec.solver.zeta = zeta;
        if (seedSet) spec.baseSeed = seed;
        if (reps > 0) spec.replications = reps;
        if (episodes > 0) spec.solver.dqn.episodes = episodes;
        spec.outDir = outDir;
        if (verboseLogging())
            std::fprintf(stderr, "[aoisim] solver=%s zeta=%s seed=%llu reps=%d\n",
                         spec.solver.name.c_str(), formatNumber(spec.solver.zeta).c_str(),
                         static_cast<unsigned long long>(spec.baseSeed), spec.replications);
        if (run->parsed()) return cmdRun(spec);
        if (sweepZeta->parsed()) return cmdSweepZeta(spec, zetas);
        if (sweepDemand->parsed()) return cmdSweepDemand(spec, demands);
        if (compare->parsed()) return cmdCompare(spec, solvers, zetas);
        if (trainDqn->parsed()) return cmdTrainDqn(spec, checkpoint, trainLog);
        if (evalDqn->parsed()) return cmdEvalDqn(spec, checkpoint, episodes > 0 ? episodes : 1);
        if (toy->parsed()) return cmdToyExample(spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
