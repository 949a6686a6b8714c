#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoisim/dqn.hpp"
#include "aoisim/schedulers.hpp"

namespace aoisim {

// 12 significant digits, locale-independent; shared by every CSV/summary writer.
inline std::string formatNumber(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct SolverSettings {
    std::string name = "exhaustive";  // random | exhaustive | aco | dqn
    double zeta = 0.5;
    AcoParams aco;
    DqnHyperparams dqn;
};

struct ExperimentSpec {
    ScenarioConfig scenario;
    SolverSettings solver;
    int replications = 1;
    std::uint64_t baseSeed = 1;
    std::vector<double> zetaSweep;          // empty = no sweep
    std::vector<int> demandSweep;           // per-vehicle demand counts
    std::string outDir;                     // empty = no file output
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::string solver;
    double zeta = 0.0;
    double normalizedAoi = 0.0;
    double normalizedPower = 0.0;
    double objective = 0.0;
    double wallSeconds = 0.0;
};

inline ScenarioConfig parseScenarioConfig(const nlohmann::json& j) {
    ScenarioConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("V", cfg.V);
    get("F", cfg.F);
    get("T", cfg.T);
    get("delta", cfg.delta);
    get("delta1", cfg.delta1);
    get("N", cfg.N);
    get("fc", cfg.fc);
    get("c0", cfg.c0);
    get("L", cfg.L);
    get("omega", cfg.omega);
    get("Pmax", cfg.Pmax);
    get("sigma2", cfg.sigma2);
    get("epsilonMax", cfg.epsilonMax);
    get("seed", cfg.seed);
    if (j.contains("rsuPosition")) {
        const auto& p = j.at("rsuPosition");
        cfg.rsuPosition = {p.at(0).get<double>(), p.at(1).get<double>()};
    }
    if (j.contains("road")) {
        const auto& r = j.at("road");
        if (r.contains("xMin")) cfg.roadXMin = r.at("xMin").get<double>();
        if (r.contains("xMax")) cfg.roadXMax = r.at("xMax").get<double>();
        if (r.contains("laneOffset")) cfg.laneOffset = r.at("laneOffset").get<double>();
    }
    if (j.contains("speed")) {
        const auto& s = j.at("speed");
        if (s.contains("min")) cfg.speedMin = s.at("min").get<double>();
        if (s.contains("max")) cfg.speedMax = s.at("max").get<double>();
    }
    if (j.contains("demand"))
        cfg.demandRows = j.at("demand").get<std::vector<std::vector<int>>>();
    if (j.contains("randomDemand"))
        cfg.randomDemandPerVehicle = j.at("randomDemand").at("perVehicleCount").get<int>();
    if (j.contains("initX")) cfg.initX = j.at("initX").get<std::vector<double>>();
    if (j.contains("speeds")) cfg.speeds = j.at("speeds").get<std::vector<double>>();
    return cfg;
}

inline SolverSettings parseSolverSettings(const nlohmann::json& j) {
    SolverSettings s;
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (j.contains("zeta")) s.zeta = j.at("zeta").get<double>();
    if (j.contains("aco")) {
        const auto& a = j.at("aco");
        if (a.contains("ants")) s.aco.ants = a.at("ants").get<int>();
        if (a.contains("colonies")) s.aco.colonies = a.at("colonies").get<int>();
        if (a.contains("kappa")) s.aco.kappa = a.at("kappa").get<double>();
        if (a.contains("iota1")) s.aco.iota1 = a.at("iota1").get<double>();
        if (a.contains("iota2")) s.aco.iota2 = a.at("iota2").get<double>();
        if (a.contains("epsilon0")) s.aco.epsilon0 = a.at("epsilon0").get<double>();
        if (a.contains("tau0")) s.aco.tau0 = a.at("tau0").get<double>();
    }
    if (j.contains("dqn")) {
        const auto& d = j.at("dqn");
        if (d.contains("episodes")) s.dqn.episodes = d.at("episodes").get<int>();
        if (d.contains("hidden1")) s.dqn.hidden1 = d.at("hidden1").get<int>();
        if (d.contains("hidden2")) s.dqn.hidden2 = d.at("hidden2").get<int>();
        if (d.contains("discount")) s.dqn.discount = d.at("discount").get<double>();
        if (d.contains("learningRate")) s.dqn.learningRate = d.at("learningRate").get<double>();
        if (d.contains("bufferCapacity")) s.dqn.bufferCapacity = d.at("bufferCapacity").get<std::size_t>();
        if (d.contains("batchSize")) s.dqn.batchSize = d.at("batchSize").get<std::size_t>();
        if (d.contains("targetNetwork")) s.dqn.targetNetwork = d.at("targetNetwork").get<bool>();
    }
    if (!(s.zeta > 0.0 && s.zeta <= 1.0))
        throw std::invalid_argument("solver: zeta must lie in (0,1]");
    return s;
}

inline ExperimentSpec loadExperimentSpec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }
    ExperimentSpec spec;
    spec.scenario = parseScenarioConfig(j);
    if (j.contains("solver")) spec.solver = parseSolverSettings(j.at("solver"));
    if (j.contains("replications")) spec.replications = j.at("replications").get<int>();
    if (j.contains("baseSeed")) spec.baseSeed = j.at("baseSeed").get<std::uint64_t>();
    if (spec.replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    return spec;
}

inline SolveResult runSolver(const Scenario& sc, const SolverSettings& s, std::uint64_t seed) {
    if (s.name == "random") return randomPolicy(sc, s.zeta, seed);
    if (s.name == "exhaustive") return exhaustivePolicy(sc, s.zeta);
    if (s.name == "aco") return acoSolve(sc, s.aco, s.zeta, seed);
    if (s.name == "dqn") {
        DqnHyperparams hp = s.dqn;
        hp.seed = seed;
        auto tr = trainAgent(sc, hp, s.zeta);
        auto st = evaluatePolicy(tr.net, sc, 1, s.zeta);
        SolveResult res;
        res.solver = "dqn";
        res.seed = seed;
        res.trajectory = st.lastTrajectory;
        res.breakdown = makeBreakdown(st.meanAvgAoi, st.meanAvgPower, sc, s.zeta);
        return res;
    }
    throw std::invalid_argument("unknown solver: " + s.name);
}

// Trajectory CSV: one record per slot.
inline void writeTrajectoryCsv(const std::string& path, const Scenario& sc, const SolveResult& res) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t";
    for (int i = 1; i <= sc.V; ++i) out << ",mu_" << i;
    for (int l = 1; l <= sc.F; ++l) out << ",p_" << l;
    for (int i = 1; i <= sc.V; ++i) out << ",success_" << i;
    out << ",weightedAgeSum\n";
    for (const auto& rec : res.trajectory) {
        out << rec.t;
        for (int v : rec.assignment.mu) out << ',' << v;
        for (double p : rec.powers) out << ',' << formatNumber(p);
        for (auto s : rec.success) out << ',' << static_cast<int>(s);
        out << ',' << formatNumber(static_cast<double>(rec.weightedAgeSlots) * sc.delta) << '\n';
    }
}

struct TrajectoryRow {
    int t = 0;
    Assignment assignment;
    std::vector<double> powers;
    std::vector<std::uint8_t> success;
    double weightedAgeSum = 0.0;
};

inline std::vector<TrajectoryRow> readTrajectoryCsv(const std::string& path, int V, int F) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<TrajectoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrajectoryRow row;
        std::size_t pos = 0;
        auto next = [&]() {
            const std::size_t c = line.find(',', pos);
            std::string tok = line.substr(pos, c == std::string::npos ? c : c - pos);
            pos = (c == std::string::npos) ? line.size() : c + 1;
            return tok;
        };
        row.t = std::stoi(next());
        row.assignment.mu.resize(static_cast<std::size_t>(V));
        for (int i = 0; i < V; ++i) row.assignment.mu[static_cast<std::size_t>(i)] = std::stoi(next());
        row.powers.resize(static_cast<std::size_t>(F));
        for (int l = 0; l < F; ++l) row.powers[static_cast<std::size_t>(l)] = std::stod(next());
        row.success.resize(static_cast<std::size_t>(V));
        for (int i = 0; i < V; ++i) row.success[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(next()));
        row.weightedAgeSum = std::stod(next());
        rows.push_back(std::move(row));
    }
    return rows;
}

// Recomputes the weighted-sum utility by replaying a logged trajectory.
inline double replayObjective(const Scenario& sc, const std::vector<TrajectoryRow>& rows, double zeta) {
    AoiState aoi = AoiState::initial(sc);
    double powerSum = 0.0;
    for (const auto& row : rows) {
        aoi = stepAoi(aoi, row.assignment, row.success, sc.demand);
        for (double p : row.powers) powerSum += p;
    }
    return objective(averageAoi(aoi, sc.delta, sc.T), powerSum / sc.T, sc, zeta);
}

inline RunSummary summarize(const Scenario& sc, const SolveResult& res, double wallSeconds) {
    RunSummary s;
    s.seed = res.seed;
    s.solver = res.solver;
    s.zeta = res.breakdown.zeta;
    const double lo = res.breakdown.aoiLower, hi = res.breakdown.aoiUpper;
    s.normalizedAoi = (res.breakdown.avgAoi - lo) / (hi - lo);
    s.normalizedPower = res.breakdown.avgPower / sc.Pmax;
    s.objective = res.breakdown.value;
    s.wallSeconds = wallSeconds;
    return s;
}

inline nlohmann::json summaryJson(const RunSummary& s) {
    return {{"seed", s.seed},
            {"solver", s.solver},
            {"zeta", s.zeta},
            {"normalizedAoi", s.normalizedAoi},
            {"normalizedPower", s.normalizedPower},
            {"objective", s.objective},
            {"wallSeconds", s.wallSeconds}};
}

struct ExperimentOutput {
    std::vector<RunSummary> runs;
    std::vector<SolveResult> results;
};

// Executes `replications` runs with derived seeds; writes per-slot CSV logs
// and a JSON summary when an output directory is set.
inline ExperimentOutput runExperiment(const ExperimentSpec& spec) {
    ExperimentOutput out;
    if (!spec.outDir.empty()) std::filesystem::create_directories(spec.outDir);
    for (int rep = 0; rep < spec.replications; ++rep) {
        const std::uint64_t seed = derive_seed(spec.baseSeed, static_cast<std::uint64_t>(rep));
        ScenarioConfig cfg = spec.scenario;
        cfg.seed = seed;
        const Scenario sc = buildScenario(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        SolveResult res = runSolver(sc, spec.solver, seed);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!spec.outDir.empty()) {
            const std::string base = spec.outDir + "/" + spec.solver.name + "_rep" + std::to_string(rep);
            writeTrajectoryCsv(base + "_trajectory.csv", sc, res);
        }
        out.runs.push_back(summarize(sc, res, wall));
        out.results.push_back(std::move(res));
    }
    if (!spec.outDir.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : out.runs) j.push_back(summaryJson(r));
        std::ofstream f(spec.outDir + "/" + spec.solver.name + "_summary.json");
        f << j.dump(2) << '\n';
    }
    return out;
}

struct ComparisonRow {
    double zeta = 0.0;
    std::map<std::string, double> meanObjective;
    std::map<std::string, double> winRateVsFirst;  // fraction of seeds beating solvers[0]
};

// Common seeds across solvers; per-zeta objective means and pairwise win rates.
inline std::vector<ComparisonRow> compareSolvers(const ExperimentSpec& spec,
                                                 const std::vector<std::string>& solvers,
                                                 const std::vector<double>& zetas) {
    if (solvers.size() < 2) throw std::invalid_argument("compareSolvers: need >= 2 solvers");
    std::vector<ComparisonRow> rows;
    for (double zeta : zetas) {
        ComparisonRow row;
        row.zeta = zeta;
        std::map<std::string, std::vector<double>> objs;
        for (int rep = 0; rep < spec.replications; ++rep) {
            const std::uint64_t seed = derive_seed(spec.baseSeed, static_cast<std::uint64_t>(rep));
            ScenarioConfig cfg = spec.scenario;
            cfg.seed = seed;
            const Scenario sc = buildScenario(cfg);
            for (const auto& name : solvers) {
                SolverSettings s = spec.solver;
                s.name = name;
                s.zeta = zeta;
                objs[name].push_back(runSolver(sc, s, seed).breakdown.value);
            }
        }
        for (const auto& [name, vals] : objs) {
            double m = 0.0;
            for (double v : vals) m += v;
            row.meanObjective[name] = m / vals.size();
            if (name != solvers[0]) {
                int wins = 0;
                for (std::size_t k = 0; k < vals.size(); ++k)
                    if (vals[k] < objs[solvers[0]][k]) ++wins;
                row.winRateVsFirst[name] = static_cast<double>(wins) / vals.size();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace aoisim
