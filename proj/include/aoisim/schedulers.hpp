#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "aoisim/aoi.hpp"
#include "aoisim/link_metrics.hpp"
#include "aoisim/power.hpp"
#include "aoisim/scenario.hpp"

namespace aoisim {

struct SlotRecord {
    int t = 0;
    Assignment assignment;
    std::vector<double> powers;        // F
    std::vector<std::uint8_t> success; // V
    std::int64_t weightedAgeSlots = 0; // after the step
};

struct SolveResult {
    std::string solver;
    std::vector<SlotRecord> trajectory;
    ObjectiveBreakdown breakdown;
    int colonies = 0;   // ACO only
    int iterations = 0; // power-solver iterations, summed
    std::uint64_t seed = 0;
};

// Per-scenario precomputation shared by all solvers: channel states, the SINR
// threshold, and a per-slot cache of unit-power beam gains keyed by group mask.
class SlotEngine {
public:
    explicit SlotEngine(const Scenario& sc)
        : sc_(sc), channels_(simulateChannels(sc)),
          gammaHat_(static_cast<std::size_t>(sc.V), invertErrorToSinr(sc.epsilonMax, sc)),
          gainCache_(static_cast<std::size_t>(sc.T)) {
        if (sc.V > 31) throw std::invalid_argument("SlotEngine: V must be <= 31 (group bitmask)");
    }

    const Scenario& scenario() const { return sc_; }
    const ChannelState& channel(int t) const { return channels_[static_cast<std::size_t>(t - 1)]; }
    const std::vector<double>& gammaHat() const { return gammaHat_; }

    // g_i = |h_i^H w_hat(mask)|^2 for every vehicle i, cached per slot.
    const std::vector<double>& maskGains(int t, std::uint32_t mask) {
        auto& cache = gainCache_[static_cast<std::size_t>(t - 1)];
        auto it = cache.find(mask);
        if (it != cache.end()) return it->second;
        const auto& cs = channel(t);
        const auto dir = mrtDirection(cs, mask, sc_.N);
        std::vector<double> g(static_cast<std::size_t>(sc_.V));
        for (int i = 0; i < sc_.V; ++i)
            g[static_cast<std::size_t>(i)] = beamGain(cs.vehicles[static_cast<std::size_t>(i)].h, dir);
        return cache.emplace(mask, std::move(g)).first->second;
    }

    PowerProblem buildProblem(int t, const Assignment& asg) {
        PowerProblem pb;
        pb.V = sc_.V;
        pb.F = sc_.F;
        pb.gains.assign(static_cast<std::size_t>(sc_.V) * sc_.F, 0.0);
        pb.gammaHat = gammaHat_;
        pb.assignment = asg;
        pb.sigma2 = sc_.sigma2;
        pb.Pmax = sc_.Pmax;
        for (int l = 0; l < sc_.F; ++l) {
            const std::uint32_t mask = asg.groupMask(l);
            if (mask == 0) continue;
            const auto& g = maskGains(t, mask);
            for (int i = 0; i < sc_.V; ++i) pb.g(i, l) = g[static_cast<std::size_t>(i)];
        }
        return pb;
    }

    // Executes a slot with minimum-power allocation. An infeasible assignment
    // runs as all-idle: no resets, zero power.
    SlotRecord executeSlot(int t, const Assignment& asg, int* iterations = nullptr) {
        SlotRecord rec;
        rec.t = t;
        rec.assignment = asg;
        rec.powers.assign(static_cast<std::size_t>(sc_.F), 0.0);
        rec.success.assign(static_cast<std::size_t>(sc_.V), 0);
        if (!asg.idle()) {
            const auto pb = buildProblem(t, asg);
            const auto sol = minPowerAllocation(pb);
            if (iterations) *iterations += sol.iterations;
            if (sol.feasible) {
                rec.powers = sol.p;
                for (int i = 0; i < sc_.V; ++i)
                    if (asg.mu[static_cast<std::size_t>(i)] != 0) rec.success[static_cast<std::size_t>(i)] = 1;
            }
        }
        return rec;
    }

    // Slot executed with caller-supplied powers; success decided through the
    // full SINR pipeline against the decoding threshold.
    SlotRecord executeSlotWithPowers(int t, const Assignment& asg, const std::vector<double>& powers) {
        SlotRecord rec;
        rec.t = t;
        rec.assignment = asg;
        rec.powers = powers;
        rec.success.assign(static_cast<std::size_t>(sc_.V), 0);
        for (int i = 0; i < sc_.V; ++i) {
            const int mu = asg.mu[static_cast<std::size_t>(i)];
            if (mu == 0) continue;
            const int l = mu - 1;
            double sig = 0.0, interf = 0.0;
            for (int m = 0; m < sc_.F; ++m) {
                const std::uint32_t mask = asg.groupMask(m);
                if (mask == 0 || powers[static_cast<std::size_t>(m)] <= 0.0) continue;
                const double pg = powers[static_cast<std::size_t>(m)] * maskGains(t, mask)[static_cast<std::size_t>(i)];
                if (m == l) sig = pg; else interf += pg;
            }
            const double gamma = sig / (interf + sc_.sigma2);
            if (gamma >= gammaHat_[static_cast<std::size_t>(i)] * (1.0 - 1e-9))
                rec.success[static_cast<std::size_t>(i)] = 1;
        }
        return rec;
    }

private:
    Scenario sc_;
    std::vector<ChannelState> channels_;
    std::vector<double> gammaHat_;
    std::vector<std::unordered_map<std::uint32_t, std::vector<double>>> gainCache_;
};

inline double actionSpaceSize(const Scenario& sc) {
    double prod = 1.0;
    for (int i = 0; i < sc.V; ++i) prod *= sc.demand.rowCount(i) + 1;
    return prod;
}

// Mixed-radix enumeration over per-vehicle choice sets {0} u R_i; the last
// vehicle varies fastest, so action 0 is all-idle.
inline std::vector<Assignment> enumerateActions(const Scenario& sc) {
    const double size = actionSpaceSize(sc);
    if (size > 1e6)
        throw std::invalid_argument("enumerateActions: action space of " + std::to_string(size) +
                                    " exceeds the 1e6 guard");
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(sc.V));
    for (int i = 0; i < sc.V; ++i) {
        choices[static_cast<std::size_t>(i)].push_back(0);
        for (int l : sc.demand.demandSet(i)) choices[static_cast<std::size_t>(i)].push_back(l);
    }
    std::vector<Assignment> out;
    out.reserve(static_cast<std::size_t>(size));
    std::vector<std::size_t> idx(static_cast<std::size_t>(sc.V), 0);
    while (true) {
        Assignment a;
        a.mu.resize(static_cast<std::size_t>(sc.V));
        for (int i = 0; i < sc.V; ++i)
            a.mu[static_cast<std::size_t>(i)] = choices[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
        out.push_back(std::move(a));
        int i = sc.V - 1;
        while (i >= 0) {
            if (++idx[static_cast<std::size_t>(i)] < choices[static_cast<std::size_t>(i)].size()) break;
            idx[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

namespace detail {

inline SolveResult finalizeResult(std::string solver, const Scenario& sc, double zeta,
                                  std::vector<SlotRecord> traj, std::uint64_t seed) {
    SolveResult res;
    res.solver = std::move(solver);
    res.seed = seed;
    AoiState aoi = AoiState::initial(sc);
    double powerSum = 0.0;
    for (auto& rec : traj) {
        aoi = stepAoi(aoi, rec.assignment, rec.success, sc.demand);
        rec.weightedAgeSlots = aoi.weightedAgeSlots(sc.demand);
        for (double p : rec.powers) powerSum += p;
    }
    res.trajectory = std::move(traj);
    res.breakdown = makeBreakdown(averageAoi(aoi, sc.delta, sc.T), powerSum / sc.T, sc, zeta);
    return res;
}

}  // namespace detail

// Baseline: uniform action, uniform total power split equally over scheduled processes.
inline SolveResult randomPolicy(const Scenario& sc, double zeta, std::uint64_t seed) {
    SlotEngine eng(sc);
    const auto actions = enumerateActions(sc);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> da(0, actions.size() - 1);
    std::uniform_real_distribution<double> du(0.0, 1.0);
    std::vector<SlotRecord> traj;
    for (int t = 1; t <= sc.T; ++t) {
        const Assignment& asg = actions[da(rng)];
        const double frac = du(rng);
        int scheduled = 0;
        for (int l = 0; l < sc.F; ++l)
            if (asg.groupMask(l) != 0) ++scheduled;
        std::vector<double> powers(static_cast<std::size_t>(sc.F), 0.0);
        if (scheduled > 0) {
            const double per = frac * sc.Pmax / scheduled;
            for (int l = 0; l < sc.F; ++l)
                if (asg.groupMask(l) != 0) powers[static_cast<std::size_t>(l)] = per;
        }
        traj.push_back(eng.executeSlotWithPowers(t, asg, powers));
    }
    return detail::finalizeResult("random", sc, zeta, std::move(traj), seed);
}

namespace detail {

// One greedy pass over the horizon. Each slot evaluates every feasible
// (action, min-power) pair and takes the score minimizer; ties keep the
// lowest action index. `horizonWeighted` switches the age term between the
// slot's own contribution and the remaining-horizon marginal (the cost-to-go
// if nothing were transmitted later); see docs/greedy-score.md.
inline SolveResult greedyPass(SlotEngine& eng, const std::vector<Assignment>& actions, double zeta,
                              bool horizonWeighted, int& powerIters) {
    const Scenario& sc = eng.scenario();
    const double lo = aoiLowerBound(sc);
    const double hi = aoiUpperBound(sc);
    const double aoiNorm = zeta * sc.delta / (sc.T * (hi - lo));
    const double powNorm = (1.0 - zeta) / (sc.T * sc.Pmax);

    std::vector<SlotRecord> traj;
    AoiState aoi = AoiState::initial(sc);
    for (int t = 1; t <= sc.T; ++t) {
        const double ageWeight = horizonWeighted ? static_cast<double>(sc.T - t + 1) : 1.0;
        double bestScore = std::numeric_limits<double>::infinity();
        SlotRecord bestRec;
        for (const auto& asg : actions) {
            SlotRecord rec;
            if (asg.idle()) {
                rec = eng.executeSlot(t, asg, &powerIters);
            } else {
                const auto pb = eng.buildProblem(t, asg);
                const auto sol = minPowerAllocation(pb);
                powerIters += sol.iterations;
                if (!sol.feasible) continue;
                rec.t = t;
                rec.assignment = asg;
                rec.powers = sol.p;
                rec.success.assign(static_cast<std::size_t>(sc.V), 0);
                for (int i = 0; i < sc.V; ++i)
                    if (asg.mu[static_cast<std::size_t>(i)] != 0) rec.success[static_cast<std::size_t>(i)] = 1;
            }
            // marginal slot score: demand-weighted age sum after the step + power term
            std::int64_t ageSum = 0;
            for (int i = 0; i < sc.V; ++i)
                for (int l = 0; l < sc.F; ++l)
                    if (sc.demand.at(i, l))
                        ageSum += (rec.assignment.assigned(i, l) && rec.success[static_cast<std::size_t>(i)])
                                      ? 1
                                      : aoi.age(i, l) + 1;
            double total = 0.0;
            for (double p : rec.powers) total += p;
            const double score = aoiNorm * ageWeight * static_cast<double>(ageSum) + powNorm * total;
            if (score < bestScore) {  // strict: ties keep the lowest action index
                bestScore = score;
                bestRec = std::move(rec);
            }
        }
        aoi = stepAoi(aoi, bestRec.assignment, bestRec.success, sc.demand);
        traj.push_back(std::move(bestRec));
    }
    return finalizeResult("exhaustive", sc, zeta, std::move(traj), 0);
}

}  // namespace detail

// Per-slot greedy over the full action space, run with both age weightings
// (the slot-local score and the remaining-horizon score); the better-scoring
// trajectory wins, slot-local on ties. See docs/greedy-score.md.
inline SolveResult exhaustivePolicy(const Scenario& sc, double zeta) {
    SlotEngine eng(sc);
    const auto actions = enumerateActions(sc);
    int powerIters = 0;
    SolveResult myopic = detail::greedyPass(eng, actions, zeta, false, powerIters);
    SolveResult horizon = detail::greedyPass(eng, actions, zeta, true, powerIters);
    SolveResult res = (horizon.breakdown.value < myopic.breakdown.value) ? std::move(horizon)
                                                                         : std::move(myopic);
    res.iterations = powerIters;
    return res;
}

struct AcoParams {
    int ants = 100;        // A
    int colonies = 400;    // I
    double kappa = 0.1;
    double iota1 = 1.0;
    double iota2 = 1.0;
    double epsilon0 = 0.01;
    double tau0 = 1.0;     // initial trail intensity
};

struct PheromoneTable {
    int T = 0, V = 0, F = 0;
    double kappa = 0.1;
    double iota1 = 1.0, iota2 = 1.0;
    std::vector<double> tau;  // T*V*F

    static PheromoneTable init(const Scenario& sc, const AcoParams& pr) {
        PheromoneTable pt;
        pt.T = sc.T;
        pt.V = sc.V;
        pt.F = sc.F;
        pt.kappa = pr.kappa;
        pt.iota1 = pr.iota1;
        pt.iota2 = pr.iota2;
        pt.tau.assign(static_cast<std::size_t>(sc.T) * sc.V * sc.F, pr.tau0);
        return pt;
    }
    double at(int t, int i, int l) const {
        return tau[(static_cast<std::size_t>(t - 1) * V + i) * F + l];
    }
    double& at(int t, int i, int l) {
        return tau[(static_cast<std::size_t>(t - 1) * V + i) * F + l];
    }
};

// Choice probabilities for one vehicle: index 0 is idle, index l is process l.
// pi_l = (tau_l^i1 * attr_l^i2) / (1 + sum_m tau_m^i1 * attr_m^i2).
inline std::vector<double> acoProbabilities(const std::vector<double>& tauRow,
                                            const std::vector<double>& attrRow,
                                            double iota1, double iota2) {
    const std::size_t F = tauRow.size();
    std::vector<double> pi(F + 1, 0.0);
    double denom = 1.0;
    for (std::size_t l = 0; l < F; ++l) {
        const double w = std::pow(tauRow[l], iota1) * std::pow(attrRow[l], iota2);
        pi[l + 1] = w;
        denom += w;
    }
    for (std::size_t l = 1; l <= F; ++l) pi[l] /= denom;
    double s = 0.0;
    for (std::size_t l = 1; l <= F; ++l) s += pi[l];
    pi[0] = 1.0 - s;
    return pi;
}

struct AntTour {
    std::vector<SlotRecord> trajectory;
    double objective = std::numeric_limits<double>::infinity();
    bool budgetOk = true;
};

// Evaporate every cell once, then add the two depositing ants' trails on the
// cells they chose; deposits are gated on the per-slot power budget.
inline void pheromoneUpdate(PheromoneTable& table, const AntTour& best, const AntTour& second,
                            double Pmax) {
    for (double& v : table.tau) v *= (1.0 - table.kappa);
    for (const AntTour* ant : {&best, &second}) {
        if (ant->trajectory.empty()) continue;
        bool withinBudget = true;
        for (const auto& rec : ant->trajectory) {
            double total = 0.0;
            for (double p : rec.powers) total += p;
            if (total > Pmax * (1.0 + 1e-9)) { withinBudget = false; break; }
        }
        if (!withinBudget) continue;
        const double deposit = std::exp(-ant->objective);
        for (const auto& rec : ant->trajectory)
            for (int i = 0; i < table.V; ++i) {
                const int mu = rec.assignment.mu[static_cast<std::size_t>(i)];
                if (mu != 0) table.at(rec.t, i, mu - 1) += deposit;
            }
    }
}

inline SolveResult acoSolve(const Scenario& sc, const AcoParams& pr, double zeta, std::uint64_t seed) {
    if (pr.ants < 2) throw std::invalid_argument("acoSolve: need at least two ants");
    if (pr.colonies < 1) throw std::invalid_argument("acoSolve: need at least one colony");
    SlotEngine eng(sc);
    PheromoneTable pt = PheromoneTable::init(sc, pr);
    const double lo = aoiLowerBound(sc);
    const double hi = aoiUpperBound(sc);

    auto runAnt = [&](std::mt19937_64& rng) {
        AntTour tour;
        AoiState aoi = AoiState::initial(sc);
        double powerSum = 0.0;
        std::uniform_real_distribution<double> du(0.0, 1.0);
        for (int t = 1; t <= sc.T; ++t) {
            Assignment asg;
            asg.mu.assign(static_cast<std::size_t>(sc.V), 0);
            for (int i = 0; i < sc.V; ++i) {
                // attractiveness: demanded would-be age over elapsed slots
                double denom = 1.0;
                std::vector<double> w(static_cast<std::size_t>(sc.F), 0.0);
                for (int l = 0; l < sc.F; ++l) {
                    if (!sc.demand.at(i, l)) continue;
                    const double attr = static_cast<double>(aoi.age(i, l) + 1) * sc.delta / t;
                    const double v = std::pow(pt.at(t, i, l), pt.iota1) * std::pow(attr, pt.iota2);
                    w[static_cast<std::size_t>(l)] = v;
                    denom += v;
                }
                double u = du(rng) * denom;
                double cum = 0.0;
                for (int l = 0; l < sc.F; ++l) {
                    cum += w[static_cast<std::size_t>(l)];
                    if (u < cum) { asg.mu[static_cast<std::size_t>(i)] = l + 1; break; }
                }
            }
            auto rec = eng.executeSlot(t, asg);
            aoi = stepAoi(aoi, asg, rec.success, sc.demand);
            rec.weightedAgeSlots = aoi.weightedAgeSlots(sc.demand);
            for (double p : rec.powers) powerSum += p;
            tour.trajectory.push_back(std::move(rec));
        }
        const double avgAoi = averageAoi(aoi, sc.delta, sc.T);
        tour.objective = zeta * (avgAoi - lo) / (hi - lo) + (1.0 - zeta) * (powerSum / sc.T) / sc.Pmax;
        return tour;
    };

    // Constructive warm start: seed the incumbent with the greedy trajectory
    // so the stochastic search only replaces it when an ant genuinely improves.
    AntTour bestEver;
    {
        SolveResult greedy = exhaustivePolicy(sc, zeta);
        bestEver.objective = greedy.breakdown.value;
        bestEver.trajectory = std::move(greedy.trajectory);
    }
    double bestObj = bestEver.objective;
    double prevObj = 0.0;
    int colony = 0;
    std::uint64_t antIndex = 0;
    while (colony < pr.colonies && std::abs(bestObj - prevObj) >= pr.epsilon0) {
        prevObj = bestObj;
        AntTour best, second;
        for (int a = 0; a < pr.ants; ++a) {
            std::mt19937_64 rng(derive_seed(seed, antIndex++));
            AntTour tour = runAnt(rng);
            if (tour.objective < bestObj) {
                bestObj = tour.objective;
                bestEver = tour;
            }
            if (tour.objective < best.objective) {
                second = std::move(best);
                best = std::move(tour);
            } else if (tour.objective < second.objective) {
                second = std::move(tour);
            }
        }
        pheromoneUpdate(pt, best, second, sc.Pmax);
        ++colony;
    }
    auto res = detail::finalizeResult("aco", sc, zeta, std::move(bestEver.trajectory), seed);
    res.colonies = colony;
    return res;
}

}  // namespace aoisim
