#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aoisim/link_metrics.hpp"
#include "aoisim/scenario.hpp"

namespace aoisim {

// Ages are kept as integer multiples of delta; seconds only at reporting boundaries.
struct AoiState {
    int V = 0;
    int F = 0;
    std::vector<std::int64_t> ageSlots;  // row-major V*F, Delta_il / delta
    int slotIndex = 0;                   // number of completed slots
    std::int64_t cumulativeWeightedSlots = 0;  // sum over slots of sum_il r_il * age

    static AoiState initial(const Scenario& sc) {
        AoiState s;
        s.V = sc.V;
        s.F = sc.F;
        s.ageSlots.assign(static_cast<std::size_t>(sc.V) * sc.F, 0);
        return s;
    }
    std::int64_t age(int i, int l) const { return ageSlots[static_cast<std::size_t>(i) * F + l]; }
    std::int64_t& age(int i, int l) { return ageSlots[static_cast<std::size_t>(i) * F + l]; }

    std::int64_t weightedAgeSlots(const DemandMatrix& d) const {
        std::int64_t s = 0;
        for (int i = 0; i < V; ++i)
            for (int l = 0; l < F; ++l)
                if (d.at(i, l)) s += age(i, l);
        return s;
    }
};

// One step of the age recursion: reset to delta on (assigned and decoded), else grow.
inline AoiState stepAoi(const AoiState& state, const Assignment& asg,
                        const std::vector<std::uint8_t>& success, const DemandMatrix& demand) {
    AoiState next = state;
    for (int i = 0; i < state.V; ++i) {
        for (int l = 0; l < state.F; ++l) {
            if (asg.assigned(i, l) && success[static_cast<std::size_t>(i)])
                next.age(i, l) = 1;
            else
                next.age(i, l) += 1;
        }
    }
    next.slotIndex = state.slotIndex + 1;
    next.cumulativeWeightedSlots = state.cumulativeWeightedSlots + next.weightedAgeSlots(demand);
    return next;
}

inline double averageAoi(const AoiState& state, double delta, int T) {
    if (state.slotIndex != T)
        throw std::logic_error("averageAoi: state has not accumulated exactly T slots");
    return delta * static_cast<double>(state.cumulativeWeightedSlots) / T;
}

// delta*(T+1)/2 * total demand count: no vehicle ever updated.
inline double aoiUpperBound(const Scenario& sc) {
    return sc.delta * (sc.T + 1) / 2.0 * sc.demand.totalDemands();
}

inline double aoiUpperBoundAt(const Scenario& sc, int horizon) {
    return sc.delta * (horizon + 1) / 2.0 * sc.demand.totalDemands();
}

namespace detail {
inline double triangularSum(int upper) {  // sum_{r=1}^{upper} r(r+1)/2
    double s = 0.0;
    for (int r = 1; r <= upper; ++r) s += r * (r + 1) / 2.0;
    return s;
}
}  // namespace detail

// Per-vehicle minimum time-average AoI over `horizon` slots with k demanded
// processes, updating one per slot in rotation. Two regimes meeting at horizon = k.
inline double aoiLowerBoundVehicle(int k, int horizon, double delta) {
    if (horizon < 1 || k < 1) throw std::invalid_argument("aoiLowerBoundVehicle: bad arguments");
    const double H = horizon;
    if (horizon >= k)
        return delta / H * (H * k * (k + 1) / 2.0 - detail::triangularSum(k - 1));
    return delta / H * (k * H * (H + 1) / 2.0 - detail::triangularSum(horizon - 1));
}

inline double aoiLowerBoundAt(const Scenario& sc, int horizon) {
    double s = 0.0;
    for (int i = 0; i < sc.V; ++i)
        s += aoiLowerBoundVehicle(sc.demand.rowCount(i), horizon, sc.delta);
    return s;
}

inline double aoiLowerBound(const Scenario& sc) { return aoiLowerBoundAt(sc, sc.T); }

struct ObjectiveBreakdown {
    double avgAoi = 0.0;    // seconds
    double aoiLower = 0.0;  // seconds
    double aoiUpper = 0.0;  // seconds
    double avgPower = 0.0;  // W
    double zeta = 0.5;
    double value = 0.0;     // dimensionless
};

// Weighted-sum utility; Pmin = 0.
inline double objective(double avgAoi, double avgPower, const Scenario& sc, double zeta) {
    if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("objective: zeta must lie in (0,1]");
    const double lo = aoiLowerBound(sc);
    const double hi = aoiUpperBound(sc);
    if (!(hi > lo)) throw std::domain_error("objective: degenerate AoI range");
    return zeta * (avgAoi - lo) / (hi - lo) + (1.0 - zeta) * avgPower / sc.Pmax;
}

inline ObjectiveBreakdown makeBreakdown(double avgAoi, double avgPower, const Scenario& sc, double zeta) {
    ObjectiveBreakdown b;
    b.avgAoi = avgAoi;
    b.aoiLower = aoiLowerBound(sc);
    b.aoiUpper = aoiUpperBound(sc);
    b.avgPower = avgPower;
    b.zeta = zeta;
    b.value = objective(avgAoi, avgPower, sc, zeta);
    return b;
}

// Per-slot DRL reward: -log(rho + nu) with horizon-t normalizers. At t = 1 the AoI
// range is degenerate (every age equals delta); that term contributes 0.
inline double slotReward(const AoiState& state, double cumulativePower, const Scenario& sc,
                         double zeta, int t, double nu) {
    if (t < 1) throw std::invalid_argument("slotReward: t must be >= 1");
    if (!(nu > 0.0)) throw std::invalid_argument("slotReward: nu must be positive");
    const double avgAoiT = sc.delta * static_cast<double>(state.cumulativeWeightedSlots) / t;
    const double lo = aoiLowerBoundAt(sc, t);
    const double hi = aoiUpperBoundAt(sc, t);
    const double aoiTerm = (hi > lo) ? (avgAoiT - lo) / (hi - lo) : 0.0;
    const double avgPowerT = cumulativePower / t;
    const double rho = zeta * aoiTerm + (1.0 - zeta) * avgPowerT / sc.Pmax;
    return -std::log(rho + nu);
}

}  // namespace aoisim
