#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoisim {

using cplx = std::complex<double>;

// splitmix64 step; used to derive independent sub-stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 1));
}

struct DemandMatrix {
    int V = 0;
    int F = 0;
    std::vector<int> r;  // row-major V*F, entries in {0,1}

    int at(int i, int l) const { return r[static_cast<std::size_t>(i) * F + l]; }
    int& at(int i, int l) { return r[static_cast<std::size_t>(i) * F + l]; }

    int rowCount(int i) const {
        int s = 0;
        for (int l = 0; l < F; ++l) s += at(i, l);
        return s;
    }
    // demanded process indices of vehicle i (1-based process ids)
    std::vector<int> demandSet(int i) const {
        std::vector<int> out;
        for (int l = 0; l < F; ++l)
            if (at(i, l)) out.push_back(l + 1);
        return out;
    }
    int totalDemands() const {
        int s = 0;
        for (int v : r) s += v;
        return s;
    }
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct ScenarioConfig {
    int V = 5;
    int F = 4;
    int T = 7;
    double delta = 1.0;        // s
    double delta1 = 0.1;       // s, angular-acquisition time
    int N = 64;                // antennas
    double fc = 3e9;           // Hz
    double c0 = 2.99e8;        // m/s
    double L = 1024.0;         // payload, bits (128 byte)
    double omega = 1e7;        // Hz
    double Pmax = 1.0;         // W (0 dB)
    double sigma2 = 0.1;       // W
    double epsilonMax = 1e-6;
    Vec2 rsuPosition{0.0, 0.0};
    double roadXMin = -100.0;  // initial-position segment
    double roadXMax = 100.0;
    double laneOffset = 10.0;  // m from RSU
    double speedMin = 10.0;    // m/s
    double speedMax = 15.0;
    std::uint64_t seed = 1;

    // Demand given explicitly, or generated with a fixed per-vehicle count.
    std::vector<std::vector<int>> demandRows;  // empty => random demand
    int randomDemandPerVehicle = 0;            // used when demandRows empty

    // Optional explicit placement (overrides the random draw).
    std::vector<double> initX;    // size V if given
    std::vector<double> speeds;   // size V if given
};

struct Scenario {
    int V, F, T;
    double delta, delta1;
    int N;
    double fc, c0;
    double L;
    double omega;
    double Pmax, sigma2, epsilonMax;
    DemandMatrix demand;
    Vec2 rsuPosition;
    std::vector<Vec2> vehicleInit;    // position at t=1
    std::vector<double> vehicleSpeed; // m/s along +x
    std::uint64_t seed;

    double delta2() const { return delta - delta1; }
};

// Element n (0-based) is exp(j*n*pi*sin(phi)); all entries unit modulus.
inline std::vector<cplx> steeringVector(double phi, int N) {
    if (N < 1) throw std::invalid_argument("steeringVector: N must be >= 1");
    std::vector<cplx> a(static_cast<std::size_t>(N));
    const double s = std::sin(phi);
    for (int n = 0; n < N; ++n)
        a[static_cast<std::size_t>(n)] = std::polar(1.0, n * std::numbers::pi * s);
    return a;
}

inline Scenario buildScenario(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("scenario: " + msg); };
    if (cfg.V < 1) fail("V must be >= 1");
    if (cfg.F < 1) fail("F must be >= 1");
    if (cfg.T < 1) fail("T must be >= 1");
    if (!(cfg.delta1 > 0.0 && cfg.delta1 < cfg.delta)) fail("delta1 must satisfy 0 < delta1 < delta");
    if (!(cfg.epsilonMax > 0.0 && cfg.epsilonMax < 1.0)) fail("epsilonMax must lie in (0,1)");
    if (!(cfg.Pmax > 0.0)) fail("Pmax must be positive");
    if (cfg.N < 1) fail("N must be >= 1");
    if (!(cfg.sigma2 > 0.0)) fail("sigma2 must be positive");
    if (!(cfg.omega > 0.0)) fail("omega must be positive");
    if (!(cfg.L > 0.0)) fail("L must be positive");

    Scenario sc;
    sc.V = cfg.V;
    sc.F = cfg.F;
    sc.T = cfg.T;
    sc.delta = cfg.delta;
    sc.delta1 = cfg.delta1;
    sc.N = cfg.N;
    sc.fc = cfg.fc;
    sc.c0 = cfg.c0;
    sc.L = cfg.L;
    sc.omega = cfg.omega;
    sc.Pmax = cfg.Pmax;
    sc.sigma2 = cfg.sigma2;
    sc.epsilonMax = cfg.epsilonMax;
    sc.rsuPosition = cfg.rsuPosition;
    sc.seed = cfg.seed;

    std::mt19937_64 rng(cfg.seed);

    sc.demand.V = cfg.V;
    sc.demand.F = cfg.F;
    sc.demand.r.assign(static_cast<std::size_t>(cfg.V) * cfg.F, 0);
    if (!cfg.demandRows.empty()) {
        if (static_cast<int>(cfg.demandRows.size()) != cfg.V) fail("demand matrix has wrong row count");
        for (int i = 0; i < cfg.V; ++i) {
            if (static_cast<int>(cfg.demandRows[i].size()) != cfg.F) fail("demand row has wrong length");
            for (int l = 0; l < cfg.F; ++l) {
                int v = cfg.demandRows[i][l];
                if (v != 0 && v != 1) fail("demand entries must be binary");
                sc.demand.at(i, l) = v;
            }
        }
    } else {
        int k = cfg.randomDemandPerVehicle;
        if (k < 1 || k > cfg.F) fail("randomDemand perVehicleCount out of range");
        std::vector<int> procs(static_cast<std::size_t>(cfg.F));
        for (int l = 0; l < cfg.F; ++l) procs[static_cast<std::size_t>(l)] = l;
        for (int i = 0; i < cfg.V; ++i) {
            std::shuffle(procs.begin(), procs.end(), rng);
            for (int j = 0; j < k; ++j) sc.demand.at(i, procs[static_cast<std::size_t>(j)]) = 1;
        }
    }
    for (int i = 0; i < cfg.V; ++i)
        if (sc.demand.rowCount(i) == 0) fail("vehicle has empty demand");

    // Draw order: speeds, then positions.
    sc.vehicleSpeed.resize(static_cast<std::size_t>(cfg.V));
    if (!cfg.speeds.empty()) {
        if (static_cast<int>(cfg.speeds.size()) != cfg.V) fail("speeds list has wrong length");
        sc.vehicleSpeed = cfg.speeds;
    } else {
        std::uniform_real_distribution<double> ds(cfg.speedMin, cfg.speedMax);
        for (int i = 0; i < cfg.V; ++i) sc.vehicleSpeed[static_cast<std::size_t>(i)] = ds(rng);
    }
    sc.vehicleInit.resize(static_cast<std::size_t>(cfg.V));
    if (!cfg.initX.empty()) {
        if (static_cast<int>(cfg.initX.size()) != cfg.V) fail("initX list has wrong length");
        for (int i = 0; i < cfg.V; ++i)
            sc.vehicleInit[static_cast<std::size_t>(i)] = {cfg.initX[static_cast<std::size_t>(i)],
                                                           cfg.rsuPosition.y + cfg.laneOffset};
    } else {
        std::uniform_real_distribution<double> dx(cfg.roadXMin, cfg.roadXMax);
        for (int i = 0; i < cfg.V; ++i)
            sc.vehicleInit[static_cast<std::size_t>(i)] = {dx(rng), cfg.rsuPosition.y + cfg.laneOffset};
    }
    return sc;
}

// Straight-road motion: x_i(t) = x_i(1) + c_i*(t-1)*delta, y fixed.
inline std::vector<Vec2> advanceMobility(const Scenario& sc, int t) {
    std::vector<Vec2> pos(static_cast<std::size_t>(sc.V));
    for (int i = 0; i < sc.V; ++i) {
        const auto& p0 = sc.vehicleInit[static_cast<std::size_t>(i)];
        pos[static_cast<std::size_t>(i)] = {p0.x + sc.vehicleSpeed[static_cast<std::size_t>(i)] * (t - 1) * sc.delta,
                                            p0.y};
    }
    return pos;
}

struct VehicleChannel {
    Vec2 position;
    double distance;      // ell_i, m
    double angle;         // phi_i, rad, in [0, pi]
    double dopplerShift;  // varrho_i, Hz
    double largeScaleGain;// chi_i, real magnitude
    double dopplerPhase;  // 2*pi*varrho_i, rad
    std::vector<cplx> h;  // length N
};

struct ChannelState {
    int t = 0;
    std::vector<VehicleChannel> vehicles;
};

inline VehicleChannel makeVehicleChannel(const Scenario& sc, Vec2 pos, double speed) {
    VehicleChannel vc;
    vc.position = pos;
    const double dx = pos.x - sc.rsuPosition.x;
    const double dy = pos.y - sc.rsuPosition.y;
    vc.distance = std::hypot(dx, dy);
    if (vc.distance <= 0.0) throw std::domain_error("channel: vehicle collocated with RSU");
    vc.angle = std::acos(std::clamp(dx / vc.distance, -1.0, 1.0));
    vc.dopplerShift = speed * sc.fc * std::cos(vc.angle) / sc.c0;
    vc.largeScaleGain = sc.c0 / (4.0 * std::numbers::pi * sc.fc * vc.distance * vc.distance);
    vc.dopplerPhase = 2.0 * std::numbers::pi * vc.dopplerShift;
    const auto a = steeringVector(vc.angle, sc.N);
    const double amp = std::sqrt(vc.largeScaleGain);
    const cplx rot = std::polar(1.0, vc.dopplerPhase);
    vc.h.resize(static_cast<std::size_t>(sc.N));
    for (int n = 0; n < sc.N; ++n)
        vc.h[static_cast<std::size_t>(n)] = amp * std::conj(a[static_cast<std::size_t>(n)]) * rot;
    return vc;
}

inline std::vector<cplx> channelVector(const Scenario& sc, int t, int i) {
    const auto pos = advanceMobility(sc, t);
    return makeVehicleChannel(sc, pos[static_cast<std::size_t>(i)], sc.vehicleSpeed[static_cast<std::size_t>(i)]).h;
}

inline ChannelState channelState(const Scenario& sc, int t) {
    ChannelState cs;
    cs.t = t;
    const auto pos = advanceMobility(sc, t);
    cs.vehicles.reserve(static_cast<std::size_t>(sc.V));
    for (int i = 0; i < sc.V; ++i)
        cs.vehicles.push_back(makeVehicleChannel(sc, pos[static_cast<std::size_t>(i)],
                                                 sc.vehicleSpeed[static_cast<std::size_t>(i)]));
    return cs;
}

// All T slots, t = 1..T (index t-1).
inline std::vector<ChannelState> simulateChannels(const Scenario& sc) {
    std::vector<ChannelState> out;
    out.reserve(static_cast<std::size_t>(sc.T));
    for (int t = 1; t <= sc.T; ++t) out.push_back(channelState(sc, t));
    return out;
}

}  // namespace aoisim
