#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "aoisim/scenario.hpp"

namespace aoisim {

// Gaussian tail probability Phi(q) = (1/sqrt(2*pi)) * int_q^inf exp(-u^2/2) du.
inline double qFunction(double q) {
    return 0.5 * std::erfc(q / std::numbers::sqrt2);
}

// Finite-blocklength decoding error probability; strictly decreasing in gamma.
inline double decodingErrorProb(double gamma, const Scenario& sc) {
    if (!(gamma > 0.0)) throw std::domain_error("decodingErrorProb: gamma must be positive");
    const double d2w = sc.delta2() * sc.omega;
    if (!(d2w > 0.0)) throw std::domain_error("decodingErrorProb: delta2*omega must be positive");
    const double onePlus = 1.0 + gamma;
    const double dispersion = 1.0 - 1.0 / (onePlus * onePlus);
    const double arg = std::sqrt(d2w / dispersion) * (std::log(onePlus) - sc.L * std::numbers::ln2 / d2w);
    return qFunction(arg);
}

// SINR threshold gammaHat with eps(gammaHat) = epsilonMax, by bisection in log-gamma.
inline double invertErrorToSinr(double epsilonMax, const Scenario& sc) {
    if (!(epsilonMax > 0.0 && epsilonMax < 0.5))
        throw std::invalid_argument("invertErrorToSinr: epsilonMax must lie in (0, 0.5)");
    double lo = 1e-12, hi = 1e-12;
    // eps is decreasing: expand hi until eps(hi) < epsilonMax.
    bool bracketed = false;
    while (hi <= 1e12) {
        if (decodingErrorProb(hi, sc) < epsilonMax) { bracketed = true; break; }
        lo = hi;
        hi *= 4.0;
    }
    if (!bracketed) throw std::runtime_error("invertErrorToSinr: no bracket in [1e-12, 1e12]");
    double mid = hi;
    for (int it = 0; it < 200; ++it) {
        mid = std::sqrt(lo * hi);
        const double e = decodingErrorProb(mid, sc);
        if (std::abs(e - epsilonMax) <= 1e-10 * epsilonMax) return mid;
        if (e > epsilonMax) lo = mid; else hi = mid;
    }
    return mid;
}

struct BeamformerSet {
    std::vector<std::vector<cplx>> w;  // F vectors of length N (zero when unscheduled)
    std::vector<double> p;             // F powers, W
};

// Assignment as a mu vector: mu[i] in {0} u R_i, 1-based process ids.
struct Assignment {
    std::vector<int> mu;

    int V() const { return static_cast<int>(mu.size()); }
    bool assigned(int i, int l) const { return mu[static_cast<std::size_t>(i)] == l + 1; }
    // bitmask of vehicles receiving process l (0-based l)
    std::uint32_t groupMask(int l) const {
        std::uint32_t m = 0;
        for (int i = 0; i < V(); ++i)
            if (mu[static_cast<std::size_t>(i)] == l + 1) m |= (1u << i);
        return m;
    }
    bool idle() const {
        for (int v : mu)
            if (v != 0) return false;
        return true;
    }
};

// Unit-norm MRT direction for the group of vehicles in `mask`:
// u = sum_i h_i / sqrt(N*chi_i), normalized. Empty mask yields the zero vector.
inline std::vector<cplx> mrtDirection(const ChannelState& cs, std::uint32_t mask, int N) {
    std::vector<cplx> u(static_cast<std::size_t>(N), cplx{0.0, 0.0});
    if (mask == 0) return u;
    for (int i = 0; i < static_cast<int>(cs.vehicles.size()); ++i) {
        if (!(mask & (1u << i))) continue;
        const auto& vc = cs.vehicles[static_cast<std::size_t>(i)];
        const double scale = 1.0 / std::sqrt(N * vc.largeScaleGain);
        for (int n = 0; n < N; ++n)
            u[static_cast<std::size_t>(n)] += scale * vc.h[static_cast<std::size_t>(n)];
    }
    double norm2 = 0.0;
    for (const auto& z : u) norm2 += std::norm(z);
    if (norm2 <= 0.0) return std::vector<cplx>(static_cast<std::size_t>(N), cplx{0.0, 0.0});
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& z : u) z *= inv;
    return u;
}

// w_l = sqrt(p_l) * unit direction; ||w_l||^2 = p_l for scheduled processes.
inline BeamformerSet mrtBeamformers(const Assignment& asg, const std::vector<double>& powers,
                                    const ChannelState& cs, int N, int F) {
    BeamformerSet bs;
    bs.p = powers;
    bs.w.resize(static_cast<std::size_t>(F));
    for (int l = 0; l < F; ++l) {
        const std::uint32_t mask = asg.groupMask(l);
        auto dir = mrtDirection(cs, mask, N);
        const double amp = (mask != 0 && powers[static_cast<std::size_t>(l)] > 0.0)
                               ? std::sqrt(powers[static_cast<std::size_t>(l)])
                               : 0.0;
        for (auto& z : dir) z *= amp;
        bs.w[static_cast<std::size_t>(l)] = std::move(dir);
    }
    return bs;
}

inline double beamGain(const std::vector<cplx>& h, const std::vector<cplx>& w) {
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < h.size(); ++n) acc += std::conj(h[n]) * w[n];
    return std::norm(acc);
}

// SINR at vehicle i served by process l (0-based l).
inline double sinr(int i, int l, const BeamformerSet& bs, const ChannelState& cs, double sigma2) {
    const auto& h = cs.vehicles[static_cast<std::size_t>(i)].h;
    double sig = 0.0, interf = 0.0;
    for (int m = 0; m < static_cast<int>(bs.w.size()); ++m) {
        const double g = beamGain(h, bs.w[static_cast<std::size_t>(m)]);
        if (m == l) sig = g; else interf += g;
    }
    return sig / (interf + sigma2);
}

}  // namespace aoisim
