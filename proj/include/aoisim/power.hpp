#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aoisim/link_metrics.hpp"

namespace aoisim {

struct PowerProblem {
    int V = 0;
    int F = 0;
    std::vector<double> gains;      // row-major V*F, |h_i^H w_hat_l|^2 at unit power
    std::vector<double> gammaHat;   // V thresholds
    Assignment assignment;
    double sigma2 = 0.0;
    double Pmax = 0.0;

    double g(int i, int l) const { return gains[static_cast<std::size_t>(i) * F + l]; }
    double& g(int i, int l) { return gains[static_cast<std::size_t>(i) * F + l]; }
};

struct PowerSolution {
    std::vector<double> p;  // F powers, zero for unscheduled processes
    bool feasible = false;
    int iterations = 0;

    double total() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }
};

// Minimum-power allocation by the standard interference-function fixed point:
// p_l <- max over assigned i of gammaHat_i * (sum_{m != l} p_m g[i][m] + sigma2) / g[i][l].
// Iterates are non-decreasing from zero, so they either converge to the LP optimum
// or pass any budget; divergence is declared past 1e3 * Pmax.
inline PowerSolution minPowerAllocation(const PowerProblem& pb) {
    PowerSolution sol;
    sol.p.assign(static_cast<std::size_t>(pb.F), 0.0);

    std::vector<int> scheduled;  // 0-based process ids with at least one vehicle
    for (int l = 0; l < pb.F; ++l)
        if (pb.assignment.groupMask(l) != 0) scheduled.push_back(l);
    if (scheduled.empty()) {
        sol.feasible = true;
        return sol;
    }
    for (int i = 0; i < pb.V; ++i) {
        const int mu = pb.assignment.mu[static_cast<std::size_t>(i)];
        if (mu != 0 && pb.g(i, mu - 1) <= 0.0) return sol;  // unservable vehicle
    }

    const double divergenceCap = 1e3 * pb.Pmax;
    for (int it = 1; it <= 10000; ++it) {
        double change = 0.0, total = 0.0;
        for (int l : scheduled) {
            double req = 0.0;
            for (int i = 0; i < pb.V; ++i) {
                if (!pb.assignment.assigned(i, l)) continue;
                double interf = 0.0;
                for (int m : scheduled)
                    if (m != l) interf += sol.p[static_cast<std::size_t>(m)] * pb.g(i, m);
                const double need = pb.gammaHat[static_cast<std::size_t>(i)] * (interf + pb.sigma2) / pb.g(i, l);
                req = std::max(req, need);
            }
            change = std::max(change, std::abs(req - sol.p[static_cast<std::size_t>(l)]));
            sol.p[static_cast<std::size_t>(l)] = req;
            total += req;
        }
        sol.iterations = it;
        if (total > divergenceCap) return sol;  // diverging
        if (change < 1e-10) {
            sol.feasible = total <= pb.Pmax * (1.0 + 1e-9);
            if (!sol.feasible) sol.p.assign(static_cast<std::size_t>(pb.F), 0.0);
            return sol;
        }
    }
    return sol;  // no convergence within the iteration cap
}

namespace detail {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// Dense two-phase simplex with Bland's rule for
//   min c.x  s.t.  A x <= b, x >= 0   (b may be negative).
struct SimplexResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double value = 0.0;
};

inline SimplexResult simplexSolve(const std::vector<double>& c,
                                  const std::vector<std::vector<double>>& A,
                                  const std::vector<double>& b) {
    const int m = static_cast<int>(A.size());
    const int n = static_cast<int>(c.size());
    const double eps = 1e-11;

    // Columns: n structural + m slacks + up to m artificials.
    int nart = 0;
    std::vector<int> artCol(static_cast<std::size_t>(m), -1);
    for (int r = 0; r < m; ++r)
        if (b[static_cast<std::size_t>(r)] < 0.0) artCol[static_cast<std::size_t>(r)] = nart++;
    const int ncols = n + m + nart;

    std::vector<std::vector<double>> T(static_cast<std::size_t>(m),
                                       std::vector<double>(static_cast<std::size_t>(ncols + 1), 0.0));
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
        const double sgn = (b[static_cast<std::size_t>(r)] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) T[r][static_cast<std::size_t>(j)] = sgn * A[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        T[r][static_cast<std::size_t>(n + r)] = sgn;  // slack
        T[r][static_cast<std::size_t>(ncols)] = sgn * b[static_cast<std::size_t>(r)];
        if (artCol[static_cast<std::size_t>(r)] >= 0) {
            const int ac = n + m + artCol[static_cast<std::size_t>(r)];
            T[r][static_cast<std::size_t>(ac)] = 1.0;
            basis[static_cast<std::size_t>(r)] = ac;
        } else {
            basis[static_cast<std::size_t>(r)] = n + r;
        }
    }

    auto pivot = [&](int pr, int pc) {
        auto& prow = T[static_cast<std::size_t>(pr)];
        const double pv = prow[static_cast<std::size_t>(pc)];
        for (double& v : prow) v /= pv;
        for (int r = 0; r < m; ++r) {
            if (r == pr) continue;
            const double f = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(pc)];
            if (f == 0.0) continue;
            for (int j = 0; j <= ncols; ++j)
                T[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
        }
        basis[static_cast<std::size_t>(pr)] = pc;
    };

    // Runs simplex for the cost vector `cost` (length ncols) over allowed columns.
    auto run = [&](const std::vector<double>& cost, int allowedCols) -> LpStatus {
        for (int iter = 0; iter < 20000; ++iter) {
            // reduced costs: c_j - c_B . B^{-1} A_j
            int enter = -1;
            for (int j = 0; j < allowedCols; ++j) {
                double red = cost[static_cast<std::size_t>(j)];
                for (int r = 0; r < m; ++r)
                    red -= cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] *
                           T[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
                if (red < -eps) { enter = j; break; }  // Bland: smallest index
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m; ++r) {
                const double a = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(enter)];
                if (a > eps) {
                    const double ratio = T[static_cast<std::size_t>(r)][static_cast<std::size_t>(ncols)] / a;
                    if (ratio < best - eps ||
                        (ratio < best + eps && (leave < 0 || basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])))
                    {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
        return LpStatus::Unbounded;  // iteration cap; should not happen with Bland
    };

    SimplexResult res;
    if (nart > 0) {
        std::vector<double> phase1(static_cast<std::size_t>(ncols), 0.0);
        for (int j = n + m; j < ncols; ++j) phase1[static_cast<std::size_t>(j)] = 1.0;
        if (run(phase1, ncols) != LpStatus::Optimal) return res;
        double infeasibility = 0.0;
        for (int r = 0; r < m; ++r)
            if (basis[static_cast<std::size_t>(r)] >= n + m)
                infeasibility += T[static_cast<std::size_t>(r)][static_cast<std::size_t>(ncols)];
        if (infeasibility > 1e-8) return res;
        // drive any degenerate artificial out of the basis
        for (int r = 0; r < m; ++r) {
            if (basis[static_cast<std::size_t>(r)] < n + m) continue;
            for (int j = 0; j < n + m; ++j) {
                if (std::abs(T[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]) > eps) {
                    pivot(r, j);
                    break;
                }
            }
        }
    }
    std::vector<double> phase2(static_cast<std::size_t>(ncols), 0.0);
    for (int j = 0; j < n; ++j) phase2[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
    const LpStatus st = run(phase2, n + m);
    if (st != LpStatus::Optimal) return res;
    res.status = LpStatus::Optimal;
    res.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < m; ++r)
        if (basis[static_cast<std::size_t>(r)] < n)
            res.x[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] =
                T[static_cast<std::size_t>(r)][static_cast<std::size_t>(ncols)];
    for (int j = 0; j < n; ++j) res.value += c[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
    return res;
}

}  // namespace detail

// Simplex-based reference solver for the same minimum-power LP; test oracle only.
inline PowerSolution lpOracle(const PowerProblem& pb) {
    if (pb.F > 6) throw std::invalid_argument("lpOracle: intended for F <= 6 instances");
    PowerSolution sol;
    sol.p.assign(static_cast<std::size_t>(pb.F), 0.0);

    std::vector<int> scheduled;
    for (int l = 0; l < pb.F; ++l)
        if (pb.assignment.groupMask(l) != 0) scheduled.push_back(l);
    if (scheduled.empty()) {
        sol.feasible = true;
        return sol;
    }
    for (int i = 0; i < pb.V; ++i) {
        const int mu = pb.assignment.mu[static_cast<std::size_t>(i)];
        if (mu != 0 && pb.g(i, mu - 1) <= 0.0) return sol;
    }

    const int n = static_cast<int>(scheduled.size());
    std::vector<int> col(static_cast<std::size_t>(pb.F), -1);
    for (int j = 0; j < n; ++j) col[static_cast<std::size_t>(scheduled[static_cast<std::size_t>(j)])] = j;

    std::vector<std::vector<double>> A;
    std::vector<double> b;
    // SINR constraints as <=:  gammaHat_i * sum_{m != l} g[i][m] p_m - g[i][l] p_l <= -gammaHat_i * sigma2
    for (int i = 0; i < pb.V; ++i) {
        const int mu = pb.assignment.mu[static_cast<std::size_t>(i)];
        if (mu == 0) continue;
        const int l = mu - 1;
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        const double gh = pb.gammaHat[static_cast<std::size_t>(i)];
        for (int m : scheduled) {
            if (m == l)
                row[static_cast<std::size_t>(col[static_cast<std::size_t>(m)])] -= pb.g(i, m);
            else
                row[static_cast<std::size_t>(col[static_cast<std::size_t>(m)])] += gh * pb.g(i, m);
        }
        A.push_back(std::move(row));
        b.push_back(-gh * pb.sigma2);
    }
    A.emplace_back(static_cast<std::size_t>(n), 1.0);  // budget
    b.push_back(pb.Pmax);

    std::vector<double> c(static_cast<std::size_t>(n), 1.0);
    const auto lp = detail::simplexSolve(c, A, b);
    if (lp.status != detail::LpStatus::Optimal) return sol;
    for (int j = 0; j < n; ++j)
        sol.p[static_cast<std::size_t>(scheduled[static_cast<std::size_t>(j)])] =
            std::max(0.0, lp.x[static_cast<std::size_t>(j)]);
    sol.feasible = true;
    return sol;
}

}  // namespace aoisim
