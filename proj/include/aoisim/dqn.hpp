#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisim/aoi.hpp"
#include "aoisim/schedulers.hpp"

namespace aoisim {

// State layout: for each vehicle, normalized large-scale gain followed by
// the F demand-masked ages; flattened length V*(F+1).
inline std::vector<double> encodeState(const AoiState& aoi, const ChannelState& cs, const Scenario& sc) {
    const double chiRef = sc.c0 / (4.0 * std::numbers::pi * sc.fc * 100.0 * 100.0);
    std::vector<double> s;
    s.reserve(static_cast<std::size_t>(sc.V) * (sc.F + 1));
    for (int i = 0; i < sc.V; ++i) {
        s.push_back(cs.vehicles[static_cast<std::size_t>(i)].largeScaleGain / chiRef);
        for (int l = 0; l < sc.F; ++l) {
            const double age = sc.demand.at(i, l) ? static_cast<double>(aoi.age(i, l)) * sc.delta : 0.0;
            s.push_back(age / (sc.delta * sc.T));
        }
    }
    return s;
}

// Inverse of encodeState for a known scenario; test helper.
inline void decodeState(const std::vector<double>& s, const Scenario& sc,
                        std::vector<double>& chiNorm, std::vector<std::vector<double>>& maskedAges) {
    chiNorm.assign(static_cast<std::size_t>(sc.V), 0.0);
    maskedAges.assign(static_cast<std::size_t>(sc.V), std::vector<double>(static_cast<std::size_t>(sc.F), 0.0));
    for (int i = 0; i < sc.V; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * (sc.F + 1);
        chiNorm[static_cast<std::size_t>(i)] = s[base];
        for (int l = 0; l < sc.F; ++l)
            maskedAges[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] =
                s[base + 1 + static_cast<std::size_t>(l)] * sc.delta * sc.T;
    }
}

struct Transition {
    std::vector<double> s;
    int action = 0;
    double reward = 0.0;
    std::vector<double> sNext;
    bool terminal = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition tr) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(tr));
        } else {
            data_[head_] = std::move(tr);  // oldest-first eviction
        }
        head_ = (head_ + 1) % capacity_;
    }
    std::size_t size() const { return data_.size(); }
    const Transition& at(std::size_t i) const { return data_[i]; }

    // Uniform sample of distinct indices.
    std::vector<std::size_t> sampleIndices(std::size_t batch, std::mt19937_64& rng) const {
        if (batch > data_.size()) throw std::invalid_argument("ReplayBuffer: batch exceeds size");
        std::vector<std::size_t> idx(data_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < batch; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, idx.size() - 1);
            std::swap(idx[i], idx[d(rng)]);
        }
        idx.resize(batch);
        return idx;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

// Dense MLP, rectifier hidden layers, identity output; plain SGD with
// hand-derived backprop.
class QNetwork {
public:
    QNetwork() = default;
    QNetwork(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) throw std::invalid_argument("QNetwork: need at least two layers");
        std::mt19937_64 rng(seed);
        for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
            const int in = sizes_[k], out = sizes_[k + 1];
            std::normal_distribution<double> dw(0.0, std::sqrt(2.0 / in));
            weights_.emplace_back(static_cast<std::size_t>(in) * out);
            biases_.emplace_back(static_cast<std::size_t>(out), 0.0);
            for (double& w : weights_.back()) w = dw(rng);
        }
    }

    const std::vector<int>& sizes() const { return sizes_; }
    int inputSize() const { return sizes_.front(); }
    int outputSize() const { return sizes_.back(); }

    std::vector<double> forward(const std::vector<double>& x) const {
        std::vector<double> a = x;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            a = layerForward(k, a);
            if (k + 1 < weights_.size())
                for (double& v : a) v = std::max(0.0, v);
        }
        return a;
    }

    // One SGD step on the mean squared error of the taken-action outputs
    // against fixed targets. Returns the batch loss before the step.
    // maxGradNorm > 0 rescales the gradient to that global L2 norm when it
    // is larger, which keeps step sizes bounded for badly scaled inputs.
    double trainStep(const std::vector<const std::vector<double>*>& states,
                     const std::vector<int>& actions, const std::vector<double>& targets,
                     double learningRate, double maxGradNorm = 0.0) {
        const std::size_t M = states.size();
        const std::size_t L = weights_.size();
        std::vector<std::vector<double>> gw(L), gb(L);
        for (std::size_t k = 0; k < L; ++k) {
            gw[k].assign(weights_[k].size(), 0.0);
            gb[k].assign(biases_[k].size(), 0.0);
        }
        double loss = 0.0;
        std::vector<std::vector<double>> act(L + 1);  // post-activation per layer
        for (std::size_t m = 0; m < M; ++m) {
            act[0] = *states[m];
            for (std::size_t k = 0; k < L; ++k) {
                act[k + 1] = layerForward(k, act[k]);
                if (k + 1 < L)
                    for (double& v : act[k + 1]) v = std::max(0.0, v);
            }
            const int a = actions[m];
            const double err = act[L][static_cast<std::size_t>(a)] - targets[m];
            loss += err * err;
            // backprop; output gradient nonzero only at the taken action
            std::vector<double> delta(static_cast<std::size_t>(sizes_.back()), 0.0);
            delta[static_cast<std::size_t>(a)] = 2.0 * err / static_cast<double>(M);
            for (std::size_t k = L; k-- > 0;) {
                const int in = sizes_[k], out = sizes_[k + 1];
                for (int o = 0; o < out; ++o) {
                    const double d = delta[static_cast<std::size_t>(o)];
                    if (d == 0.0) continue;
                    gb[k][static_cast<std::size_t>(o)] += d;
                    const std::size_t row = static_cast<std::size_t>(o) * in;
                    for (int j = 0; j < in; ++j)
                        gw[k][row + static_cast<std::size_t>(j)] += d * act[k][static_cast<std::size_t>(j)];
                }
                if (k == 0) break;
                std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
                for (int o = 0; o < out; ++o) {
                    const double d = delta[static_cast<std::size_t>(o)];
                    if (d == 0.0) continue;
                    const std::size_t row = static_cast<std::size_t>(o) * in;
                    for (int j = 0; j < in; ++j)
                        prev[static_cast<std::size_t>(j)] += d * weights_[k][row + static_cast<std::size_t>(j)];
                }
                for (int j = 0; j < in; ++j)
                    if (act[k][static_cast<std::size_t>(j)] <= 0.0) prev[static_cast<std::size_t>(j)] = 0.0;
                delta = std::move(prev);
            }
        }
        double scale = 1.0;
        if (maxGradNorm > 0.0) {
            double sq = 0.0;
            for (std::size_t k = 0; k < L; ++k) {
                for (double g : gw[k]) sq += g * g;
                for (double g : gb[k]) sq += g * g;
            }
            const double norm = std::sqrt(sq);
            if (norm > maxGradNorm) scale = maxGradNorm / norm;
        }
        for (std::size_t k = 0; k < L; ++k) {
            for (std::size_t j = 0; j < weights_[k].size(); ++j)
                weights_[k][j] -= learningRate * scale * gw[k][j];
            for (std::size_t j = 0; j < biases_[k].size(); ++j)
                biases_[k][j] -= learningRate * scale * gb[k][j];
        }
        return loss / static_cast<double>(M);
    }

    // Parameter access for checkpointing and the finite-difference tests.
    std::vector<std::vector<double>>& weights() { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("QNetwork::save: cannot open " + path);
        out.precision(17);
        out << "aoisim-qnet 1\n" << sizes_.size();
        for (int s : sizes_) out << ' ' << s;
        out << '\n';
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            for (double w : weights_[k]) out << w << ' ';
            out << '\n';
            for (double b : biases_[k]) out << b << ' ';
            out << '\n';
        }
    }
    static QNetwork load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("QNetwork::load: cannot open " + path);
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "aoisim-qnet" || version != 1)
            throw std::runtime_error("QNetwork::load: unrecognized checkpoint format");
        std::size_t nl = 0;
        in >> nl;
        QNetwork net;
        net.sizes_.resize(nl);
        for (auto& s : net.sizes_) in >> s;
        for (std::size_t k = 0; k + 1 < nl; ++k) {
            net.weights_.emplace_back(static_cast<std::size_t>(net.sizes_[k]) * net.sizes_[k + 1]);
            net.biases_.emplace_back(static_cast<std::size_t>(net.sizes_[k + 1]));
            for (double& w : net.weights_.back()) in >> w;
            for (double& b : net.biases_.back()) in >> b;
        }
        if (!in) throw std::runtime_error("QNetwork::load: truncated checkpoint");
        return net;
    }

private:
    std::vector<double> layerForward(std::size_t k, const std::vector<double>& x) const {
        const int in = sizes_[k], out = sizes_[k + 1];
        std::vector<double> y(biases_[k]);
        for (int o = 0; o < out; ++o) {
            const std::size_t row = static_cast<std::size_t>(o) * in;
            double acc = 0.0;
            for (int j = 0; j < in; ++j) acc += weights_[k][row + static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(o)] += acc;
        }
        return y;
    }

    std::vector<int> sizes_;
    std::vector<std::vector<double>> weights_;  // per layer, row-major out x in
    std::vector<std::vector<double>> biases_;
};

inline int argmaxLowestIndex(const std::vector<double>& q) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i)
        if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(best)]) best = i;
    return best;
}

inline int actEpsilonGreedy(const QNetwork& net, const std::vector<double>& state, double epsilon,
                            std::mt19937_64& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("actEpsilonGreedy: epsilon must lie in [0,1]");
    std::uniform_real_distribution<double> du(0.0, 1.0);
    if (du(rng) < epsilon) {
        std::uniform_int_distribution<int> da(0, net.outputSize() - 1);
        return da(rng);
    }
    return argmaxLowestIndex(net.forward(state));
}

struct DqnHyperparams {
    int episodes = 2000;
    int hidden1 = 128;
    int hidden2 = 128;
    double discount = 0.95;
    double learningRate = 0.001;
    std::size_t bufferCapacity = 10000;
    std::size_t batchSize = 64;
    double epsilonStart = 1.0;
    double epsilonEnd = 0.05;
    double annealFraction = 0.8;  // of episodes
    double nu = 1e-6;
    double gradClipNorm = 10.0;   // global L2 clip; <= 0 disables
    bool targetNetwork = false;   // optional periodically synced copy
    int targetSyncEvery = 50;     // episodes, when enabled
    std::uint64_t seed = 1;
};

struct EpisodeLog {
    int episode = 0;
    double epsilon = 0.0;
    double meanLoss = 0.0;
    double episodeReward = 0.0;
    double objective = 0.0;
};

struct TrainResult {
    QNetwork net;
    std::vector<EpisodeLog> log;
    std::vector<Transition> transitions;  // first episode, for contract tests
};

namespace detail {

struct EpisodeRollout {
    std::vector<Transition> transitions;
    double totalReward = 0.0;
    double objective = 0.0;
    std::vector<SlotRecord> trajectory;
};

// Runs one T-slot episode. `pickAction` maps a state to an action index.
template <typename PickAction>
EpisodeRollout rollEpisode(SlotEngine& eng, const std::vector<Assignment>& actions, double zeta,
                           double nu, PickAction&& pickAction) {
    const Scenario& sc = eng.scenario();
    EpisodeRollout out;
    AoiState aoi = AoiState::initial(sc);
    double powerSum = 0.0;
    std::vector<double> state = encodeState(aoi, eng.channel(1), sc);
    for (int t = 1; t <= sc.T; ++t) {
        const int a = pickAction(state);
        auto rec = eng.executeSlot(t, actions[static_cast<std::size_t>(a)]);
        aoi = stepAoi(aoi, rec.assignment, rec.success, sc.demand);
        rec.weightedAgeSlots = aoi.weightedAgeSlots(sc.demand);
        for (double p : rec.powers) powerSum += p;
        const double reward = slotReward(aoi, powerSum, sc, zeta, t, nu);
        Transition tr;
        tr.s = std::move(state);
        tr.action = a;
        tr.reward = reward;
        tr.terminal = (t == sc.T);
        state = encodeState(aoi, eng.channel(std::min(t + 1, sc.T)), sc);
        tr.sNext = state;
        out.transitions.push_back(std::move(tr));
        out.totalReward += reward;
        out.trajectory.push_back(std::move(rec));
    }
    out.objective = objective(averageAoi(aoi, sc.delta, sc.T), powerSum / sc.T, sc, zeta);
    return out;
}

}  // namespace detail

inline TrainResult trainAgent(const Scenario& sc, const DqnHyperparams& hp, double zeta) {
    if (hp.episodes < 1) throw std::invalid_argument("trainAgent: need at least one episode");
    SlotEngine eng(sc);
    const auto actions = enumerateActions(sc);
    const int stateDim = sc.V * (sc.F + 1);
    TrainResult res;
    res.net = QNetwork({stateDim, hp.hidden1, hp.hidden2, static_cast<int>(actions.size())},
                       derive_seed(hp.seed, 0));
    // Zero the output layer so every action starts with the same value
    // estimate; this removes the initial bias toward arbitrary actions when
    // bootstrapping with a max over many untrained heads.
    for (double& w : res.net.weights().back()) w = 0.0;
    QNetwork target = res.net;
    QNetwork bestNet = res.net;
    double bestGreedy = std::numeric_limits<double>::infinity();
    ReplayBuffer buffer(hp.bufferCapacity);
    std::mt19937_64 rng(derive_seed(hp.seed, 1));

    const int annealEpisodes = std::max(1, static_cast<int>(hp.annealFraction * hp.episodes));
    for (int ep = 1; ep <= hp.episodes; ++ep) {
        const double frac = std::min(1.0, static_cast<double>(ep - 1) / annealEpisodes);
        const double epsilon = hp.epsilonStart + frac * (hp.epsilonEnd - hp.epsilonStart);

        double lossSum = 0.0;
        int lossCount = 0;
        auto roll = detail::rollEpisode(eng, actions, zeta, hp.nu, [&](const std::vector<double>& s) {
            return actEpsilonGreedy(res.net, s, epsilon, rng);
        });
        for (auto& tr : roll.transitions) {
            if (ep == 1) res.transitions.push_back(tr);
            buffer.push(std::move(tr));
            if (buffer.size() >= hp.batchSize) {
                const auto idx = buffer.sampleIndices(hp.batchSize, rng);
                std::vector<const std::vector<double>*> states;
                std::vector<int> acts;
                std::vector<double> targets;
                states.reserve(idx.size());
                const QNetwork& boot = hp.targetNetwork ? target : res.net;
                for (std::size_t j : idx) {
                    const Transition& b = buffer.at(j);
                    double y = b.reward;
                    if (!b.terminal) {
                        const auto qn = boot.forward(b.sNext);
                        y += hp.discount * *std::max_element(qn.begin(), qn.end());
                    }
                    states.push_back(&b.s);
                    acts.push_back(b.action);
                    targets.push_back(y);
                }
                lossSum += res.net.trainStep(states, acts, targets, hp.learningRate, hp.gradClipNorm);
                ++lossCount;
            }
        }
        if (hp.targetNetwork && ep % hp.targetSyncEvery == 0) target = res.net;

        // Early-stopping checkpoint: keep the parameters whose greedy rollout
        // scores best, since later updates can degrade an already good policy.
        if (lossCount > 0) {
            const auto greedy = detail::rollEpisode(eng, actions, zeta, hp.nu,
                                                    [&](const std::vector<double>& s) {
                                                        return argmaxLowestIndex(res.net.forward(s));
                                                    });
            if (greedy.objective < bestGreedy) {
                bestGreedy = greedy.objective;
                bestNet = res.net;
            }
        }

        EpisodeLog log;
        log.episode = ep;
        log.epsilon = epsilon;
        log.meanLoss = lossCount ? lossSum / lossCount : 0.0;
        log.episodeReward = roll.totalReward;
        log.objective = roll.objective;
        res.log.push_back(log);
    }
    if (bestGreedy < std::numeric_limits<double>::infinity()) res.net = bestNet;
    return res;
}

struct PolicyStats {
    double meanObjective = 0.0;
    double stddevObjective = 0.0;
    double meanAvgAoi = 0.0;
    double meanAvgPower = 0.0;
    std::vector<SlotRecord> lastTrajectory;
};

inline PolicyStats evaluatePolicy(const QNetwork& net, const Scenario& sc, int episodes, double zeta,
                                  double nu = 1e-6) {
    if (episodes < 1) throw std::invalid_argument("evaluatePolicy: need at least one episode");
    SlotEngine eng(sc);
    const auto actions = enumerateActions(sc);
    PolicyStats st;
    std::vector<double> objs;
    for (int e = 0; e < episodes; ++e) {
        auto roll = detail::rollEpisode(eng, actions, zeta, nu, [&](const std::vector<double>& s) {
            return argmaxLowestIndex(net.forward(s));
        });
        objs.push_back(roll.objective);
        double powerSum = 0.0;
        std::int64_t lastCum = 0;
        for (const auto& rec : roll.trajectory) {
            for (double p : rec.powers) powerSum += p;
            lastCum += rec.weightedAgeSlots;
        }
        st.meanAvgAoi += sc.delta * static_cast<double>(lastCum) / sc.T;
        st.meanAvgPower += powerSum / sc.T;
        st.lastTrajectory = std::move(roll.trajectory);
    }
    for (double o : objs) st.meanObjective += o;
    st.meanObjective /= episodes;
    st.meanAvgAoi /= episodes;
    st.meanAvgPower /= episodes;
    double var = 0.0;
    for (double o : objs) var += (o - st.meanObjective) * (o - st.meanObjective);
    st.stddevObjective = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
    return st;
}

}  // namespace aoisim
