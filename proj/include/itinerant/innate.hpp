#pragma once

#include "itinerant/dynamics.hpp"
#include "itinerant/network.hpp"

#include <limits>
#include <vector>

namespace itinerant {

// Per-symbol recorded chaotic responses of the untrained network, used as
// training targets (the "innate" trajectories).
struct InnateTargets {
    double l_innate_ms = 0.0;
    // per symbol: rows() = L/dt samples of the full state [x_in; x_ch]
    std::vector<std::vector<std::vector<double>>> per_symbol;
    std::vector<State> initial_states; // washed-out x(0) per symbol

    int n_symbols() const { return static_cast<int>(per_symbol.size()); }
    std::size_t n_samples() const {
        return per_symbol.empty() ? 0 : per_symbol[0].size();
    }
};

InnateTargets record_innate_targets(const Network& net, double l_innate_ms,
                                    double washout_ms = 1000.0);

// One recursive-least-squares step for a single trained row, restricted to
// its presynaptic set. p is a k x k row-major inverse-correlation matrix.
// Writes the weight decrement e_i * (P x_b) to delta_j (length k) and applies
// the rank-1 Sherman-Morrison update to p in place.
void rls_update(std::vector<double>& p, int k, const double* x_b, double e_i,
                double* delta_j);

struct InnateTrainOptions {
    int epochs = 200;
    int update_stride = 2;      // apply updates every update_stride-th sample
    double washout_ms = 1000.0;
    double trained_fraction = 0.5; // |A| = trained_fraction * n_ch
};

struct TrainReport {
    std::vector<double> epoch_costs; // C_1-in per epoch (inf = diverged epoch)
    int best_epoch = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    double nmse_before = 0.0;
    double nmse_after = 0.0;
};

// Algorithm: for every epoch, wash out one state per symbol, then integrate
// all symbol rollouts in lockstep; every update_stride-th sample, each trained
// row i in A receives an RLS update driven by e_i = x_i(t) - target_i(t).
// P matrices persist across epochs and symbols. The J_ch snapshot of the
// minimum-cost epoch is installed into net on return; the cost is evaluated
// on a fresh rollout after each epoch.
TrainReport innate_train(Network& net, const InnateTargets& targets,
                         const InnateTrainOptions& options = {});

// Set A of trained chaotic node indices, a deterministic function of the
// network seed.
std::vector<int> trained_node_set(const Network& net, double fraction = 0.5);

// Mean over symbols of <integral ||x - target||^2 / integral ||target||^2>
// over n_trials fresh washout initializations, on the chaotic block.
double nmse(const Network& net, const InnateTargets& targets, int n_trials = 10,
            std::uint64_t trial_stream = 0x6e6d7365ull);

} // namespace itinerant
