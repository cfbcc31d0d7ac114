#pragma once

#include "itinerant/dynamics.hpp"
#include "itinerant/lbfgs.hpp"
#include "itinerant/network.hpp"
#include "itinerant/readout.hpp"

#include <optional>
#include <tuple>
#include <vector>

namespace itinerant {

// Softmax feedback: s(t) = argmax_s w_s . x(t), ties broken by lowest id.
struct Classifier {
    int n_symbols = 0;
    int n_features = 0; // n_total (+1 when has_bias)
    bool has_bias = true;
    std::vector<double> w; // n_symbols x n_features, row-major

    Symbol classify(const std::vector<double>& x) const;
};

// Row-stochastic transition matrix with a fixed dwell interval.
struct Fsm {
    std::vector<std::vector<double>> p; // M x M
    double dwell_ms = 0.0;

    void validate() const;
    // Uniform switching among M symbols, no self-transitions.
    static Fsm uniform_no_self(int m, double dwell_ms);
};

SymbolSchedule make_periodic_schedule(const std::vector<Symbol>& sequence,
                                      double t_ms, double duration_ms);

SymbolSchedule sample_fsm_schedule(const Fsm& fsm, double duration_ms,
                                   Rng& rng);

struct TrainingSet {
    std::vector<std::vector<double>> x; // recorded states
    std::vector<int> labels;            // aligned symbol ids
    double dt_eff = 1.0;                // dt * stride, the quadrature weight
};

// One long open-loop rollout after washout, subsampled by stride.
TrainingSet record_training_set(const Network& net,
                                const SymbolSchedule& schedule,
                                double t_rec_ms = 500000.0, int stride = 1,
                                double washout_ms = 1000.0);

struct ClassifierTrainOptions {
    double l2_penalty = 1e-6;
    bool bias = true;
    LbfgsOptions optimizer;
};

struct ClassifierTrainReport {
    double final_loss = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double train_accuracy = 0.0;
};

Classifier train_classifier(const TrainingSet& data,
                            const ClassifierTrainOptions& options = {},
                            ClassifierTrainReport* report = nullptr);

// Multinomial cross-entropy (dt-weighted) + l2 * sum ||w_s||^2 and its
// gradient, exposed for the finite-difference checks.
double classifier_loss(const TrainingSet& data, const std::vector<double>& w,
                       int n_symbols, int n_features, bool bias,
                       double l2_penalty, std::vector<double>* grad);

struct ClosedLoopResult {
    Trajectory trajectory;               // states + realized symbols
    std::vector<std::vector<double>> outputs; // w_out^T x, empty w/o readout
    std::vector<std::tuple<double, int, int>> switches; // (t, from, to)
};

// At every step the classifier picks the symbol from the current state
// (held fixed for hold_ms after each switch), then the dynamics advance.
ClosedLoopResult run_closed_loop(const Network& net, const Readout* readout,
                                 const Classifier& classifier,
                                 const State& initial, double duration_ms,
                                 double hold_ms = 0.0, int record_stride = 1);

// Stateful closed-loop integrator, used by the Lyapunov analyses.
class ClosedLoopFlow {
public:
    ClosedLoopFlow(const Network& net, const Classifier& classifier,
                   const State& initial, double hold_ms = 0.0);

    void advance(double duration_ms);
    const std::vector<double>& state_vector() const { return state_.x; }
    // Resets the network state, keeping the refractory bookkeeping.
    void set_state_vector(const std::vector<double>& x) { state_.x = x; }
    Symbol current_symbol() const { return current_; }

private:
    const Network& net_;
    const Classifier& classifier_;
    Stepper stepper_;
    State state_;
    double hold_ms_;
    Symbol current_ = Symbol::none();
    double hold_until_ = -1.0;
};

} // namespace itinerant
