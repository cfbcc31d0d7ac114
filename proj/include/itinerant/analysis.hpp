#pragma once

#include "itinerant/feedback.hpp"
#include "itinerant/network.hpp"
#include "itinerant/readout.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace itinerant {

// Deterministic dynamical system under analysis. Implementations carry their
// own auxiliary state (e.g. the closed-loop refractory bookkeeping).
class Flow {
public:
    virtual ~Flow() = default;
    virtual void advance(double duration_ms) = 0;
    virtual const std::vector<double>& state_vector() const = 0;
    virtual void set_state_vector(const std::vector<double>& x) = 0;
    virtual std::unique_ptr<Flow> clone() const = 0;
};

// Creates an initialized flow for one trial (washout etc. happens inside).
using FlowFactory = std::function<std::unique_ptr<Flow>(Rng& trial_rng)>;

// Open-loop flow under a constant symbol (Symbol::none() = no input).
FlowFactory network_flow_factory(const Network& net, Symbol symbol,
                                 double washout_ms = 1000.0);
FlowFactory closed_loop_flow_factory(const Network& net,
                                     const Classifier& classifier,
                                     double warmup_ms = 1000.0,
                                     double hold_ms = 0.0,
                                     double washout_ms = 1000.0);
// Analytic map x(t+d) = step(x, d), for the oracle tests.
FlowFactory
analytic_flow_factory(int dims,
                      std::function<void(std::vector<double>&, double)> stepfn,
                      std::function<std::vector<double>(Rng&)> init);

struct MleOptions {
    double delta_t_ms = 1000.0;
    double t_horizon_ms = 1000000.0;
    double l_pert = 1e-6;
    int n_trials = 10;
    int n_threads = 1;
    std::uint64_t seed = 0x6d6c65ull;
};

struct LyapunovReport {
    double mle = 0.0;                 // per-ms log growth rate
    std::vector<double> trial_means;  // one per trial
    MleOptions params;
};

// Benettin-style estimate: evolve a reference and a perturbed copy, log the
// gap growth every delta_t, renormalize the gap to l_pert along the current
// difference direction.
LyapunovReport max_lyapunov(const FlowFactory& factory,
                            const MleOptions& options = {});

struct LleOptions {
    double epsilon = 1e-6;
    int n_trials = 10;
    int n_threads = 1;
    // Restrict perturbation directions to these state indices (empty = all).
    std::vector<int> perturb_indices;
    // Pre-switch alignment phase: evolve the perturbation under no input for
    // this long and renormalize the gap to epsilon at t = 0, so that the
    // curve measures expansion rather than the decay of the stable
    // components of an isotropic perturbation. 0 disables alignment.
    double align_ms = 0.0;
    std::uint64_t seed = 0x6c6c65ull;
};

// LLE(t) = <log(||x_pert(t) - x(t)|| / epsilon)> on the given time grid,
// averaged over trials.
std::vector<double> local_lyapunov_flow(const FlowFactory& factory,
                                        const std::vector<double>& t_grid,
                                        const LleOptions& options = {});

// Perturbation applied at the symbol-switch moment; by default restricted to
// the chaotic-ESN coordinates.
std::vector<double> local_lyapunov(const Network& net, Symbol symbol,
                                   const std::vector<double>& t_grid,
                                   LleOptions options = {},
                                   bool restrict_to_chaotic = true);

struct TimerOptions {
    double ridge_alpha = 1.0;
    int n_train_trials = 10;
    int n_test_trials = 10;
    double sigma_ms = 10.0;
    double margin_ms = 50.0; // evaluation window = [0, t_peak + margin]
    std::uint64_t seed = 0x746d72ull;
};

// Trains a dedicated pulse readout for the delayed Gaussian target and
// returns the mean squared Pearson correlation on held-out trials.
double timer_task(const Network& net, double t_peak_ms,
                  const TimerOptions& options = {}, Symbol symbol = Symbol{0});

struct TimerReport {
    std::vector<double> t_peaks;
    std::vector<double> r2;
    double capacity = 0.0; // trapezoidal integral, ms
};

TimerReport timer_profile(const Network& net,
                          const std::vector<double>& t_peak_grid,
                          const TimerOptions& options = {},
                          Symbol symbol = Symbol{0});

// Trapezoid rule over a sorted grid.
double timer_capacity(const std::vector<double>& t_peak_grid,
                      const std::vector<double>& r2_values);

struct TransitionStats {
    std::vector<std::vector<int>> counts;   // M x M switch counts
    std::vector<std::vector<double>> probs; // rows normalized (0 if unseen)
    std::vector<bool> row_observed;
    std::vector<double> dwell_mean_ms; // per symbol
    std::vector<double> dwell_std_ms;
    int n_switches = 0;
};

TransitionStats transition_stats(const std::vector<int>& symbol_stream,
                                 double dt);

struct PlaneSpec {
    int coord_a = 0; // chaotic-ESN coordinate indices
    int coord_b = 1;
    std::vector<double> center; // full state, length n_total
    double extent = 0.05;       // half-width in each direction
    int resolution = 51;
};

struct SymbolGrid {
    int resolution = 0;
    std::vector<int> cells; // row-major, -1 = diverged cell
    int n_symbols = 0;

    int at(int r, int c) const { return cells[r * resolution + c]; }
};

SymbolGrid terminal_symbol_grid(const Network& net,
                                const Classifier& classifier,
                                const PlaneSpec& plane, double horizon_ms,
                                double hold_ms = 0.0, int n_threads = 1);

// Shannon entropy (bits) of the empirical distribution of 3x3 window
// patterns, stride 1.
double grid_entropy(const SymbolGrid& grid);

double spectral_radius(const std::vector<double>& dense, int n);
double spectral_radius(const kernels::CsrMatrix& m, double scale = 1.0);

} // namespace itinerant
