#pragma once

#include "itinerant/network.hpp"
#include "itinerant/rng.hpp"
#include "itinerant/types.hpp"

#include <vector>

namespace itinerant {

// Transient profile projected onto the chaotic ESN after a symbol switch:
// t * exp(-(t/50)^2 / 2). Peak at t=50 ms, effectively zero by t=500 ms.
double transient_envelope(double dt_since_switch_ms);

// One Euler step of the two-part ESN. Holds scratch buffers, so reuse one
// instance per rollout.
class Stepper {
public:
    explicit Stepper(const Network& net);

    // x <- x + (dt/tau) * (-x + tanh(drive)), then t += dt.
    // drive_in = g_in * J_in x_in + u_in(s), drive_ch = g_ch * J_ch x_ch + J_ic x_in.
    // Throws DivergenceError if any component goes non-finite.
    void step(State& state, Symbol symbol);

private:
    const Network& net_;
    std::vector<double> drive_;
    std::vector<double> bridge_tmp_;
};

// Convenience single-step entry point.
State step(const Network& net, const State& state, Symbol symbol);

Trajectory run_open_loop(const Network& net, const SymbolSchedule& schedule,
                         const State& initial, int record_stride = 1);

// Random state (components uniform in (-1,1)) integrated for duration_ms
// under the given symbol (Symbol::none() = zero input). Returned with t = 0,
// ready to be used as a post-washout initial condition.
State washout(const Network& net, double duration_ms, Symbol symbol, Rng& rng);

struct BridgeTuneOptions {
    double washout_ms = 1000.0;
    double settle_ms = 500.0;  // time at the pre-switch symbol before switching
    double record_ms = 500.0;  // recorded window after each switch
    double ridge_scale = 1e-6; // lambda = ridge_scale * trace(X^T X) / n_in
    // Amplitude of the projected transient; any profile converging to 0
    // works, and small networks need a gentler cue so the transient does not
    // saturate the chaotic block outright.
    double envelope_scale = 1.0;
    int n_switch_events = 0;   // 0 = one event per ordered pair (M^2 total,
                               // diagonal pairs start from washout)
};

struct BridgeTuneReport {
    double relative_error = 0.0; // ||J_ic x_in - envelope target|| / ||target||
    int n_events = 0;
};

// Fit J_ic so that the bridge drive follows the transient envelope along v_s
// after every symbol switch. Only the input ESN is integrated (it does not
// depend on the chaotic part). Installs J_ic into net.
BridgeTuneReport tune_input_bridge(Network& net,
                                   const BridgeTuneOptions& options = {});

} // namespace itinerant
