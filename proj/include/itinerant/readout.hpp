#pragma once

#include "itinerant/network.hpp"
#include "itinerant/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace itinerant {

enum class TargetKind { lissajous, lorenz_xz, polyline_trace, gaussian_pulse };

TargetKind target_kind_from_string(const std::string& name);
std::string to_string(TargetKind kind);

// d_out x n_samples target signal on the dt grid.
struct TargetSignal {
    TargetKind kind = TargetKind::lissajous;
    double l_out_ms = 0.0;
    double dt = 1.0;
    std::vector<std::vector<double>> samples; // per output dim

    int dims() const { return static_cast<int>(samples.size()); }
    std::size_t n_samples() const {
        return samples.empty() ? 0 : samples[0].size();
    }
};

struct LissajousParams {
    double amp_x = 1.0, amp_y = 1.0;
    double freq_x = 1.0, freq_y = 2.0; // multiples of 2*pi/period
    double phase = 0.0;                // radians, applied to x
    double period_ms = 1000.0;
};

struct LorenzParams {
    double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    double dt_model = 0.01;     // RK4 step in model-time units
    double span_model = 0.0;    // 0 = one model-time unit per 10 ms
    std::vector<double> init = {1.0, 1.0, 1.0};
};

TargetSignal lissajous_target(const LissajousParams& p, double l_out_ms,
                              double dt);
// xz coordinates of a Lorenz trajectory, RK4-integrated, time-rescaled to
// span l_out_ms and affinely normalized into [-1, 1]^2.
TargetSignal lorenz_xz_target(const LorenzParams& p, double l_out_ms,
                              double dt);
// Constant-speed traversal of a closed polyline (e.g. a glyph trace).
TargetSignal polyline_target(const std::vector<std::pair<double, double>>& pts,
                             double l_out_ms, double dt);
// exp(-(t - t_peak)^2 / (2 * sigma^2)), sigma = 10 ms.
TargetSignal gaussian_pulse_target(double t_peak_ms, double l_out_ms,
                                   double dt, double sigma_ms = 10.0);

struct Readout {
    int dims = 0;
    int n_features = 0;
    std::vector<double> w; // dims x n_features, row-major
    double ridge_alpha = 1.0;
    double l_out_ms = 0.0;

    void apply(const double* x, double* y) const;
    std::vector<double> apply(const std::vector<double>& x) const;
};

// Solve (X^T X + alpha I) W = X^T F over the pooled samples; rows of
// features/targets are aligned. Throws if alpha == 0 and the gram matrix is
// singular.
Readout train_readout(const std::vector<std::vector<double>>& features,
                      const std::vector<std::vector<double>>& targets,
                      double ridge_alpha);

// Record n_trials post-washout rollouts of l_out_ms per symbol.
std::vector<std::vector<Trajectory>>
record_symbol_rollouts(const Network& net, double l_out_ms, int n_trials,
                       std::uint64_t trial_stream = 0x726f75ull);

// Fit one shared readout across all symbols from per-symbol rollouts.
Readout train_readout_for_symbols(
    const std::vector<std::vector<Trajectory>>& rollouts,
    const std::vector<TargetSignal>& targets, double ridge_alpha);

// Fresh-trial NMSE of w^T x against each symbol's target.
std::vector<double> evaluate_readout(const Network& net, const Readout& readout,
                                     const std::vector<TargetSignal>& targets,
                                     int n_trials,
                                     std::uint64_t trial_stream = 0x65766cull);

} // namespace itinerant
