#include "itinerant/readout.hpp"

#include "itinerant/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace itinerant {

TargetKind target_kind_from_string(const std::string& name) {
    if (name == "lissajous")
        return TargetKind::lissajous;
    if (name == "lorenz_xz")
        return TargetKind::lorenz_xz;
    if (name == "polyline_trace")
        return TargetKind::polyline_trace;
    if (name == "gaussian_pulse")
        return TargetKind::gaussian_pulse;
    throw ConfigError("unknown target kind: " + name);
}

std::string to_string(TargetKind kind) {
    switch (kind) {
    case TargetKind::lissajous: return "lissajous";
    case TargetKind::lorenz_xz: return "lorenz_xz";
    case TargetKind::polyline_trace: return "polyline_trace";
    case TargetKind::gaussian_pulse: return "gaussian_pulse";
    }
    return "?";
}

TargetSignal lissajous_target(const LissajousParams& p, double l_out_ms,
                              double dt) {
    TargetSignal sig;
    sig.kind = TargetKind::lissajous;
    sig.l_out_ms = l_out_ms;
    sig.dt = dt;
    const auto n = static_cast<std::size_t>(l_out_ms / dt + 0.5);
    const double omega = 2.0 * std::numbers::pi / p.period_ms;
    sig.samples.assign(2, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k * dt;
        sig.samples[0][k] = p.amp_x * std::sin(p.freq_x * omega * t + p.phase);
        sig.samples[1][k] = p.amp_y * std::sin(p.freq_y * omega * t);
    }
    return sig;
}

TargetSignal lorenz_xz_target(const LorenzParams& p, double l_out_ms,
                              double dt) {
    TargetSignal sig;
    sig.kind = TargetKind::lorenz_xz;
    sig.l_out_ms = l_out_ms;
    sig.dt = dt;
    const auto n = static_cast<std::size_t>(l_out_ms / dt + 0.5);
    const double span =
        p.span_model > 0.0 ? p.span_model : l_out_ms / 10.0;

    auto deriv = [&p](const double s[3], double d[3]) {
        d[0] = p.sigma * (s[1] - s[0]);
        d[1] = s[0] * (p.rho - s[2]) - s[1];
        d[2] = s[0] * s[1] - p.beta * s[2];
    };

    // RK4 at dt_model, recording x and z.
    const auto n_model = static_cast<std::size_t>(span / p.dt_model + 0.5);
    std::vector<double> xs(n_model + 1), zs(n_model + 1);
    double s[3] = {p.init[0], p.init[1], p.init[2]};
    xs[0] = s[0];
    zs[0] = s[2];
    for (std::size_t k = 0; k < n_model; ++k) {
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        deriv(s, k1);
        for (int i = 0; i < 3; ++i)
            tmp[i] = s[i] + 0.5 * p.dt_model * k1[i];
        deriv(tmp, k2);
        for (int i = 0; i < 3; ++i)
            tmp[i] = s[i] + 0.5 * p.dt_model * k2[i];
        deriv(tmp, k3);
        for (int i = 0; i < 3; ++i)
            tmp[i] = s[i] + p.dt_model * k3[i];
        deriv(tmp, k4);
        for (int i = 0; i < 3; ++i)
            s[i] += p.dt_model / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        xs[k + 1] = s[0];
        zs[k + 1] = s[2];
    }

    auto normalize = [](std::vector<double>& v) {
        const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
        const double lo = *lo_it, span_v = *hi_it - *lo_it;
        if (span_v <= 0.0)
            return;
        for (auto& x : v)
            x = 2.0 * (x - lo) / span_v - 1.0;
    };
    normalize(xs);
    normalize(zs);

    // Linear time rescale onto the dt grid.
    sig.samples.assign(2, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double pos = n > 1
                               ? static_cast<double>(k) / (n - 1) * n_model
                               : 0.0;
        const auto i0 = static_cast<std::size_t>(pos);
        const std::size_t i1 = std::min(i0 + 1, n_model);
        const double w = pos - i0;
        sig.samples[0][k] = (1.0 - w) * xs[i0] + w * xs[i1];
        sig.samples[1][k] = (1.0 - w) * zs[i0] + w * zs[i1];
    }
    return sig;
}

TargetSignal polyline_target(const std::vector<std::pair<double, double>>& pts,
                             double l_out_ms, double dt) {
    if (pts.empty())
        throw ConfigError("empty polyline");
    TargetSignal sig;
    sig.kind = TargetKind::polyline_trace;
    sig.l_out_ms = l_out_ms;
    sig.dt = dt;
    const auto n = static_cast<std::size_t>(l_out_ms / dt + 0.5);
    sig.samples.assign(2, std::vector<double>(n));

    // Closed traversal: append the first point at the end.
    std::vector<std::pair<double, double>> poly = pts;
    poly.push_back(pts.front());
    std::vector<double> arc(poly.size(), 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) {
        const double dx = poly[i].first - poly[i - 1].first;
        const double dy = poly[i].second - poly[i - 1].second;
        arc[i] = arc[i - 1] + std::hypot(dx, dy);
    }
    const double total = arc.back();
    for (std::size_t k = 0; k < n; ++k) {
        const double target =
            total > 0.0 ? (static_cast<double>(k) / n) * total : 0.0;
        std::size_t seg = 1;
        while (seg < arc.size() - 1 && arc[seg] < target)
            ++seg;
        const double seg_len = arc[seg] - arc[seg - 1];
        const double w = seg_len > 0.0 ? (target - arc[seg - 1]) / seg_len : 0.0;
        sig.samples[0][k] =
            (1.0 - w) * poly[seg - 1].first + w * poly[seg].first;
        sig.samples[1][k] =
            (1.0 - w) * poly[seg - 1].second + w * poly[seg].second;
    }
    return sig;
}

TargetSignal gaussian_pulse_target(double t_peak_ms, double l_out_ms, double dt,
                                   double sigma_ms) {
    TargetSignal sig;
    sig.kind = TargetKind::gaussian_pulse;
    sig.l_out_ms = l_out_ms;
    sig.dt = dt;
    const auto n = static_cast<std::size_t>(l_out_ms / dt + 0.5);
    sig.samples.assign(1, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double d = k * dt - t_peak_ms;
        sig.samples[0][k] = std::exp(-d * d / (2.0 * sigma_ms * sigma_ms));
    }
    return sig;
}

void Readout::apply(const double* x, double* y) const {
    const auto& ops = kernels::active();
    for (int d = 0; d < dims; ++d)
        y[d] = ops.dot(w.data() + static_cast<std::size_t>(d) * n_features, x,
                       n_features);
}

std::vector<double> Readout::apply(const std::vector<double>& x) const {
    std::vector<double> y(dims);
    apply(x.data(), y.data());
    return y;
}

Readout train_readout(const std::vector<std::vector<double>>& features,
                      const std::vector<std::vector<double>>& targets,
                      double ridge_alpha) {
    if (features.empty() || features.size() != targets.size())
        throw ConfigError("feature/target row mismatch");
    const auto n_rows = static_cast<Eigen::Index>(features.size());
    const auto n_feat = static_cast<Eigen::Index>(features[0].size());
    const auto n_dims = static_cast<Eigen::Index>(targets[0].size());

    Eigen::MatrixXd x(n_rows, n_feat), f(n_rows, n_dims);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        x.row(r) =
            Eigen::Map<const Eigen::VectorXd>(features[r].data(), n_feat);
        f.row(r) = Eigen::Map<const Eigen::VectorXd>(targets[r].data(), n_dims);
    }

    Eigen::MatrixXd gram = x.transpose() * x;
    if (ridge_alpha == 0.0) {
        if (Eigen::FullPivLU<Eigen::MatrixXd>(gram).rank() < n_feat)
            throw ConfigError(
                "X^T X is singular; use ridge_alpha > 0");
    } else if (ridge_alpha < 0.0) {
        throw ConfigError("ridge_alpha must be >= 0");
    }
    gram.diagonal().array() += ridge_alpha;
    Eigen::MatrixXd wt = gram.ldlt().solve(x.transpose() * f); // n_feat x dims

    Readout readout;
    readout.dims = static_cast<int>(n_dims);
    readout.n_features = static_cast<int>(n_feat);
    readout.ridge_alpha = ridge_alpha;
    readout.w.resize(static_cast<std::size_t>(n_dims) * n_feat);
    for (Eigen::Index d = 0; d < n_dims; ++d)
        for (Eigen::Index j = 0; j < n_feat; ++j)
            readout.w[static_cast<std::size_t>(d) * n_feat + j] = wt(j, d);
    return readout;
}

std::vector<std::vector<Trajectory>>
record_symbol_rollouts(const Network& net, double l_out_ms, int n_trials,
                       std::uint64_t trial_stream) {
    Rng root = Rng(net.config.seed).fork(trial_stream);
    std::vector<std::vector<Trajectory>> rollouts(net.n_symbols);
    for (int s = 0; s < net.n_symbols; ++s) {
        for (int trial = 0; trial < n_trials; ++trial) {
            Rng rng = root.fork(static_cast<std::uint64_t>(s) * 1000 + trial);
            State init = washout(net, 1000.0, Symbol::none(), rng);
            rollouts[s].push_back(run_open_loop(
                net, SymbolSchedule::constant(Symbol{s}, l_out_ms), init));
        }
    }
    return rollouts;
}

Readout train_readout_for_symbols(
    const std::vector<std::vector<Trajectory>>& rollouts,
    const std::vector<TargetSignal>& targets, double ridge_alpha) {
    std::vector<std::vector<double>> features;
    std::vector<std::vector<double>> target_rows;
    for (std::size_t s = 0; s < rollouts.size(); ++s) {
        const TargetSignal& sig = targets[s];
        for (const Trajectory& traj : rollouts[s]) {
            const std::size_t n =
                std::min(traj.rows(), sig.n_samples());
            for (std::size_t k = 0; k < n; ++k) {
                features.push_back(traj.states[k]);
                std::vector<double> row(sig.dims());
                for (int d = 0; d < sig.dims(); ++d)
                    row[d] = sig.samples[d][k];
                target_rows.push_back(std::move(row));
            }
        }
    }
    Readout readout = train_readout(features, target_rows, ridge_alpha);
    readout.l_out_ms = targets.empty() ? 0.0 : targets[0].l_out_ms;
    return readout;
}

std::vector<double> evaluate_readout(const Network& net, const Readout& readout,
                                     const std::vector<TargetSignal>& targets,
                                     int n_trials,
                                     std::uint64_t trial_stream) {
    Rng root = Rng(net.config.seed).fork(trial_stream);
    std::vector<double> result;
    for (int s = 0; s < static_cast<int>(targets.size()); ++s) {
        const TargetSignal& sig = targets[s];
        double denom = 0.0;
        for (int d = 0; d < sig.dims(); ++d)
            for (double v : sig.samples[d])
                denom += v * v;
        double trial_mean = 0.0;
        for (int trial = 0; trial < n_trials; ++trial) {
            Rng rng = root.fork(static_cast<std::uint64_t>(s) * 1000 + trial);
            State state = washout(net, 1000.0, Symbol::none(), rng);
            Stepper stepper(net);
            std::vector<double> y(sig.dims());
            double num = 0.0;
            for (std::size_t k = 0; k < sig.n_samples(); ++k) {
                readout.apply(state.x.data(), y.data());
                for (int d = 0; d < sig.dims(); ++d) {
                    const double diff = y[d] - sig.samples[d][k];
                    num += diff * diff;
                }
                stepper.step(state, Symbol{s});
            }
            trial_mean += denom > 0.0 ? num / denom : num;
        }
        result.push_back(trial_mean / n_trials);
    }
    return result;
}

} // namespace itinerant
