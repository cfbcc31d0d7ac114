#include "itinerant/analysis.hpp"

#include "itinerant/dynamics.hpp"
#include "itinerant/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace itinerant {
namespace {

class NetworkFlow final : public Flow {
public:
    NetworkFlow(const Network& net, Symbol symbol, State state)
        : net_(net), symbol_(symbol), stepper_(net), state_(std::move(state)) {}
    NetworkFlow(const NetworkFlow& o)
        : net_(o.net_), symbol_(o.symbol_), stepper_(o.net_), state_(o.state_) {}

    void advance(double duration_ms) override {
        const auto n =
            static_cast<std::size_t>(duration_ms / net_.config.dt + 0.5);
        for (std::size_t k = 0; k < n; ++k)
            stepper_.step(state_, symbol_);
    }
    const std::vector<double>& state_vector() const override {
        return state_.x;
    }
    void set_state_vector(const std::vector<double>& x) override {
        state_.x = x;
    }
    std::unique_ptr<Flow> clone() const override {
        return std::make_unique<NetworkFlow>(*this);
    }

private:
    const Network& net_;
    Symbol symbol_;
    Stepper stepper_;
    State state_;
};

class ClosedFlow final : public Flow {
public:
    ClosedFlow(const Network& net, const Classifier& classifier,
               const State& initial, double hold_ms)
        : inner_(net, classifier, initial, hold_ms) {}

    void advance(double duration_ms) override { inner_.advance(duration_ms); }
    const std::vector<double>& state_vector() const override {
        return inner_.state_vector();
    }
    void set_state_vector(const std::vector<double>& x) override {
        inner_.set_state_vector(x);
    }
    std::unique_ptr<Flow> clone() const override {
        return std::make_unique<ClosedFlow>(*this);
    }

private:
    ClosedLoopFlow inner_;
};

class AnalyticFlow final : public Flow {
public:
    AnalyticFlow(std::vector<double> x,
                 std::function<void(std::vector<double>&, double)> stepfn)
        : x_(std::move(x)), step_(std::move(stepfn)) {}

    void advance(double duration_ms) override { step_(x_, duration_ms); }
    const std::vector<double>& state_vector() const override { return x_; }
    void set_state_vector(const std::vector<double>& x) override { x_ = x; }
    std::unique_ptr<Flow> clone() const override {
        return std::make_unique<AnalyticFlow>(*this);
    }

private:
    std::vector<double> x_;
    std::function<void(std::vector<double>&, double)> step_;
};

double gap_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<double> random_direction(Rng& rng, std::size_t dims,
                                     const std::vector<int>& indices,
                                     double norm) {
    std::vector<double> dir(dims, 0.0);
    double acc = 0.0;
    if (indices.empty()) {
        for (auto& v : dir) {
            v = rng.normal();
            acc += v * v;
        }
    } else {
        for (int i : indices) {
            dir[i] = rng.normal();
            acc += dir[i] * dir[i];
        }
    }
    const double scale = norm / std::sqrt(acc);
    for (auto& v : dir)
        v *= scale;
    return dir;
}

} // namespace

FlowFactory network_flow_factory(const Network& net, Symbol symbol,
                                 double washout_ms) {
    return [&net, symbol, washout_ms](Rng& rng) -> std::unique_ptr<Flow> {
        State init = washout(net, washout_ms, Symbol::none(), rng);
        return std::make_unique<NetworkFlow>(net, symbol, std::move(init));
    };
}

FlowFactory closed_loop_flow_factory(const Network& net,
                                     const Classifier& classifier,
                                     double warmup_ms, double hold_ms,
                                     double washout_ms) {
    return [&net, &classifier, warmup_ms, hold_ms,
            washout_ms](Rng& rng) -> std::unique_ptr<Flow> {
        State init = washout(net, washout_ms, Symbol::none(), rng);
        auto flow =
            std::make_unique<ClosedFlow>(net, classifier, init, hold_ms);
        if (warmup_ms > 0.0)
            flow->advance(warmup_ms);
        return flow;
    };
}

FlowFactory
analytic_flow_factory(int dims,
                      std::function<void(std::vector<double>&, double)> stepfn,
                      std::function<std::vector<double>(Rng&)> init) {
    return [dims, stepfn, init](Rng& rng) -> std::unique_ptr<Flow> {
        std::vector<double> x0 =
            init ? init(rng) : std::vector<double>(dims, 0.0);
        return std::make_unique<AnalyticFlow>(std::move(x0), stepfn);
    };
}

LyapunovReport max_lyapunov(const FlowFactory& factory,
                            const MleOptions& options) {
    LyapunovReport report;
    report.params = options;
    report.trial_means.assign(options.n_trials, 0.0);
    Rng root(options.seed);

    std::vector<std::exception_ptr> errors(options.n_trials);
    parallel_for(options.n_trials, options.n_threads, [&](int trial) {
        try {
            Rng rng = root.fork(trial);
            auto reference = factory(rng);
            auto perturbed = reference->clone();
            const std::size_t dims = reference->state_vector().size();
            std::vector<double> dir =
                random_direction(rng, dims, {}, options.l_pert);
            std::vector<double> y0 = reference->state_vector();
            for (std::size_t i = 0; i < dims; ++i)
                y0[i] += dir[i];
            perturbed->set_state_vector(y0);

            double sum = 0.0;
            int count = 0;
            for (double t = 0.0; t < options.t_horizon_ms;
                 t += options.delta_t_ms) {
                reference->advance(options.delta_t_ms);
                perturbed->advance(options.delta_t_ms);
                const double gap = gap_norm(perturbed->state_vector(),
                                            reference->state_vector());
                if (gap <= 0.0)
                    throw std::runtime_error(
                        "perturbation gap underflowed to 0; increase l_pert");
                sum += std::log(gap / options.l_pert) / options.delta_t_ms;
                ++count;
                // renormalize along the current difference direction
                std::vector<double> y = reference->state_vector();
                const auto& x = reference->state_vector();
                const auto& yp = perturbed->state_vector();
                const double scale = options.l_pert / gap;
                for (std::size_t i = 0; i < dims; ++i)
                    y[i] = x[i] + scale * (yp[i] - x[i]);
                perturbed->set_state_vector(y);
            }
            report.trial_means[trial] = sum / count;
        } catch (...) {
            errors[trial] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    double total = 0.0;
    for (double v : report.trial_means)
        total += v;
    report.mle = total / options.n_trials;
    return report;
}

std::vector<double> local_lyapunov_flow(const FlowFactory& factory,
                                        const std::vector<double>& t_grid,
                                        const LleOptions& options) {
    std::vector<double> lle(t_grid.size(), 0.0);
    Rng root(options.seed);
    std::vector<std::vector<double>> per_trial(options.n_trials);
    std::vector<std::exception_ptr> errors(options.n_trials);

    parallel_for(options.n_trials, options.n_threads, [&](int trial) {
        try {
            Rng rng = root.fork(trial);
            auto reference = factory(rng);
            auto perturbed = reference->clone();
            const std::size_t dims = reference->state_vector().size();
            std::vector<double> dir = random_direction(
                rng, dims, options.perturb_indices, options.epsilon);
            std::vector<double> y0 = reference->state_vector();
            for (std::size_t i = 0; i < dims; ++i)
                y0[i] += dir[i];
            perturbed->set_state_vector(y0);

            std::vector<double> values(t_grid.size());
            double t = 0.0;
            for (std::size_t g = 0; g < t_grid.size(); ++g) {
                const double dt_advance = t_grid[g] - t;
                if (dt_advance < 0.0)
                    throw std::invalid_argument("t_grid must be sorted");
                if (dt_advance > 0.0) {
                    reference->advance(dt_advance);
                    perturbed->advance(dt_advance);
                    t = t_grid[g];
                }
                const double gap = gap_norm(perturbed->state_vector(),
                                            reference->state_vector());
                values[g] = std::log(gap / options.epsilon);
            }
            per_trial[trial] = std::move(values);
        } catch (...) {
            errors[trial] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    for (const auto& values : per_trial)
        for (std::size_t g = 0; g < lle.size(); ++g)
            lle[g] += values[g];
    for (auto& v : lle)
        v /= options.n_trials;
    return lle;
}

namespace {

// Alignment-phase variant: the perturbation is applied align_ms before the
// symbol switch, evolved under no input so it settles onto the expanding
// directions, and renormalized to epsilon at the switch (t = 0).
std::vector<double> local_lyapunov_aligned(const Network& net, Symbol symbol,
                                           const std::vector<double>& t_grid,
                                           const LleOptions& options) {
    std::vector<double> lle(t_grid.size(), 0.0);
    Rng root(options.seed);
    std::vector<std::vector<double>> per_trial(options.n_trials);
    std::vector<std::exception_ptr> errors(options.n_trials);

    parallel_for(options.n_trials, options.n_threads, [&](int trial) {
        try {
            Rng rng = root.fork(trial);
            State ref = washout(net, 1000.0, Symbol::none(), rng);
            const std::size_t dims = ref.x.size();
            std::vector<double> dir = random_direction(
                rng, dims, options.perturb_indices, options.epsilon);
            State pert = ref;
            for (std::size_t i = 0; i < dims; ++i)
                pert.x[i] += dir[i];

            Stepper ref_stepper(net), pert_stepper(net);
            const auto n_align = static_cast<std::size_t>(
                options.align_ms / net.config.dt + 0.5);
            for (std::size_t k = 0; k < n_align; ++k) {
                ref_stepper.step(ref, Symbol::none());
                pert_stepper.step(pert, Symbol::none());
            }
            const double aligned_gap = gap_norm(pert.x, ref.x);
            if (aligned_gap <= 0.0)
                throw std::runtime_error(
                    "perturbation gap underflowed to 0 during alignment; "
                    "increase epsilon or reduce align_ms");
            const double rescale = options.epsilon / aligned_gap;
            for (std::size_t i = 0; i < dims; ++i)
                pert.x[i] = ref.x[i] + rescale * (pert.x[i] - ref.x[i]);
            ref.t = 0.0;
            pert.t = 0.0;

            std::vector<double> values(t_grid.size());
            double t = 0.0;
            for (std::size_t g = 0; g < t_grid.size(); ++g) {
                if (t_grid[g] < t)
                    throw std::invalid_argument("t_grid must be sorted");
                while (t + 0.5 * net.config.dt < t_grid[g]) {
                    ref_stepper.step(ref, symbol);
                    pert_stepper.step(pert, symbol);
                    t += net.config.dt;
                }
                values[g] =
                    std::log(gap_norm(pert.x, ref.x) / options.epsilon);
            }
            per_trial[trial] = std::move(values);
        } catch (...) {
            errors[trial] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    for (const auto& values : per_trial)
        for (std::size_t g = 0; g < lle.size(); ++g)
            lle[g] += values[g];
    for (auto& v : lle)
        v /= options.n_trials;
    return lle;
}

} // namespace

std::vector<double> local_lyapunov(const Network& net, Symbol symbol,
                                   const std::vector<double>& t_grid,
                                   LleOptions options,
                                   bool restrict_to_chaotic) {
    if (restrict_to_chaotic && options.perturb_indices.empty()) {
        options.perturb_indices.resize(net.n_ch());
        for (int i = 0; i < net.n_ch(); ++i)
            options.perturb_indices[i] = net.n_in() + i;
    }
    if (options.align_ms > 0.0)
        return local_lyapunov_aligned(net, symbol, t_grid, options);
    return local_lyapunov_flow(network_flow_factory(net, symbol), t_grid,
                               options);
}

namespace {

double squared_pearson(const std::vector<double>& a,
                       const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0)
        return 0.0; // degenerate variance
    return (cov * cov) / (va * vb);
}

} // namespace

double timer_task(const Network& net, double t_peak_ms,
                  const TimerOptions& options, Symbol symbol) {
    const double dt = net.config.dt;
    const double window_ms = t_peak_ms + options.margin_ms;
    TargetSignal pulse =
        gaussian_pulse_target(t_peak_ms, window_ms, dt, options.sigma_ms);

    Rng root = Rng(net.config.seed).fork(options.seed);
    auto rollout = [&](Rng& rng) {
        State init = washout(net, 1000.0, Symbol::none(), rng);
        return run_open_loop(
            net, SymbolSchedule::constant(symbol, window_ms), init);
    };

    std::vector<std::vector<double>> features, targets;
    for (int trial = 0; trial < options.n_train_trials; ++trial) {
        Rng rng = root.fork(trial);
        Trajectory traj = rollout(rng);
        for (std::size_t k = 0; k < traj.rows(); ++k) {
            features.push_back(std::move(traj.states[k]));
            targets.push_back({pulse.samples[0][k]});
        }
    }
    Readout readout = train_readout(features, targets, options.ridge_alpha);

    double r2_sum = 0.0;
    for (int trial = 0; trial < options.n_test_trials; ++trial) {
        Rng rng = root.fork(1000 + trial);
        Trajectory traj = rollout(rng);
        std::vector<double> out(traj.rows());
        for (std::size_t k = 0; k < traj.rows(); ++k)
            out[k] = readout.apply(traj.states[k])[0];
        r2_sum += squared_pearson(out, pulse.samples[0]);
    }
    return r2_sum / options.n_test_trials;
}

TimerReport timer_profile(const Network& net,
                          const std::vector<double>& t_peak_grid,
                          const TimerOptions& options, Symbol symbol) {
    TimerReport report;
    report.t_peaks = t_peak_grid;
    report.r2.resize(t_peak_grid.size());
    for (std::size_t i = 0; i < t_peak_grid.size(); ++i)
        report.r2[i] = timer_task(net, t_peak_grid[i], options, symbol);
    report.capacity = timer_capacity(report.t_peaks, report.r2);
    return report;
}

double timer_capacity(const std::vector<double>& t_peak_grid,
                      const std::vector<double>& r2_values) {
    if (t_peak_grid.size() != r2_values.size() || t_peak_grid.size() < 2)
        throw std::invalid_argument("capacity needs a grid of >= 2 points");
    if (!std::is_sorted(t_peak_grid.begin(), t_peak_grid.end()))
        throw std::invalid_argument("t_peak grid must be sorted");
    double acc = 0.0;
    for (std::size_t i = 1; i < t_peak_grid.size(); ++i)
        acc += 0.5 * (r2_values[i] + r2_values[i - 1]) *
               (t_peak_grid[i] - t_peak_grid[i - 1]);
    return acc;
}

TransitionStats transition_stats(const std::vector<int>& symbol_stream,
                                 double dt) {
    if (symbol_stream.size() < 2)
        throw std::invalid_argument("symbol stream too short");
    int m = 0;
    for (int s : symbol_stream)
        m = std::max(m, s + 1);

    TransitionStats stats;
    stats.counts.assign(m, std::vector<int>(m, 0));
    std::vector<std::vector<double>> dwells(m);

    int current = symbol_stream[0];
    std::size_t run_start = 0;
    for (std::size_t k = 1; k < symbol_stream.size(); ++k) {
        if (symbol_stream[k] != current) {
            if (current >= 0) {
                if (symbol_stream[k] >= 0) {
                    ++stats.counts[current][symbol_stream[k]];
                    ++stats.n_switches;
                }
                dwells[current].push_back((k - run_start) * dt);
            }
            current = symbol_stream[k];
            run_start = k;
        }
    }

    stats.probs.assign(m, std::vector<double>(m, 0.0));
    stats.row_observed.assign(m, false);
    for (int i = 0; i < m; ++i) {
        int row_total = 0;
        for (int j = 0; j < m; ++j)
            row_total += stats.counts[i][j];
        if (row_total > 0) {
            stats.row_observed[i] = true;
            for (int j = 0; j < m; ++j)
                stats.probs[i][j] =
                    static_cast<double>(stats.counts[i][j]) / row_total;
        }
    }

    stats.dwell_mean_ms.assign(m, 0.0);
    stats.dwell_std_ms.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        if (dwells[i].empty())
            continue;
        double mean = 0.0;
        for (double d : dwells[i])
            mean += d;
        mean /= dwells[i].size();
        double var = 0.0;
        for (double d : dwells[i])
            var += (d - mean) * (d - mean);
        stats.dwell_mean_ms[i] = mean;
        stats.dwell_std_ms[i] = std::sqrt(var / dwells[i].size());
    }
    return stats;
}

SymbolGrid terminal_symbol_grid(const Network& net,
                                const Classifier& classifier,
                                const PlaneSpec& plane, double horizon_ms,
                                double hold_ms, int n_threads) {
    if (static_cast<int>(plane.center.size()) != net.n_total())
        throw ConfigError("plane center state has wrong dimension");
    const int res = plane.resolution;
    SymbolGrid grid;
    grid.resolution = res;
    grid.n_symbols = classifier.n_symbols;
    grid.cells.assign(static_cast<std::size_t>(res) * res, -1);

    parallel_for(res * res, n_threads, [&](int cell) {
        const int r = cell / res;
        const int c = cell % res;
        State state;
        state.x = plane.center;
        state.t = 0.0;
        const double da =
            res > 1 ? -plane.extent + 2.0 * plane.extent * r / (res - 1) : 0.0;
        const double db =
            res > 1 ? -plane.extent + 2.0 * plane.extent * c / (res - 1) : 0.0;
        state.x[net.n_in() + plane.coord_a] += da;
        state.x[net.n_in() + plane.coord_b] += db;
        try {
            ClosedLoopFlow flow(net, classifier, state, hold_ms);
            if (horizon_ms > 0.0)
                flow.advance(horizon_ms);
            grid.cells[cell] =
                horizon_ms > 0.0 ? flow.current_symbol().id
                                 : classifier.classify(state.x).id;
        } catch (const DivergenceError&) {
            // flagged, not fatal
        }
    });
    return grid;
}

double grid_entropy(const SymbolGrid& grid) {
    const int res = grid.resolution;
    if (res < 3)
        throw std::invalid_argument("grid must be at least 3x3");
    std::map<std::uint64_t, int> histogram;
    int windows = 0;
    const auto base = static_cast<std::uint64_t>(
        std::max(grid.n_symbols, 2) + 1); // +1 for diverged cells
    for (int r = 0; r + 3 <= res; ++r) {
        for (int c = 0; c + 3 <= res; ++c) {
            std::uint64_t key = 0;
            for (int dr = 0; dr < 3; ++dr)
                for (int dc = 0; dc < 3; ++dc)
                    key = key * base +
                          static_cast<std::uint64_t>(
                              grid.at(r + dr, c + dc) + 1);
            ++histogram[key];
            ++windows;
        }
    }
    double entropy = 0.0;
    for (const auto& [key, count] : histogram) {
        const double p = static_cast<double>(count) / windows;
        entropy -= p * std::log2(p);
    }
    return entropy;
}

double spectral_radius(const std::vector<double>& dense, int n) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        m(dense.data(), n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const kernels::CsrMatrix& m, double scale) {
    std::vector<double> dense(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            dense[static_cast<std::size_t>(i) * m.cols + m.col_idx[k]] =
                scale * m.values[k];
    return spectral_radius(dense, m.rows);
}

} // namespace itinerant
