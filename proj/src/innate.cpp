#include "itinerant/innate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace itinerant {
namespace {

enum : std::uint64_t {
    kTargetStream = 0x7461'7267ull,
    kTrainStream = 0x7472'6169'6eull,
    kEvalStream = 0x6576'616cull,
};

// Core RLS step with caller-provided scratch (length k).
void rls_update_impl(double* p, int k, const double* x_b, double e_i,
                     double* delta_j, double* p_x) {
    for (int j = 0; j < k; ++j) {
        const double* row = p + static_cast<std::size_t>(j) * k;
        double acc = 0.0;
        for (int l = 0; l < k; ++l)
            acc += row[l] * x_b[l];
        p_x[j] = acc;
    }
    double denom = 1.0;
    for (int l = 0; l < k; ++l)
        denom += x_b[l] * p_x[l];
    if (denom <= 0.0)
        throw std::logic_error(
            "RLS denominator <= 0: inverse-correlation matrix lost positive "
            "definiteness");
    for (int j = 0; j < k; ++j)
        delta_j[j] = e_i * p_x[j];
    const double inv = 1.0 / denom;
    for (int j = 0; j < k; ++j) {
        double* row = p + static_cast<std::size_t>(j) * k;
        const double pj = p_x[j] * inv;
        for (int l = 0; l < k; ++l)
            row[l] -= pj * p_x[l];
    }
}

// C_1-in on a fresh rollout, chaotic block, dt-weighted. Infinity on
// divergence.
double epoch_cost(const Network& net, const InnateTargets& targets,
                  Rng eval_rng) {
    const int n_in = net.n_in();
    const int n_ch = net.n_ch();
    const double dt = net.config.dt;
    double cost = 0.0;
    try {
        for (int s = 0; s < targets.n_symbols(); ++s) {
            Rng trial_rng = eval_rng.fork(s);
            State state = washout(net, 1000.0, Symbol::none(), trial_rng);
            Stepper stepper(net);
            for (const auto& target_row : targets.per_symbol[s]) {
                for (int i = 0; i < n_ch; ++i) {
                    const double d =
                        state.x[n_in + i] - target_row[n_in + i];
                    cost += d * d * dt;
                }
                stepper.step(state, Symbol{s});
            }
        }
    } catch (const DivergenceError&) {
        return std::numeric_limits<double>::infinity();
    }
    return cost;
}

} // namespace

InnateTargets record_innate_targets(const Network& net, double l_innate_ms,
                                    double washout_ms) {
    if (!net.bridge_tuned)
        throw ConfigError("bridge must be tuned before recording targets");
    InnateTargets targets;
    targets.l_innate_ms = l_innate_ms;
    const auto n_samples =
        static_cast<std::size_t>(l_innate_ms / net.config.dt + 0.5);
    Rng root = Rng(net.config.seed).fork(kTargetStream);
    for (int s = 0; s < net.n_symbols; ++s) {
        Rng rng = root.fork(s);
        State state = washout(net, washout_ms, Symbol::none(), rng);
        targets.initial_states.push_back(state);
        std::vector<std::vector<double>> rows;
        rows.reserve(n_samples);
        Stepper stepper(net);
        for (std::size_t k = 0; k < n_samples; ++k) {
            rows.push_back(state.x);
            stepper.step(state, Symbol{s});
        }
        targets.per_symbol.push_back(std::move(rows));
    }
    return targets;
}

void rls_update(std::vector<double>& p, int k, const double* x_b, double e_i,
                double* delta_j) {
    if (static_cast<int>(p.size()) != k * k)
        throw std::invalid_argument("P size mismatch");
    std::vector<double> scratch(k);
    rls_update_impl(p.data(), k, x_b, e_i, delta_j, scratch.data());
}

std::vector<int> trained_node_set(const Network& net, double fraction) {
    std::vector<int> idx(net.n_ch());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = Rng(net.config.seed).fork(0x7365'7441ull);
    for (int i = net.n_ch() - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.index(i + 1)]);
    idx.resize(static_cast<std::size_t>(fraction * net.n_ch()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

TrainReport innate_train(Network& net, const InnateTargets& targets,
                         const InnateTrainOptions& options) {
    if (targets.n_symbols() != net.n_symbols)
        throw ConfigError("target symbol count does not match network");
    const int n_in = net.n_in();
    const int m = net.n_symbols;
    const auto n_samples = targets.n_samples();

    const std::vector<int> trained = trained_node_set(net, options.trained_fraction);

    // Persistent per-node inverse-correlation matrices, initialized once.
    std::vector<std::vector<double>> p_mats(trained.size());
    std::vector<int> k_sizes(trained.size());
    for (std::size_t a = 0; a < trained.size(); ++a) {
        const auto [cols, k] = net.presynaptic(trained[a]);
        (void)cols;
        k_sizes[a] = k;
        p_mats[a].assign(static_cast<std::size_t>(k) * k, 0.0);
        for (int j = 0; j < k; ++j)
            p_mats[a][static_cast<std::size_t>(j) * k + j] = 1.0;
    }
    const int max_k =
        k_sizes.empty() ? 0 : *std::max_element(k_sizes.begin(), k_sizes.end());
    std::vector<double> x_b(max_k), delta(max_k), p_x(max_k);

    TrainReport report;
    std::vector<double> best_j = net.j_ch.values;
    Rng train_root = Rng(net.config.seed).fork(kTrainStream);
    Rng eval_root = Rng(net.config.seed).fork(kEvalStream);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        Rng epoch_rng = train_root.fork(epoch);
        std::vector<State> states;
        std::vector<Stepper> steppers;
        bool failed = false;
        try {
            for (int s = 0; s < m; ++s) {
                Rng rng = epoch_rng.fork(s);
                states.push_back(
                    washout(net, options.washout_ms, Symbol::none(), rng));
                steppers.emplace_back(net);
            }
            for (std::size_t count = 0; count < n_samples; ++count) {
                // stride 2 applies updates at odd counts, stride 1 at every
                // sample
                if (count % options.update_stride ==
                    static_cast<std::size_t>(options.update_stride) - 1) {
                    for (int s = 0; s < m; ++s) {
                        const double* x_ch = states[s].x.data() + n_in;
                        const auto& target = targets.per_symbol[s][count];
                        for (std::size_t a = 0; a < trained.size(); ++a) {
                            const int i = trained[a];
                            const auto [cols, k] = net.presynaptic(i);
                            for (int j = 0; j < k; ++j)
                                x_b[j] = x_ch[cols[j]];
                            const double e_i =
                                x_ch[i] - target[n_in + i];
                            rls_update_impl(p_mats[a].data(), k, x_b.data(),
                                            e_i, delta.data(), p_x.data());
                            double* row_values =
                                net.j_ch.values.data() + net.j_ch.row_ptr[i];
                            for (int j = 0; j < k; ++j)
                                row_values[j] -= delta[j];
                        }
                    }
                }
                for (int s = 0; s < m; ++s)
                    steppers[s].step(states[s], Symbol{s});
            }
        } catch (const DivergenceError&) {
            failed = true;
        }

        double cost = failed ? std::numeric_limits<double>::infinity()
                             : epoch_cost(net, targets, eval_root.fork(epoch));
        report.epoch_costs.push_back(cost);
        if (cost < report.best_cost) {
            report.best_cost = cost;
            report.best_epoch = epoch;
            best_j = net.j_ch.values;
        }
    }

    net.j_ch.values = best_j;
    return report;
}

double nmse(const Network& net, const InnateTargets& targets, int n_trials,
            std::uint64_t trial_stream) {
    const int n_in = net.n_in();
    const int n_ch = net.n_ch();
    const double dt = net.config.dt;
    Rng root = Rng(net.config.seed).fork(trial_stream);
    double total = 0.0;
    for (int s = 0; s < targets.n_symbols(); ++s) {
        double denom = 0.0;
        for (const auto& row : targets.per_symbol[s])
            for (int i = 0; i < n_ch; ++i)
                denom += row[n_in + i] * row[n_in + i] * dt;
        if (denom <= 0.0)
            throw ConfigError("zero-norm innate target");

        double trial_mean = 0.0;
        for (int trial = 0; trial < n_trials; ++trial) {
            Rng rng = root.fork(static_cast<std::uint64_t>(s) * 1000 + trial);
            State state = washout(net, 1000.0, Symbol::none(), rng);
            Stepper stepper(net);
            double num = 0.0;
            for (const auto& row : targets.per_symbol[s]) {
                for (int i = 0; i < n_ch; ++i) {
                    const double d = state.x[n_in + i] - row[n_in + i];
                    num += d * d * dt;
                }
                stepper.step(state, Symbol{s});
            }
            trial_mean += num / denom;
        }
        total += trial_mean / n_trials;
    }
    return total / targets.n_symbols();
}

} // namespace itinerant
