#include "itinerant/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace itinerant {

Symbol Classifier::classify(const std::vector<double>& x) const {
    const auto& ops = kernels::active();
    const int n_state = has_bias ? n_features - 1 : n_features;
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_symbols; ++s) {
        const double* ws = w.data() + static_cast<std::size_t>(s) * n_features;
        double score = ops.dot(ws, x.data(), n_state);
        if (has_bias)
            score += ws[n_state];
        if (score > best_score) {
            best_score = score;
            best = s;
        }
    }
    return Symbol{best};
}

void Fsm::validate() const {
    for (const auto& row : p) {
        if (row.size() != p.size())
            throw ConfigError("transition matrix must be square");
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0)
                throw ConfigError("transition probabilities must be >= 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ConfigError("transition matrix rows must sum to 1");
    }
    if (!(dwell_ms > 0.0))
        throw ConfigError("dwell interval must be > 0");
}

Fsm Fsm::uniform_no_self(int m, double dwell_ms) {
    Fsm fsm;
    fsm.dwell_ms = dwell_ms;
    fsm.p.assign(m, std::vector<double>(m, m > 1 ? 1.0 / (m - 1) : 1.0));
    if (m > 1)
        for (int i = 0; i < m; ++i)
            fsm.p[i][i] = 0.0;
    return fsm;
}

SymbolSchedule make_periodic_schedule(const std::vector<Symbol>& sequence,
                                      double t_ms, double duration_ms) {
    if (sequence.empty())
        throw ConfigError("periodic sequence must be nonempty");
    if (!(t_ms > 0.0))
        throw ConfigError("dwell interval must be > 0");
    SymbolSchedule schedule;
    schedule.duration = duration_ms;
    std::size_t k = 0;
    for (double t = 0.0; t < duration_ms; t += t_ms, ++k)
        schedule.breakpoints.emplace_back(t, sequence[k % sequence.size()]);
    return schedule;
}

SymbolSchedule sample_fsm_schedule(const Fsm& fsm, double duration_ms,
                                   Rng& rng) {
    fsm.validate();
    const int m = static_cast<int>(fsm.p.size());
    SymbolSchedule schedule;
    schedule.duration = duration_ms;
    int current = rng.index(m);
    for (double t = 0.0; t < duration_ms; t += fsm.dwell_ms) {
        schedule.breakpoints.emplace_back(t, Symbol{current});
        double u = rng.uniform();
        int next = m - 1;
        for (int j = 0; j < m; ++j) {
            if (u < fsm.p[current][j]) {
                next = j;
                break;
            }
            u -= fsm.p[current][j];
        }
        current = next;
    }
    return schedule;
}

TrainingSet record_training_set(const Network& net,
                                const SymbolSchedule& schedule,
                                double t_rec_ms, int stride,
                                double washout_ms) {
    SymbolSchedule clipped = schedule;
    clipped.duration = t_rec_ms;
    Rng rng = Rng(net.config.seed).fork(0x7265'63ull);
    State init = washout(net, washout_ms, Symbol::none(), rng);
    Trajectory traj = run_open_loop(net, clipped, init, stride);

    TrainingSet data;
    data.x = std::move(traj.states);
    data.labels = std::move(traj.symbols);
    data.dt_eff = net.config.dt * stride;
    return data;
}

double classifier_loss(const TrainingSet& data, const std::vector<double>& w,
                       int n_symbols, int n_features, bool bias,
                       double l2_penalty, std::vector<double>* grad) {
    const int n_state = bias ? n_features - 1 : n_features;
    if (grad)
        grad->assign(w.size(), 0.0);
    double loss = 0.0;
    std::vector<double> scores(n_symbols), probs(n_symbols);
    for (std::size_t r = 0; r < data.x.size(); ++r) {
        const double* x = data.x[r].data();
        const int label = data.labels[r];
        double max_score = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < n_symbols; ++s) {
            const double* ws =
                w.data() + static_cast<std::size_t>(s) * n_features;
            double score = kernels::active().dot(ws, x, n_state);
            if (bias)
                score += ws[n_state];
            scores[s] = score;
            max_score = std::max(max_score, score);
        }
        double z = 0.0;
        for (int s = 0; s < n_symbols; ++s) {
            probs[s] = std::exp(scores[s] - max_score);
            z += probs[s];
        }
        loss -= data.dt_eff * (scores[label] - max_score - std::log(z));
        if (grad) {
            for (int s = 0; s < n_symbols; ++s) {
                const double coeff =
                    data.dt_eff * (probs[s] / z - (s == label ? 1.0 : 0.0));
                double* gs =
                    grad->data() + static_cast<std::size_t>(s) * n_features;
                kernels::active().axpy(coeff, x, gs, n_state);
                if (bias)
                    gs[n_state] += coeff;
            }
        }
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        loss += l2_penalty * w[i] * w[i];
        if (grad)
            (*grad)[i] += 2.0 * l2_penalty * w[i];
    }
    if (!std::isfinite(loss))
        throw DivergenceError(0.0);
    return loss;
}

Classifier train_classifier(const TrainingSet& data,
                            const ClassifierTrainOptions& options,
                            ClassifierTrainReport* report) {
    if (data.x.empty())
        throw ConfigError("empty training set");
    std::set<int> seen(data.labels.begin(), data.labels.end());
    const int n_symbols = *std::max_element(seen.begin(), seen.end()) + 1;
    for (int s = 0; s < n_symbols; ++s)
        if (!seen.count(s))
            throw ConfigError("symbol " + Symbol{s}.label() +
                              " absent from training data");
    const int n_state = static_cast<int>(data.x[0].size());
    const int n_features = n_state + (options.bias ? 1 : 0);

    auto objective = [&](const std::vector<double>& w,
                         std::vector<double>& grad) {
        return classifier_loss(data, w, n_symbols, n_features, options.bias,
                               options.l2_penalty, &grad);
    };

    std::vector<double> w0(static_cast<std::size_t>(n_symbols) * n_features,
                           0.0);
    LbfgsResult result = lbfgs_minimize(objective, std::move(w0),
                                        options.optimizer);

    Classifier classifier;
    classifier.n_symbols = n_symbols;
    classifier.n_features = n_features;
    classifier.has_bias = options.bias;
    classifier.w = result.x;

    if (report) {
        report->final_loss = result.f;
        report->grad_norm = result.grad_norm;
        report->iterations = result.iterations;
        report->converged = result.converged;
        std::size_t correct = 0;
        for (std::size_t r = 0; r < data.x.size(); ++r)
            if (classifier.classify(data.x[r]).id == data.labels[r])
                ++correct;
        report->train_accuracy =
            static_cast<double>(correct) / static_cast<double>(data.x.size());
    }
    return classifier;
}

ClosedLoopFlow::ClosedLoopFlow(const Network& net, const Classifier& classifier,
                               const State& initial, double hold_ms)
    : net_(net), classifier_(classifier), stepper_(net), state_(initial),
      hold_ms_(hold_ms) {}

void ClosedLoopFlow::advance(double duration_ms) {
    const double dt = net_.config.dt;
    const auto n_steps = static_cast<std::size_t>(duration_ms / dt + 0.5);
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (state_.t >= hold_until_) {
            Symbol s = classifier_.classify(state_.x);
            if (!(s == current_)) {
                current_ = s;
                hold_until_ = state_.t + hold_ms_;
            }
        }
        stepper_.step(state_, current_);
    }
}

ClosedLoopResult run_closed_loop(const Network& net, const Readout* readout,
                                 const Classifier& classifier,
                                 const State& initial, double duration_ms,
                                 double hold_ms, int record_stride) {
    const double dt = net.config.dt;
    const auto n_steps = static_cast<std::size_t>(duration_ms / dt + 0.5);

    ClosedLoopResult result;
    Stepper stepper(net);
    State state = initial;
    Symbol current = Symbol::none();
    double hold_until = -1.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (state.t >= hold_until) {
            Symbol s = classifier.classify(state.x);
            if (!(s == current)) {
                if (!current.is_none())
                    result.switches.emplace_back(state.t, current.id, s.id);
                current = s;
                hold_until = state.t + hold_ms;
            }
        }
        if (k % static_cast<std::size_t>(record_stride) == 0) {
            result.trajectory.times.push_back(state.t);
            result.trajectory.states.push_back(state.x);
            result.trajectory.symbols.push_back(current.id);
            if (readout)
                result.outputs.push_back(readout->apply(state.x));
        }
        stepper.step(state, current);
    }
    return result;
}

} // namespace itinerant
