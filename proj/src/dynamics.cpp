#include "itinerant/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

namespace itinerant {

double transient_envelope(double t) {
    return t * std::exp(-0.5 * (t / 50.0) * (t / 50.0));
}

Stepper::Stepper(const Network& net) : net_(net), drive_(net.n_total()) {}

void Stepper::step(State& state, Symbol symbol) {
    const auto& ops = kernels::active();
    const SimConfig& cfg = net_.config;
    const int n_in = cfg.n_in;
    const int n_ch = cfg.n_ch;
    const double* x_in = state.x.data();
    const double* x_ch = state.x.data() + n_in;
    double* d_in = drive_.data();
    double* d_ch = drive_.data() + n_in;

    ops.dense_matvec(net_.j_in.data(), n_in, n_in, x_in, d_in);
    for (int i = 0; i < n_in; ++i)
        d_in[i] *= cfg.g_in;
    if (!symbol.is_none()) {
        if (symbol.id >= net_.n_symbols)
            throw ConfigError("symbol id out of range");
        ops.axpy(1.0, net_.u_in[symbol.id].data(), d_in, n_in);
    }

    ops.csr_matvec(net_.j_ch, x_ch, d_ch);
    for (int i = 0; i < n_ch; ++i)
        d_ch[i] *= cfg.g_ch;
    if (net_.bridge_tuned) {
        // d_ch += J_ic x_in
        std::vector<double>& tmp = bridge_tmp_;
        tmp.resize(n_ch);
        ops.dense_matvec(net_.j_ic.data(), n_ch, n_in, x_in, tmp.data());
        ops.axpy(1.0, tmp.data(), d_ch, n_ch);
    }

    ops.leaky_tanh_update(state.x.data(), drive_.data(), net_.n_total(),
                          cfg.dt / cfg.tau);
    state.t += cfg.dt;

    for (double v : state.x)
        if (!std::isfinite(v))
            throw DivergenceError(state.t);
}

State step(const Network& net, const State& state, Symbol symbol) {
    State out = state;
    Stepper stepper(net);
    stepper.step(out, symbol);
    return out;
}

Trajectory run_open_loop(const Network& net, const SymbolSchedule& schedule,
                         const State& initial, int record_stride) {
    if (!(schedule.duration > 0.0))
        throw ConfigError("schedule duration must be > 0");
    if (record_stride < 1)
        throw ConfigError("record_stride must be >= 1");

    const double dt = net.config.dt;
    const auto n_steps = static_cast<std::size_t>(schedule.duration / dt + 0.5);

    Trajectory traj;
    traj.times.reserve(n_steps / record_stride + 1);

    Stepper stepper(net);
    State state = initial;
    std::size_t cursor = 0;
    Symbol current = Symbol::none();
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = state.t;
        while (cursor < schedule.breakpoints.size() &&
               schedule.breakpoints[cursor].first <= t + 1e-9) {
            current = schedule.breakpoints[cursor].second;
            ++cursor;
        }
        if (k % record_stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back(state.x);
            traj.symbols.push_back(current.id);
        }
        stepper.step(state, current);
    }
    return traj;
}

State washout(const Network& net, double duration_ms, Symbol symbol, Rng& rng) {
    State state;
    state.x.resize(net.n_total());
    for (auto& v : state.x)
        v = rng.uniform(-1.0, 1.0);
    state.t = 0.0;

    Stepper stepper(net);
    const auto n_steps =
        static_cast<std::size_t>(duration_ms / net.config.dt + 0.5);
    for (std::size_t k = 0; k < n_steps; ++k)
        stepper.step(state, symbol);
    state.t = 0.0;
    return state;
}

namespace {

// Integrate only the input ESN (it is autonomous of the chaotic part).
void run_input_esn(const Network& net, std::vector<double>& x_in,
                   Symbol symbol, double duration_ms,
                   std::vector<std::vector<double>>* record = nullptr) {
    const auto& ops = kernels::active();
    const SimConfig& cfg = net.config;
    const int n_in = cfg.n_in;
    std::vector<double> drive(n_in);
    const auto n_steps = static_cast<std::size_t>(duration_ms / cfg.dt + 0.5);
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (record)
            record->push_back(x_in);
        ops.dense_matvec(net.j_in.data(), n_in, n_in, x_in.data(),
                         drive.data());
        for (int i = 0; i < n_in; ++i)
            drive[i] *= cfg.g_in;
        if (!symbol.is_none())
            ops.axpy(1.0, net.u_in[symbol.id].data(), drive.data(), n_in);
        ops.leaky_tanh_update(x_in.data(), drive.data(), n_in,
                              cfg.dt / cfg.tau);
    }
}

} // namespace

BridgeTuneReport tune_input_bridge(Network& net,
                                   const BridgeTuneOptions& options) {
    const SimConfig& cfg = net.config;
    const int n_in = cfg.n_in;
    const int n_ch = cfg.n_ch;
    const int m = net.n_symbols;
    Rng rng = Rng(cfg.seed).fork(0x6272'6964'6765ull); // bridge stream

    // Switch events: every ordered pair (from != to) starts at the settled
    // pre-switch symbol; diagonal events start from a zero-input washout.
    struct Event {
        Symbol from, to;
        bool from_washout;
    };
    std::vector<Event> events;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            events.push_back({Symbol{a}, Symbol{b}, a == b});
    while (static_cast<int>(events.size()) < options.n_switch_events) {
        const auto& e = events[events.size() % (m * m)];
        events.push_back(e);
    }

    std::vector<std::vector<double>> rows;  // x_in samples
    std::vector<double> env_values;         // envelope(t - t_switch)
    std::vector<int> target_symbols;        // aligned v_s index
    for (const auto& ev : events) {
        std::vector<double> x_in(n_in);
        for (auto& v : x_in)
            v = rng.uniform(-1.0, 1.0);
        run_input_esn(net, x_in, Symbol::none(), options.washout_ms);
        if (!ev.from_washout)
            run_input_esn(net, x_in, ev.from, options.settle_ms);

        std::vector<std::vector<double>> recorded;
        run_input_esn(net, x_in, ev.to, options.record_ms, &recorded);
        for (std::size_t k = 0; k < recorded.size(); ++k) {
            rows.push_back(std::move(recorded[k]));
            env_values.push_back(options.envelope_scale *
                                 transient_envelope(k * cfg.dt));
            target_symbols.push_back(ev.to.id);
        }
    }

    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(n_rows, n_in);
    for (Eigen::Index r = 0; r < n_rows; ++r)
        x.row(r) = Eigen::Map<const Eigen::VectorXd>(rows[r].data(), n_in);

    Eigen::MatrixXd y(n_rows, n_ch);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const auto& v = net.v_s[target_symbols[r]];
        y.row(r) =
            env_values[r] * Eigen::Map<const Eigen::VectorXd>(v.data(), n_ch);
    }

    Eigen::MatrixXd gram = x.transpose() * x;
    const double lambda = options.ridge_scale * gram.trace() / n_in;
    if (lambda <= 0.0) {
        if (Eigen::FullPivLU<Eigen::MatrixXd>(gram).rank() < n_in)
            throw ConfigError(
                "bridge normal equations are rank deficient; use ridge_scale > 0");
    }
    gram.diagonal().array() += lambda;
    // J_ic^T = (X^T X + lambda I)^{-1} X^T Y
    Eigen::MatrixXd jic_t = gram.ldlt().solve(x.transpose() * y);

    for (int i = 0; i < n_ch; ++i)
        for (int j = 0; j < n_in; ++j)
            net.j_ic[static_cast<std::size_t>(i) * n_in + j] = jic_t(j, i);
    net.bridge_tuned = true;

    BridgeTuneReport report;
    report.n_events = static_cast<int>(events.size());
    const double target_norm = y.norm();
    report.relative_error =
        target_norm > 0.0 ? (x * jic_t - y).norm() / target_norm : 0.0;
    return report;
}

} // namespace itinerant
