// Command-line driver: configure, run, and persist the three training steps
// and the analysis suite. Logs go to stderr; data goes to files.

#include "itinerant/analysis.hpp"
#include "itinerant/container.hpp"
#include "itinerant/csv.hpp"
#include "itinerant/dynamics.hpp"
#include "itinerant/feedback.hpp"
#include "itinerant/innate.hpp"
#include "itinerant/readout.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace itinerant;

namespace {

struct ScheduleSpec {
    std::string type = "periodic"; // "periodic" | "fsm"
    std::vector<Symbol> sequence;  // periodic
    Fsm fsm;                       // fsm
    double t_ms = 1000.0;
    std::uint64_t schedule_seed = 1;
};

struct ExperimentConfig {
    SimConfig network;
    int n_symbols = 3;
    double l_innate_ms = 500.0;
    double l_out_ms = 750.0;

    BridgeTuneOptions bridge;
    InnateTrainOptions innate;
    double readout_ridge_alpha = 1.0;
    int readout_train_trials = 10;
    int readout_eval_trials = 10;
    std::vector<json> target_specs;

    ScheduleSpec schedule;

    // classifier
    double classifier_l2 = 1e-6;
    int classifier_stride = 5;
    double t_rec_ms = 50000.0;
    bool classifier_bias = true;
    int classifier_max_iterations = 500;

    // closed loop
    double closed_duration_ms = 60000.0;
    double hold_ms = 0.0;
    int record_stride = 1;
    std::vector<int> trajectory_columns;

    json analysis; // raw analysis parameter block

    std::string output_dir = "out";
    int threads = 1;

    json raw; // the canonical document, hashed into containers
};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (j.is_object() && j.contains(key))
        return j.at(key).get<T>();
    return fallback;
}

void check_multiple_of_dt(double value, double dt, const std::string& name) {
    const double q = value / dt;
    if (std::abs(q - std::round(q)) > 1e-9)
        throw ConfigError(name + " must be a multiple of dt");
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;

    if (j.contains("network")) {
        const json& n = j.at("network");
        cfg.network.n_in = get_or(n, "n_in", cfg.network.n_in);
        cfg.network.n_ch = get_or(n, "n_ch", cfg.network.n_ch);
        cfg.network.tau = get_or(n, "tau", cfg.network.tau);
        cfg.network.g_in = get_or(n, "g_in", cfg.network.g_in);
        cfg.network.g_ch = get_or(n, "g_ch", cfg.network.g_ch);
        cfg.network.density = get_or(n, "density", cfg.network.density);
        cfg.network.dt = get_or(n, "dt", cfg.network.dt);
        cfg.network.input_scale =
            get_or(n, "input_scale", cfg.network.input_scale);
        cfg.network.seed = get_or(n, "seed", cfg.network.seed);
    }
    cfg.network.validate();

    cfg.n_symbols = get_or(j, "n_symbols", cfg.n_symbols);
    if (cfg.n_symbols < 1)
        throw ConfigError("n_symbols must be >= 1");
    cfg.l_innate_ms = get_or(j, "l_innate_ms", cfg.l_innate_ms);
    cfg.l_out_ms = get_or(j, "l_out_ms", cfg.l_out_ms);
    check_multiple_of_dt(cfg.l_innate_ms, cfg.network.dt, "l_innate_ms");
    check_multiple_of_dt(cfg.l_out_ms, cfg.network.dt, "l_out_ms");

    if (j.contains("bridge")) {
        const json& b = j.at("bridge");
        cfg.bridge.envelope_scale =
            get_or(b, "envelope_scale", cfg.bridge.envelope_scale);
        cfg.bridge.ridge_scale =
            get_or(b, "ridge_scale", cfg.bridge.ridge_scale);
        cfg.bridge.washout_ms = get_or(b, "washout_ms", cfg.bridge.washout_ms);
        cfg.bridge.settle_ms = get_or(b, "settle_ms", cfg.bridge.settle_ms);
        cfg.bridge.record_ms = get_or(b, "record_ms", cfg.bridge.record_ms);
        if (cfg.bridge.envelope_scale <= 0.0)
            throw ConfigError("bridge.envelope_scale must be > 0");
    }

    if (j.contains("innate")) {
        const json& in = j.at("innate");
        cfg.innate.epochs = get_or(in, "epochs", cfg.innate.epochs);
        cfg.innate.update_stride =
            get_or(in, "update_stride", cfg.innate.update_stride);
        cfg.innate.washout_ms = get_or(in, "washout_ms", cfg.innate.washout_ms);
        cfg.innate.trained_fraction =
            get_or(in, "trained_fraction", cfg.innate.trained_fraction);
    }

    if (j.contains("readout")) {
        const json& r = j.at("readout");
        cfg.readout_ridge_alpha =
            get_or(r, "ridge_alpha", cfg.readout_ridge_alpha);
        cfg.readout_train_trials =
            get_or(r, "n_train_trials", cfg.readout_train_trials);
        cfg.readout_eval_trials =
            get_or(r, "n_eval_trials", cfg.readout_eval_trials);
        if (r.contains("targets"))
            for (const auto& t : r.at("targets"))
                cfg.target_specs.push_back(t);
    }

    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        cfg.schedule.type = get_or<std::string>(s, "type", "periodic");
        cfg.schedule.t_ms = get_or(s, "t_ms", cfg.schedule.t_ms);
        cfg.schedule.schedule_seed =
            get_or(s, "schedule_seed", cfg.schedule.schedule_seed);
        check_multiple_of_dt(cfg.schedule.t_ms, cfg.network.dt,
                             "schedule.t_ms");
        if (cfg.schedule.type == "periodic") {
            for (int id : get_or(s, "sequence", std::vector<int>{}))
                cfg.schedule.sequence.push_back(Symbol{id});
            if (cfg.schedule.sequence.empty())
                for (int id = 0; id < cfg.n_symbols; ++id)
                    cfg.schedule.sequence.push_back(Symbol{id});
            for (Symbol sym : cfg.schedule.sequence)
                if (sym.id < 0 || sym.id >= cfg.n_symbols)
                    throw ConfigError("schedule.sequence references a symbol "
                                      ">= n_symbols");
        } else if (cfg.schedule.type == "fsm") {
            if (s.contains("matrix")) {
                cfg.schedule.fsm.p =
                    s.at("matrix").get<std::vector<std::vector<double>>>();
                cfg.schedule.fsm.dwell_ms = cfg.schedule.t_ms;
            } else {
                cfg.schedule.fsm =
                    Fsm::uniform_no_self(cfg.n_symbols, cfg.schedule.t_ms);
            }
            cfg.schedule.fsm.dwell_ms = cfg.schedule.t_ms;
            cfg.schedule.fsm.validate();
            if (static_cast<int>(cfg.schedule.fsm.p.size()) != cfg.n_symbols)
                throw ConfigError("schedule.matrix must be n_symbols x "
                                  "n_symbols");
        } else {
            throw ConfigError("schedule.type must be 'periodic' or 'fsm'");
        }
    } else {
        for (int id = 0; id < cfg.n_symbols; ++id)
            cfg.schedule.sequence.push_back(Symbol{id});
    }

    if (j.contains("classifier")) {
        const json& c = j.at("classifier");
        cfg.classifier_l2 = get_or(c, "l2_penalty", cfg.classifier_l2);
        cfg.classifier_stride = get_or(c, "stride", cfg.classifier_stride);
        cfg.t_rec_ms = get_or(c, "t_rec_ms", cfg.t_rec_ms);
        cfg.classifier_bias = get_or(c, "bias", cfg.classifier_bias);
        cfg.classifier_max_iterations =
            get_or(c, "max_iterations", cfg.classifier_max_iterations);
    }

    if (j.contains("closed_loop")) {
        const json& c = j.at("closed_loop");
        cfg.closed_duration_ms = get_or(c, "duration_ms", cfg.closed_duration_ms);
        cfg.hold_ms = get_or(c, "hold_ms", cfg.hold_ms);
        cfg.record_stride = get_or(c, "record_stride", cfg.record_stride);
        cfg.trajectory_columns =
            get_or(c, "columns", cfg.trajectory_columns);
    }

    cfg.analysis = get_or(j, "analysis", json::object());
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.threads = get_or(j, "threads", cfg.threads);
    if (cfg.threads < 1)
        throw ConfigError("threads must be >= 1");
    return cfg;
}

TargetSignal make_target(const json& spec, int symbol_id, double l_out_ms,
                         double dt) {
    std::string kind = "lissajous";
    if (!spec.is_null())
        kind = get_or<std::string>(spec, "kind", kind);
    if (kind == "lissajous") {
        LissajousParams p;
        p.period_ms = l_out_ms;
        // default family: distinct curves per symbol
        p.freq_y = 2.0 + symbol_id;
        if (!spec.is_null()) {
            p.amp_x = get_or(spec, "amp_x", p.amp_x);
            p.amp_y = get_or(spec, "amp_y", p.amp_y);
            p.freq_x = get_or(spec, "freq_x", p.freq_x);
            p.freq_y = get_or(spec, "freq_y", p.freq_y);
            p.phase = get_or(spec, "phase", p.phase);
            p.period_ms = get_or(spec, "period_ms", p.period_ms);
        }
        return lissajous_target(p, l_out_ms, dt);
    }
    if (kind == "lorenz_xz") {
        LorenzParams p;
        p.sigma = get_or(spec, "sigma", p.sigma);
        p.rho = get_or(spec, "rho", p.rho);
        p.beta = get_or(spec, "beta", p.beta);
        p.init = get_or(spec, "init", p.init);
        return lorenz_xz_target(p, l_out_ms, dt);
    }
    if (kind == "polyline_trace") {
        std::vector<std::pair<double, double>> pts;
        for (const auto& pt :
             get_or(spec, "points", std::vector<std::vector<double>>{}))
            pts.emplace_back(pt.at(0), pt.at(1));
        return polyline_target(pts, l_out_ms, dt);
    }
    if (kind == "gaussian_pulse") {
        const double t_peak = get_or(spec, "t_peak_ms", l_out_ms / 2.0);
        const double sigma = get_or(spec, "sigma_ms", 10.0);
        return gaussian_pulse_target(t_peak, l_out_ms, dt, sigma);
    }
    throw ConfigError("unknown readout target kind: " + kind);
}

std::vector<TargetSignal> make_targets(const ExperimentConfig& cfg) {
    std::vector<TargetSignal> out;
    for (int s = 0; s < cfg.n_symbols; ++s) {
        json spec; // null -> defaults
        if (!cfg.target_specs.empty())
            spec = cfg.target_specs[s % cfg.target_specs.size()];
        out.push_back(
            make_target(spec, s, cfg.l_out_ms, cfg.network.dt));
    }
    return out;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

// Removes files created by an aborted stage so no partial artifacts remain.
class ArtifactGuard {
public:
    void track(const std::string& path) { paths_.push_back(path); }
    void commit() { paths_.clear(); }
    ~ArtifactGuard() {
        for (const auto& p : paths_)
            std::remove(p.c_str());
    }

private:
    std::vector<std::string> paths_;
};

std::string container_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.output_dir) / "model.bin").string();
}

ModelContainer load_step1_container(const ExperimentConfig& cfg,
                                    const std::string& override_path) {
    const std::string path =
        override_path.empty() ? container_path(cfg) : override_path;
    ModelContainer c = load_container(path);
    if (c.experiment_config_hash != config_hash(cfg.raw))
        std::cerr << "[warn] container " << path
                  << " was produced by a different config (hash mismatch)\n";
    return c;
}

SymbolSchedule build_schedule(const ExperimentConfig& cfg, double duration_ms) {
    if (cfg.schedule.type == "fsm") {
        Rng rng(cfg.network.seed);
        Rng sched_rng = rng.fork(0x73636865ull + cfg.schedule.schedule_seed);
        return sample_fsm_schedule(cfg.schedule.fsm, duration_ms, sched_rng);
    }
    return make_periodic_schedule(cfg.schedule.sequence, cfg.schedule.t_ms,
                                  duration_ms);
}

json transition_stats_json(const TransitionStats& stats) {
    return json{{"counts", stats.counts},
                {"probs", stats.probs},
                {"dwell_mean_ms", stats.dwell_mean_ms},
                {"dwell_std_ms", stats.dwell_std_ms},
                {"n_switches", stats.n_switches}};
}

int cmd_step1(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    ArtifactGuard guard;
    std::string stage = "build_network";
    try {
        std::cerr << "[step1] building network (n_in=" << cfg.network.n_in
                  << ", n_ch=" << cfg.network.n_ch << ", M=" << cfg.n_symbols
                  << ")\n";
        Network net = build_network(cfg.network, cfg.n_symbols);

        stage = "tune_input_bridge";
        BridgeTuneReport bridge = tune_input_bridge(net, cfg.bridge);
        std::cerr << "[step1] bridge tuned over " << bridge.n_events
                  << " events, relative error " << bridge.relative_error
                  << "\n";

        stage = "record_innate_targets";
        InnateTargets targets = record_innate_targets(net, cfg.l_innate_ms,
                                                      cfg.innate.washout_ms);

        stage = "innate_train";
        const double nmse_before = nmse(net, targets);
        TrainReport report = innate_train(net, targets, cfg.innate);
        report.nmse_before = nmse_before;
        report.nmse_after = nmse(net, targets);
        std::cerr << "[step1] innate training: best epoch "
                  << report.best_epoch << ", cost " << report.best_cost
                  << "\n";
        std::cout << "nmse_before " << report.nmse_before << "\n";
        std::cout << "nmse_after " << report.nmse_after << "\n";

        stage = "train_readout";
        std::vector<TargetSignal> signals = make_targets(cfg);
        auto rollouts =
            record_symbol_rollouts(net, cfg.l_out_ms, cfg.readout_train_trials);
        Readout readout = train_readout_for_symbols(rollouts, signals,
                                                    cfg.readout_ridge_alpha);
        std::vector<double> readout_nmse = evaluate_readout(
            net, readout, signals, cfg.readout_eval_trials);
        for (int s = 0; s < cfg.n_symbols; ++s)
            std::cout << "readout_nmse_" << Symbol{s}.label() << " "
                      << readout_nmse[s] << "\n";

        stage = "persist";
        ModelContainer container;
        container.network = std::move(net);
        container.readout = std::move(readout);
        container.l_innate_ms = cfg.l_innate_ms;
        container.train_report = report;
        container.experiment_config_hash = config_hash(cfg.raw);
        guard.track(container_path(cfg));
        save_container(container_path(cfg), container);

        json j = {{"nmse_before", report.nmse_before},
                  {"nmse_after", report.nmse_after},
                  {"best_epoch", report.best_epoch},
                  {"best_cost", report.best_cost},
                  {"epoch_costs", report.epoch_costs},
                  {"bridge_relative_error", bridge.relative_error},
                  {"readout_nmse", readout_nmse}};
        const std::string report_path =
            (fs::path(cfg.output_dir) / "step1_report.json").string();
        guard.track(report_path);
        write_json(report_path, j);
        guard.commit();
        std::cerr << "[step1] wrote " << container_path(cfg) << "\n";
        return 0;
    } catch (...) {
        std::cerr << "[step1] aborted during stage: " << stage << "\n";
        throw;
    }
}

int run_feedback_step(const ExperimentConfig& cfg, const std::string& name,
                      const std::string& container_override) {
    fs::create_directories(cfg.output_dir);
    ArtifactGuard guard;
    std::string stage = "load_container";
    try {
        ModelContainer container = load_step1_container(cfg, container_override);
        const Network& net = container.network;

        stage = "record_training_set";
        SymbolSchedule train_sched = build_schedule(cfg, cfg.t_rec_ms);
        std::cerr << "[" << name << "] recording " << cfg.t_rec_ms
                  << " ms open loop (stride " << cfg.classifier_stride
                  << ")\n";
        TrainingSet data = record_training_set(
            net, train_sched, cfg.t_rec_ms, cfg.classifier_stride);

        stage = "train_classifier";
        ClassifierTrainOptions copts;
        copts.l2_penalty = cfg.classifier_l2;
        copts.bias = cfg.classifier_bias;
        copts.optimizer.max_iterations = cfg.classifier_max_iterations;
        ClassifierTrainReport creport;
        Classifier classifier = train_classifier(data, copts, &creport);
        std::cerr << "[" << name << "] classifier loss " << creport.final_loss
                  << ", train accuracy " << creport.train_accuracy << "\n";

        stage = "run_closed_loop";
        Rng rng = Rng(cfg.network.seed).fork(0x636c6f73ull);
        State init = washout(net, 1000.0, Symbol::none(), rng);
        const Readout* readout =
            container.readout ? &*container.readout : nullptr;
        ClosedLoopResult closed = run_closed_loop(
            net, readout, classifier, init, cfg.closed_duration_ms,
            cfg.hold_ms, cfg.record_stride);

        stage = "analyze";
        TransitionStats stats =
            transition_stats(closed.trajectory.symbols,
                             cfg.network.dt * cfg.record_stride);
        MleOptions mopts;
        mopts.n_threads = cfg.threads;
        if (cfg.analysis.contains("mle")) {
            const json& m = cfg.analysis.at("mle");
            mopts.delta_t_ms = get_or(m, "delta_t_ms", mopts.delta_t_ms);
            mopts.t_horizon_ms = get_or(m, "t_horizon_ms", mopts.t_horizon_ms);
            mopts.l_pert = get_or(m, "l_pert", mopts.l_pert);
            mopts.n_trials = get_or(m, "n_trials", mopts.n_trials);
        }
        LyapunovReport mle = max_lyapunov(
            closed_loop_flow_factory(net, classifier, 1000.0, cfg.hold_ms),
            mopts);
        std::cout << "closed_loop_mle " << mle.mle << "\n";
        std::cout << "n_switches " << stats.n_switches << "\n";

        stage = "persist";
        container.classifier = classifier;
        guard.track(container_path(cfg));
        save_container(container_path(cfg), container);
        const fs::path dir(cfg.output_dir);
        guard.track((dir / (name + "_trajectory.csv")).string());
        write_trajectory_csv((dir / (name + "_trajectory.csv")).string(),
                             closed.trajectory, cfg.trajectory_columns);
        guard.track((dir / (name + "_switches.csv")).string());
        write_switch_log_csv((dir / (name + "_switches.csv")).string(),
                             closed.switches);
        if (!closed.outputs.empty()) {
            guard.track((dir / (name + "_outputs.csv")).string());
            write_curve_csv((dir / (name + "_outputs.csv")).string(),
                            closed.trajectory.times, closed.outputs);
        }
        json j = {{"transition_stats", transition_stats_json(stats)},
                  {"mle", mle.mle},
                  {"mle_trials", mle.trial_means},
                  {"classifier_loss", creport.final_loss},
                  {"classifier_train_accuracy", creport.train_accuracy},
                  {"classifier_iterations", creport.iterations}};
        guard.track((dir / (name + "_report.json")).string());
        write_json((dir / (name + "_report.json")).string(), j);
        guard.commit();
        std::cerr << "[" << name << "] wrote reports to " << cfg.output_dir
                  << "\n";
        return 0;
    } catch (...) {
        std::cerr << "[" << name << "] aborted during stage: " << stage
                  << "\n";
        throw;
    }
}

int cmd_analyze(const ExperimentConfig& cfg, const std::string& which,
                const std::string& container_override) {
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    ModelContainer container = load_step1_container(cfg, container_override);
    const Network& net = container.network;

    if (which == "spectrum") {
        const double radius = spectral_radius(net.j_ch, cfg.network.g_ch);
        std::cout << "spectral_radius " << radius << "\n";
        write_json((dir / "spectrum.json").string(),
                   json{{"spectral_radius", radius},
                        {"g_ch", cfg.network.g_ch}});
        return 0;
    }
    if (which == "mle") {
        MleOptions opts;
        opts.n_threads = cfg.threads;
        const json m = get_or(cfg.analysis, "mle", json::object());
        opts.delta_t_ms = get_or(m, "delta_t_ms", opts.delta_t_ms);
        opts.t_horizon_ms = get_or(m, "t_horizon_ms", opts.t_horizon_ms);
        opts.l_pert = get_or(m, "l_pert", opts.l_pert);
        opts.n_trials = get_or(m, "n_trials", opts.n_trials);
        LyapunovReport rep;
        if (container.classifier) {
            rep = max_lyapunov(closed_loop_flow_factory(
                                   net, *container.classifier, 1000.0,
                                   cfg.hold_ms),
                               opts);
        } else {
            rep = max_lyapunov(network_flow_factory(net, Symbol::none()),
                               opts);
        }
        std::cout << "mle " << rep.mle << "\n";
        write_json((dir / "mle.json").string(),
                   json{{"mle", rep.mle}, {"trials", rep.trial_means}});
        return 0;
    }
    if (which == "lle") {
        const json l = get_or(cfg.analysis, "lle", json::object());
        LleOptions opts;
        opts.n_trials = get_or(l, "n_trials", opts.n_trials);
        opts.epsilon = get_or(l, "epsilon", opts.epsilon);
        opts.n_threads = cfg.threads;
        const double t_max = get_or(l, "t_max_ms", cfg.l_innate_ms);
        const double step = get_or(l, "t_step_ms", 10.0);
        const int symbol = get_or(l, "symbol", 0);
        std::vector<double> grid;
        for (double t = 0.0; t <= t_max + 1e-9; t += step)
            grid.push_back(t);
        std::vector<double> lle =
            local_lyapunov(net, Symbol{symbol}, grid, opts);
        write_curve_csv((dir / "lle.csv").string(), grid, {lle}, "lle");
        std::cout << "lle_min "
                  << *std::min_element(lle.begin(), lle.end()) << "\n";
        return 0;
    }
    if (which == "timer") {
        const json t = get_or(cfg.analysis, "timer", json::object());
        std::vector<double> grid =
            get_or(t, "t_peak_grid", std::vector<double>{});
        if (grid.empty())
            throw ConfigError("analysis.timer.t_peak_grid must be a "
                              "non-empty sorted list");
        TimerOptions opts;
        opts.ridge_alpha = get_or(t, "ridge_alpha", opts.ridge_alpha);
        opts.n_train_trials = get_or(t, "n_train_trials", opts.n_train_trials);
        opts.n_test_trials = get_or(t, "n_test_trials", opts.n_test_trials);
        TimerReport rep = timer_profile(net, grid, opts);
        write_curve_csv((dir / "timer.csv").string(), rep.t_peaks, {rep.r2},
                        "r2");
        std::cout << "timer_capacity " << rep.capacity << "\n";
        write_json((dir / "timer.json").string(),
                   json{{"t_peaks", rep.t_peaks},
                        {"r2", rep.r2},
                        {"capacity", rep.capacity}});
        return 0;
    }
    if (which == "grid") {
        if (!container.classifier)
            throw ConfigError("grid analysis requires a classifier; run "
                              "step2 or step3 first");
        const json g = get_or(cfg.analysis, "grid", json::object());
        PlaneSpec plane;
        plane.coord_a = get_or(g, "coord_a", plane.coord_a);
        plane.coord_b = get_or(g, "coord_b", plane.coord_b);
        plane.extent = get_or(g, "extent", plane.extent);
        plane.resolution = get_or(g, "resolution", plane.resolution);
        const double horizon = get_or(g, "horizon_ms", 20000.0);
        Rng rng = Rng(cfg.network.seed).fork(0x67726964ull);
        plane.center = washout(net, 1000.0, Symbol::none(), rng).x;
        SymbolGrid grid = terminal_symbol_grid(
            net, *container.classifier, plane, horizon, cfg.hold_ms,
            cfg.threads);
        write_grid_csv((dir / "grid.csv").string(), grid.cells,
                       grid.resolution);
        const double entropy = grid_entropy(grid);
        std::cout << "grid_entropy " << entropy << "\n";
        write_json((dir / "grid.json").string(),
                   json{{"entropy_bits", entropy},
                        {"resolution", plane.resolution},
                        {"horizon_ms", horizon}});
        return 0;
    }
    throw ConfigError("unknown analysis: " + which +
                      " (expected mle|lle|timer|grid|spectrum)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Itinerant dynamics toolkit: embed symbol sequences in "
                 "chaotic echo state networks and analyze the result"};
    app.require_subcommand(1);

    std::string config_path;
    std::string container_override;
    std::string which = "mle";
    std::string kernels_choice = "auto";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    std::optional<std::string> output_override;

    app.add_option("--kernels", kernels_choice,
                   "Kernel variant: auto|scalar|avx2");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Experiment config (JSON)")
            ->required();
        sub->add_option("--seed", seed_override, "Override network.seed");
        sub->add_option("--threads", threads_override,
                        "Override the thread count");
        sub->add_option("--output-dir", output_override,
                        "Override the output directory");
    };

    CLI::App* step1 = app.add_subcommand(
        "step1", "Innate training + readout (quasi-attractor embedding)");
    add_common(step1);
    CLI::App* step2 = app.add_subcommand(
        "step2", "Periodic symbol-transition embedding (closed loop)");
    add_common(step2);
    step2->add_option("--container", container_override,
                      "Step-1 container path");
    CLI::App* step3 = app.add_subcommand(
        "step3", "Stochastic symbol-transition embedding (closed loop)");
    add_common(step3);
    step3->add_option("--container", container_override,
                      "Step-1 container path");
    CLI::App* analyze = app.add_subcommand("analyze", "Run one analysis");
    add_common(analyze);
    analyze->add_option("--which", which, "mle|lle|timer|grid|spectrum")
        ->required();
    analyze->add_option("--container", container_override,
                        "Container path");
    CLI::App* run_all =
        app.add_subcommand("run-all", "step1 + the configured feedback step");
    add_common(run_all);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        kernels::select(kernels_choice);

        ExperimentConfig cfg = parse_config(load_json(config_path));
        if (seed_override) {
            cfg.network.seed = *seed_override;
            cfg.raw["network"]["seed"] = *seed_override;
        }
        if (threads_override)
            cfg.threads = *threads_override;
        if (output_override)
            cfg.output_dir = *output_override;

        if (step1->parsed())
            return cmd_step1(cfg);
        if (step2->parsed()) {
            if (cfg.schedule.type != "periodic")
                throw ConfigError("step2 requires a periodic schedule");
            return run_feedback_step(cfg, "step2", container_override);
        }
        if (step3->parsed()) {
            if (cfg.schedule.type != "fsm")
                throw ConfigError("step3 requires an fsm schedule");
            return run_feedback_step(cfg, "step3", container_override);
        }
        if (analyze->parsed())
            return cmd_analyze(cfg, which, container_override);
        if (run_all->parsed()) {
            const int rc = cmd_step1(cfg);
            if (rc != 0)
                return rc;
            const std::string name =
                cfg.schedule.type == "fsm" ? "step3" : "step2";
            return run_feedback_step(cfg, name, "");
        }
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
