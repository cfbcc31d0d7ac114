#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace itinerant {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf during integration; carries the simulation time of failure.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(double t_ms)
        : std::runtime_error("non-finite state component at t=" +
                             std::to_string(t_ms) + " ms"),
          time_ms(t_ms) {}
    double time_ms;
};

struct SimConfig {
    int n_in = 500;         // input ESN nodes
    int n_ch = 1000;        // chaotic ESN nodes
    double tau = 10.0;      // time constant, ms
    double g_in = 0.9;      // input ESN gain (non-chaotic)
    double g_ch = 1.5;      // chaotic ESN gain (chaotic)
    double density = 0.1;   // sparse density of the chaotic recurrence
    double dt = 1.0;        // Euler step, ms
    double input_scale = 1.0; // scale of the per-symbol input vectors
    std::uint64_t seed = 0;

    int total_nodes() const { return n_in + n_ch; }

    void validate() const {
        if (n_in < 1)
            throw ConfigError("n_in must be >= 1");
        if (n_ch < 1)
            throw ConfigError("n_ch must be >= 1");
        if (!(tau > 0.0))
            throw ConfigError("tau must be > 0");
        if (!(dt > 0.0))
            throw ConfigError("dt must be > 0");
        if (!(density > 0.0) || density > 1.0)
            throw ConfigError("density must be in (0, 1]");
        if (!(input_scale >= 0.0))
            throw ConfigError("input_scale must be >= 0");
    }
};

// Symbol ids are indices in [0, M). id -1 means "no input" (washout).
struct Symbol {
    int id = -1;

    static constexpr Symbol none() { return Symbol{-1}; }
    bool is_none() const { return id < 0; }
    // Display labels A, B, C, ... for logs and CSVs.
    std::string label() const {
        if (id < 0)
            return "-";
        if (id < 26)
            return std::string(1, static_cast<char>('A' + id));
        return "S" + std::to_string(id);
    }
    friend bool operator==(Symbol a, Symbol b) { return a.id == b.id; }
};

struct State {
    std::vector<double> x; // [x_in; x_ch]
    double t = 0.0;        // ms
};

struct Trajectory {
    std::vector<double> times;        // ms
    std::vector<std::vector<double>> states;
    std::vector<int> symbols;         // aligned symbol ids (-1 = none)

    std::size_t rows() const { return times.size(); }
};

// Piecewise-constant symbol-vs-time step function.
struct SymbolSchedule {
    std::vector<std::pair<double, Symbol>> breakpoints; // sorted, first at 0
    double duration = 0.0;                              // ms

    Symbol at(double t) const {
        Symbol s = Symbol::none();
        for (const auto& [t_switch, sym] : breakpoints) {
            if (t_switch > t)
                break;
            s = sym;
        }
        return s;
    }

    static SymbolSchedule constant(Symbol s, double duration_ms) {
        return SymbolSchedule{{{0.0, s}}, duration_ms};
    }
};

} // namespace itinerant
