#pragma once

#include <functional>
#include <vector>

namespace itinerant {

struct LbfgsOptions {
    int max_iterations = 500;
    int history = 10;
    double grad_tolerance = 1e-5; // stop when ||g||_inf < tol
    double initial_step = 1.0;
    int max_line_search = 40;
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// objective(x, grad) returns f and fills grad (same length as x).
using Objective =
    std::function<double(const std::vector<double>&, std::vector<double>&)>;

// Limited-memory BFGS with two-loop recursion and Armijo backtracking.
LbfgsResult lbfgs_minimize(const Objective& objective,
                           std::vector<double> x0,
                           const LbfgsOptions& options = {});

} // namespace itinerant
