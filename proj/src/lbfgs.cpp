#include "itinerant/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace itinerant {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double> x0,
                           const LbfgsOptions& options) {
    const std::size_t n = x0.size();
    LbfgsResult result;
    result.x = std::move(x0);

    std::vector<double> grad(n), new_grad(n);
    double f = objective(result.x, grad);
    if (!std::isfinite(f))
        throw std::runtime_error("non-finite objective at initial point");

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.grad_norm = inf_norm(grad);
        if (result.grad_norm < options.grad_tolerance) {
            result.converged = true;
            break;
        }

        // Two-loop recursion: direction = -H grad
        std::vector<double> q = grad;
        std::vector<double> alphas(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alphas[i] = rho_hist[i] * dot(s_hist[i], q);
            for (std::size_t j = 0; j < n; ++j)
                q[j] -= alphas[i] * y_hist[i][j];
        }
        if (!s_hist.empty()) {
            const double gamma = dot(s_hist.back(), y_hist.back()) /
                                 dot(y_hist.back(), y_hist.back());
            for (auto& v : q)
                v *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], q);
            for (std::size_t j = 0; j < n; ++j)
                q[j] += (alphas[i] - beta) * s_hist[i][j];
        }
        for (auto& v : q)
            v = -v;

        double dir_deriv = dot(grad, q);
        if (dir_deriv >= 0.0) {
            // Not a descent direction (numerical breakdown): restart with
            // steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t j = 0; j < n; ++j)
                q[j] = -grad[j];
            dir_deriv = dot(grad, q);
        }

        // Armijo backtracking
        double step = iter == 0 ? options.initial_step /
                                      std::max(1.0, inf_norm(q))
                                : options.initial_step;
        double new_f = f;
        std::vector<double> new_x(n);
        bool accepted = false;
        for (int ls = 0; ls < options.max_line_search; ++ls) {
            for (std::size_t j = 0; j < n; ++j)
                new_x[j] = result.x[j] + step * q[j];
            new_f = objective(new_x, new_grad);
            if (std::isfinite(new_f) && new_f <= f + 1e-4 * step * dir_deriv) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;

        std::vector<double> s(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = new_x[j] - result.x[j];
            y[j] = new_grad[j] - grad[j];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > options.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        result.x = std::move(new_x);
        new_x.assign(n, 0.0);
        grad = new_grad;
        f = new_f;
        result.iterations = iter + 1;
    }

    result.f = f;
    result.grad_norm = inf_norm(grad);
    if (result.grad_norm < options.grad_tolerance)
        result.converged = true;
    return result;
}

} // namespace itinerant
