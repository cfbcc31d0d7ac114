#include "itinerant/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace itinerant {
namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

void append_double(std::string& line, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    line.append(buf, ptr);
}

} // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<int>& columns) {
    auto out = open_for_write(path);
    const int n_state =
        traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
    std::vector<int> cols = columns;
    if (cols.empty()) {
        cols.resize(n_state);
        for (int i = 0; i < n_state; ++i)
            cols[i] = i;
    }

    std::string line = "t,symbol";
    for (int c : cols)
        line += ",x_" + std::to_string(c);
    out << line << '\n';
    for (std::size_t r = 0; r < traj.rows(); ++r) {
        line.clear();
        append_double(line, traj.times[r]);
        line += ',';
        line += std::to_string(traj.symbols[r]);
        for (int c : cols) {
            line += ',';
            append_double(line, traj.states[r][c]);
        }
        out << line << '\n';
    }
}

void write_curve_csv(const std::string& path, const std::vector<double>& times,
                     const std::vector<std::vector<double>>& rows,
                     const std::string& value_prefix) {
    auto out = open_for_write(path);
    const int dims = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    std::string line = "t";
    for (int d = 0; d < dims; ++d)
        line += "," + value_prefix + "_" + std::to_string(d);
    out << line << '\n';
    for (std::size_t r = 0; r < times.size(); ++r) {
        line.clear();
        append_double(line, times[r]);
        for (double v : rows[r]) {
            line += ',';
            append_double(line, v);
        }
        out << line << '\n';
    }
}

void write_switch_log_csv(
    const std::string& path,
    const std::vector<std::tuple<double, int, int>>& switches) {
    auto out = open_for_write(path);
    out << "t_switch,from,to\n";
    std::string line;
    for (const auto& [t, from, to] : switches) {
        line.clear();
        append_double(line, t);
        line += ',' + std::to_string(from) + ',' + std::to_string(to);
        out << line << '\n';
    }
}

void write_grid_csv(const std::string& path, const std::vector<int>& cells,
                    int resolution) {
    auto out = open_for_write(path);
    for (int r = 0; r < resolution; ++r) {
        std::string line;
        for (int c = 0; c < resolution; ++c) {
            if (c)
                line += ',';
            line += std::to_string(cells[r * resolution + c]);
        }
        out << line << '\n';
    }
}

} // namespace itinerant
