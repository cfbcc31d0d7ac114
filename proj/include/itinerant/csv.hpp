#pragma once

#include "itinerant/types.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace itinerant {

// Header: t,symbol,x_0,...,x_{N-1}. columns restricts the state columns
// written (empty = all). Values are printed with shortest round-trip
// precision so reruns are byte-identical.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<int>& columns = {});

// Header: t,y_0,...
void write_curve_csv(const std::string& path,
                     const std::vector<double>& times,
                     const std::vector<std::vector<double>>& rows,
                     const std::string& value_prefix = "y");

// Header: t_switch,from,to
void write_switch_log_csv(
    const std::string& path,
    const std::vector<std::tuple<double, int, int>>& switches);

void write_grid_csv(const std::string& path, const std::vector<int>& cells,
                    int resolution);

} // namespace itinerant
