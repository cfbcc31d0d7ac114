#pragma once

#include "itinerant/kernels.hpp"
#include "itinerant/rng.hpp"
#include "itinerant/types.hpp"

#include <vector>

namespace itinerant {

// Two-part echo state network: a non-chaotic input ESN driving a chaotic ESN
// through a tuned feed-forward bridge. All randomness is derived from
// config.seed; identical (config, M) gives bit-identical networks.
struct Network {
    SimConfig config;
    int n_symbols = 0;

    std::vector<double> j_in;          // n_in x n_in, row-major
    kernels::CsrMatrix j_ch;           // n_ch x n_ch, density p
    std::vector<double> j_ic;          // n_ch x n_in, row-major; tuned
    bool bridge_tuned = false;
    std::vector<std::vector<double>> u_in; // per symbol, length n_in
    std::vector<std::vector<double>> v_s;  // per symbol, length n_ch

    int n_in() const { return config.n_in; }
    int n_ch() const { return config.n_ch; }
    int n_total() const { return config.total_nodes(); }

    // Presynaptic index set of chaotic node i (nonzero columns of row i).
    std::pair<const int*, int> presynaptic(int i) const {
        const int begin = j_ch.row_ptr[i];
        return {j_ch.col_idx.data() + begin, j_ch.row_ptr[i + 1] - begin};
    }
};

Network build_network(const SimConfig& config, int n_symbols);

} // namespace itinerant
