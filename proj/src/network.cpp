#include "itinerant/network.hpp"

#include <cmath>

namespace itinerant {
namespace {

// rng stream ids per component
enum : std::uint64_t { kJin = 1, kJch = 2, kUin = 3, kVs = 4 };

} // namespace

Network build_network(const SimConfig& config, int n_symbols) {
    config.validate();
    if (n_symbols < 1)
        throw ConfigError("symbol count must be >= 1");

    Network net;
    net.config = config;
    net.n_symbols = n_symbols;

    const int n_in = config.n_in;
    const int n_ch = config.n_ch;
    Rng root(config.seed);

    {
        Rng rng = root.fork(kJin);
        const double sd = 1.0 / std::sqrt(static_cast<double>(n_in));
        net.j_in.resize(static_cast<std::size_t>(n_in) * n_in);
        for (auto& w : net.j_in)
            w = sd * rng.normal();
    }

    {
        Rng rng = root.fork(kJch);
        const double sd = 1.0 / std::sqrt(config.density * n_ch);
        auto& m = net.j_ch;
        m.rows = m.cols = n_ch;
        m.row_ptr.assign(n_ch + 1, 0);
        for (int i = 0; i < n_ch; ++i) {
            for (int j = 0; j < n_ch; ++j) {
                if (rng.uniform() < config.density) {
                    m.col_idx.push_back(j);
                    m.values.push_back(sd * rng.normal());
                }
            }
            m.row_ptr[i + 1] = m.nnz();
        }
        // Keep every row non-empty so each trained node has presynaptic
        // partners; at density 0.1 an empty row is rare but possible.
        for (int i = 0; i < n_ch; ++i) {
            if (m.row_ptr[i + 1] == m.row_ptr[i]) {
                const int j = rng.index(n_ch);
                m.col_idx.insert(m.col_idx.begin() + m.row_ptr[i], j);
                m.values.insert(m.values.begin() + m.row_ptr[i],
                                sd * rng.normal());
                for (int k = i + 1; k <= n_ch; ++k)
                    ++m.row_ptr[k];
            }
        }
    }

    net.j_ic.assign(static_cast<std::size_t>(n_ch) * n_in, 0.0);

    {
        Rng rng = root.fork(kUin);
        net.u_in.resize(n_symbols);
        for (auto& u : net.u_in) {
            u.resize(n_in);
            for (auto& w : u)
                w = config.input_scale * rng.normal();
        }
    }

    {
        Rng rng = root.fork(kVs);
        net.v_s.resize(n_symbols);
        for (auto& v : net.v_s) {
            v.resize(n_ch);
            for (auto& w : v)
                w = rng.normal();
        }
    }

    return net;
}

} // namespace itinerant
