#include "itinerant/container.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace itinerant {

using nlohmann::json;

namespace {

json config_to_json(const SimConfig& c) {
    return json{{"n_in", c.n_in},
                {"n_ch", c.n_ch},
                {"tau", c.tau},
                {"g_in", c.g_in},
                {"g_ch", c.g_ch},
                {"density", c.density},
                {"dt", c.dt},
                {"input_scale", c.input_scale},
                {"seed", c.seed}};
}

SimConfig config_from_json(const json& j) {
    SimConfig c;
    c.n_in = j.at("n_in");
    c.n_ch = j.at("n_ch");
    c.tau = j.at("tau");
    c.g_in = j.at("g_in");
    c.g_ch = j.at("g_ch");
    c.density = j.at("density");
    c.dt = j.at("dt");
    c.input_scale = j.at("input_scale");
    c.seed = j.at("seed");
    return c;
}

json network_to_json(const Network& net) {
    return json{{"config", config_to_json(net.config)},
                {"n_symbols", net.n_symbols},
                {"j_in", net.j_in},
                {"j_ch",
                 {{"rows", net.j_ch.rows},
                  {"cols", net.j_ch.cols},
                  {"row_ptr", net.j_ch.row_ptr},
                  {"col_idx", net.j_ch.col_idx},
                  {"values", net.j_ch.values}}},
                {"j_ic", net.j_ic},
                {"bridge_tuned", net.bridge_tuned},
                {"u_in", net.u_in},
                {"v_s", net.v_s}};
}

Network network_from_json(const json& j) {
    Network net;
    net.config = config_from_json(j.at("config"));
    net.n_symbols = j.at("n_symbols");
    net.j_in = j.at("j_in").get<std::vector<double>>();
    const json& ch = j.at("j_ch");
    net.j_ch.rows = ch.at("rows");
    net.j_ch.cols = ch.at("cols");
    net.j_ch.row_ptr = ch.at("row_ptr").get<std::vector<int>>();
    net.j_ch.col_idx = ch.at("col_idx").get<std::vector<int>>();
    net.j_ch.values = ch.at("values").get<std::vector<double>>();
    net.j_ic = j.at("j_ic").get<std::vector<double>>();
    net.bridge_tuned = j.at("bridge_tuned");
    net.u_in = j.at("u_in").get<std::vector<std::vector<double>>>();
    net.v_s = j.at("v_s").get<std::vector<std::vector<double>>>();
    return net;
}

ModelContainer parse_container(const json& j);

} // namespace

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void save_container(const std::string& path, const ModelContainer& container) {
    json j;
    j["version"] = kContainerVersion;
    j["network"] = network_to_json(container.network);
    j["l_innate_ms"] = container.l_innate_ms;
    j["experiment_config_hash"] = container.experiment_config_hash;
    j["train_report"] = {{"epoch_costs", container.train_report.epoch_costs},
                         {"best_epoch", container.train_report.best_epoch},
                         {"best_cost", container.train_report.best_cost},
                         {"nmse_before", container.train_report.nmse_before},
                         {"nmse_after", container.train_report.nmse_after}};
    if (container.readout) {
        const Readout& r = *container.readout;
        j["readout"] = {{"dims", r.dims},
                        {"n_features", r.n_features},
                        {"w", r.w},
                        {"ridge_alpha", r.ridge_alpha},
                        {"l_out_ms", r.l_out_ms}};
    }
    if (container.classifier) {
        const Classifier& c = *container.classifier;
        j["classifier"] = {{"n_symbols", c.n_symbols},
                           {"n_features", c.n_features},
                           {"has_bias", c.has_bias},
                           {"w", c.w}};
    }

    const std::vector<std::uint8_t> bytes = json::to_cbor(j);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

ModelContainer load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::from_cbor(bytes);
    } catch (const json::exception& e) {
        throw ConfigError(path + " is not a model container: " + e.what());
    }
    if (!j.is_object() || !j.contains("version") ||
        !j.at("version").is_string())
        throw ConfigError(path + " is not a model container");
    if (j.at("version") != kContainerVersion)
        throw ConfigError("unsupported container version: " +
                          j.at("version").get<std::string>());

    try {
        return parse_container(j);
    } catch (const json::exception& e) {
        throw ConfigError(path + " is malformed: " + e.what());
    }
}

namespace {

ModelContainer parse_container(const json& j) {
    ModelContainer container;
    container.network = network_from_json(j.at("network"));
    container.l_innate_ms = j.at("l_innate_ms");
    container.experiment_config_hash = j.at("experiment_config_hash");
    const json& tr = j.at("train_report");
    container.train_report.epoch_costs =
        tr.at("epoch_costs").get<std::vector<double>>();
    container.train_report.best_epoch = tr.at("best_epoch");
    container.train_report.best_cost = tr.at("best_cost");
    container.train_report.nmse_before = tr.at("nmse_before");
    container.train_report.nmse_after = tr.at("nmse_after");
    if (j.contains("readout")) {
        Readout r;
        const json& jr = j.at("readout");
        r.dims = jr.at("dims");
        r.n_features = jr.at("n_features");
        r.w = jr.at("w").get<std::vector<double>>();
        r.ridge_alpha = jr.at("ridge_alpha");
        r.l_out_ms = jr.at("l_out_ms");
        container.readout = std::move(r);
    }
    if (j.contains("classifier")) {
        Classifier c;
        const json& jc = j.at("classifier");
        c.n_symbols = jc.at("n_symbols");
        c.n_features = jc.at("n_features");
        c.has_bias = jc.at("has_bias");
        c.w = jc.at("w").get<std::vector<double>>();
        container.classifier = std::move(c);
    }
    return container;
}

} // namespace

} // namespace itinerant
