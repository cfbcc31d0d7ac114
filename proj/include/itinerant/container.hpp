#pragma once

#include "itinerant/feedback.hpp"
#include "itinerant/innate.hpp"
#include "itinerant/network.hpp"
#include "itinerant/readout.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>

namespace itinerant {

inline constexpr const char* kContainerVersion = "itinerant-net-v1";

// Self-describing bundle of everything the three training steps produce.
// Stored as CBOR, so doubles round-trip exactly and saves are byte-stable.
struct ModelContainer {
    Network network;
    std::optional<Readout> readout;
    std::optional<Classifier> classifier;
    double l_innate_ms = 0.0;
    TrainReport train_report;
    std::string experiment_config_hash;
};

void save_container(const std::string& path, const ModelContainer& container);
ModelContainer load_container(const std::string& path);

// FNV-1a over the canonical JSON dump, hex-encoded.
std::string config_hash(const nlohmann::json& config);

} // namespace itinerant
