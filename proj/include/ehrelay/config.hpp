#pragma once

#include <string>

#include "json.hpp"

#include "ehrelay/params.hpp"
#include "ehrelay/simulator.hpp"

namespace ehrelay {

// The nine model parameters of a configuration document.
struct ModelConfig {
    ChannelParams ch;
    EnergyParams en;
    AccessPolicy pol;
    RatePoint rates;
};

// Keys p_sd, p_rd, p_sr, delta_s, delta_r, q_s, q_r, lambda_s, lambda_r are
// required decimal numbers in [0,1]; p_rd must exceed p_sd. Unknown keys
// are ignored. Throws ConfigError listing every offending field.
ModelConfig parse_model_config(const nlohmann::json& doc);

// Model keys plus optional mode (default original), horizon (1e6), seed
// (1) and warmup (10% of horizon).
SimConfig parse_sim_config(const nlohmann::json& doc);

// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
nlohmann::json load_json_file(const std::string& path);

nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const SimConfig& cfg);
// Scalar metrics and counters (trajectory excluded).
nlohmann::json to_json(const SimMetrics& m);

// CSV with header `slot,q_s,q_r,b_s,b_r`.
std::string trajectory_csv(const SimMetrics& m);

} // namespace ehrelay
