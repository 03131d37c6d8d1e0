#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ehrelay/simulator.hpp"

namespace ehrelay {

enum class Verdict { Stable, Unstable, Inconclusive };

std::string to_string(Verdict v);

struct StabilityCriteria {
    std::vector<std::uint64_t> seeds;
    double slope_threshold = kDriftSlope; // packets/slot
    // Final-quartile mean length limit; derived from the analytic load when
    // unset.
    std::optional<double> l_max_s;
    std::optional<double> l_max_r;
    double warmup_fraction = 0.1;
    std::uint64_t trajectory_stride = 100;
    unsigned threads = 0; // 0: hardware concurrency
};

// Seeds derived from one master seed (deterministic).
std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count);

struct QueueEvidence {
    std::uint64_t seed = 0;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double first_quartile_mean = 0.0;
    double final_quartile_mean = 0.0;
    double max_length = 0.0;
    double measured_mu = 0.0;
};

struct QueueVerdict {
    Verdict verdict = Verdict::Inconclusive;
    double l_max = 0.0;
    std::vector<QueueEvidence> evidence; // in seed order
};

struct StabilityVerdict {
    QueueVerdict source;
    QueueVerdict relay;

    // Unstable if either queue is, stable if both are.
    Verdict network() const;
};

// Runs the ORIGINAL system once per seed (cfg.mode, cfg.seed and
// cfg.warmup are replaced) and classifies each queue by the drift of its
// post-warmup trajectory. Throws ConfigError for horizon < 1e5 or fewer
// than three seeds.
StabilityVerdict assess(const SimConfig& cfg, const StabilityCriteria& criteria);

// Limit used when the criteria leave it unset: 50 / (1 - rho) for analytic
// load rho < 1 (saturated-throughput load), else 1000.
double default_l_max(double load);

nlohmann::json to_json(const StabilityVerdict& v);

} // namespace ehrelay
