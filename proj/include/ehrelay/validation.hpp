#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ehrelay {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    nlohmann::json metrics = nlohmann::json::object();
};

struct ValidationOptions {
    std::uint64_t seed = 1;
    std::uint64_t horizon = 1'000'000; // slots per simulation
    unsigned threads = 0;              // 0: hardware concurrency
};

CheckResult check_battery_law(const ValidationOptions& opts);
CheckResult check_relay_split(const ValidationOptions& opts);
CheckResult check_saturated_throughput(const ValidationOptions& opts);
CheckResult check_service_identities(const ValidationOptions& opts);
CheckResult check_bound_sandwich(const ValidationOptions& opts);
CheckResult check_closure_vs_union(const ValidationOptions& opts);
CheckResult check_boundary_continuity(const ValidationOptions& opts);
CheckResult check_optimizers(const ValidationOptions& opts);
CheckResult check_stability_concordance(const ValidationOptions& opts);
CheckResult check_achievability(const ValidationOptions& opts);

using Check = std::function<CheckResult(const ValidationOptions&)>;

// Checks 1 to 10 in order. Determinism (11) needs the command layer and
// lives there.
std::vector<Check> model_checks();

// Runs the checks concurrently; results come back in input order. A check
// that throws is reported as failed with the exception message.
std::vector<CheckResult> run_checks(const std::vector<Check>& checks, const ValidationOptions& opts);

nlohmann::json to_json(const CheckResult& r);
nlohmann::json to_json(const std::vector<CheckResult>& results);

} // namespace ehrelay
