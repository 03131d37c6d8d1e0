#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ehrelay/params.hpp"

namespace ehrelay {

enum class SimMode {
    Original,
    SourceDominant, // source sends dummy packets when its queue is empty
    RelayDominant,  // relay sends dummy packets when its queue is empty
    Saturated,      // both queues always hold a packet
};

std::string to_string(SimMode mode);
// Accepts original|source-dominant|relay-dominant|saturated.
SimMode parse_mode(const std::string& text);

struct NetworkState {
    std::uint64_t q_s_len = 0;
    std::uint64_t q_r_len = 0;
    std::uint64_t b_s_level = 0;
    std::uint64_t b_r_level = 0;
    std::uint64_t slot_index = 0;
};

struct SimConfig {
    ChannelParams ch;
    EnergyParams en;
    AccessPolicy pol;
    RatePoint rates;
    SimMode mode = SimMode::Original;
    std::uint64_t horizon = 1'000'000;
    std::uint64_t seed = 1;
    std::uint64_t warmup = 100'000;
    std::uint64_t trajectory_stride = 1000;
};

// Throws ConfigError unless horizon > warmup and all parameters are in range.
void check_config(const SimConfig& cfg);

// One uniform [0,1) draw per named stream per slot.
struct SlotDraws {
    double source_arrival = 1.0;
    double relay_arrival = 1.0;
    double source_harvest = 1.0;
    double relay_harvest = 1.0;
    double source_decision = 1.0;
    double relay_decision = 1.0;
    double channel_sd = 1.0;
    double channel_sr = 1.0;
    double channel_rd = 1.0;
};

// Independent generators, one per stream, all derived from the master
// seed. Every stream advances exactly once per slot whatever the mode, so
// runs in different modes with the same seed share their random numbers.
class RandomStreams {
public:
    enum Stream : std::size_t {
        SourceArrival,
        RelayArrival,
        SourceHarvest,
        RelayHarvest,
        SourceDecision,
        RelayDecision,
        ChannelSd,
        ChannelSr,
        ChannelRd,
        Count
    };

    explicit RandomStreams(std::uint64_t seed);

    double uniform(Stream s);
    SlotDraws next();

private:
    std::array<std::mt19937_64, Count> engines_;
};

// What happened in one slot. Activity flags describe the start-of-slot
// state; the rest describe the slot's outcome.
struct SlotEvents {
    bool s_battery = false; // B_S != 0
    bool r_battery = false;
    bool s_busy = false; // queue nonempty (always true for a saturated node)
    bool r_busy = false;
    bool s_active = false; // eligible to transmit: (busy or dummy-capable) and battery
    bool r_active = false;
    bool s_attempt = false;
    bool r_attempt = false;
    bool s_dummy = false;
    bool r_dummy = false;
    bool collision = false;
    bool direct_delivery = false; // source packet decoded by D
    bool relay_transfer = false;  // source packet decoded by R (and not D)
    bool relay_delivery = false;  // relay packet decoded by D
    bool s_arrival = false;       // exogenous arrival admitted to the source queue
    bool r_arrival = false;
    bool s_harvest = false;
    bool r_harvest = false;
};

struct StepResult {
    NetworkState state;
    SlotEvents events;
};

// Advances one slot: decisions use the start-of-slot state, battery is
// charged per attempt, collisions and erasures move nothing, and arrivals
// and harvests land at the end of the slot.
StepResult step(const NetworkState& state, const SimConfig& cfg, const SlotDraws& draws);

struct TrajectorySample {
    std::uint64_t slot = 0;
    std::uint64_t q_s = 0;
    std::uint64_t q_r = 0;
    std::uint64_t b_s = 0;
    std::uint64_t b_r = 0;
};

// Whole-run totals; these satisfy the conservation laws exactly.
struct FlowCounts {
    std::uint64_t source_arrivals = 0;
    std::uint64_t relay_arrivals = 0;
    std::uint64_t direct_deliveries = 0;
    std::uint64_t relay_transfers = 0;
    std::uint64_t relay_deliveries = 0;
    std::uint64_t collisions = 0;
    std::uint64_t s_attempts = 0;
    std::uint64_t r_attempts = 0;
    std::uint64_t s_dummies = 0;
    std::uint64_t r_dummies = 0;
    std::uint64_t s_harvests = 0;
    std::uint64_t r_harvests = 0;
};

// Post-warmup slot counts behind the occupancy estimates.
struct OccupancyCounts {
    std::uint64_t slots = 0;
    std::uint64_t s_battery = 0;
    std::uint64_t r_battery = 0;
    std::uint64_t s_active = 0;
    std::uint64_t r_active = 0;
    std::uint64_t s_busy = 0;
    std::uint64_t r_busy = 0;
    // Source busy with charged battery, split by relay activity; and the
    // relay analogue split by source activity.
    std::uint64_t s_busy_charged_r_active = 0;
    std::uint64_t s_busy_charged_r_idle = 0;
    std::uint64_t r_busy_charged_s_active = 0;
    std::uint64_t r_busy_charged_s_idle = 0;
    std::uint64_t s_departures = 0;
    std::uint64_t r_departures = 0;
    std::uint64_t transfers = 0;
};

struct SimMetrics {
    // Service rates: departures per post-warmup slot in which the queue had
    // a packet. For a saturated node this is its throughput.
    double measured_mu_s = 0.0;
    double measured_mu_r = 0.0;
    // Departures per post-warmup slot.
    double throughput_s = 0.0;
    double throughput_r = 0.0;
    double measured_lambda_s_to_r = 0.0;
    double pr_bs_nonempty = 0.0;
    double pr_br_nonempty = 0.0;
    double pr_as = 0.0;
    double pr_ar = 0.0;

    OccupancyCounts occupancy;
    FlowCounts flows;
    NetworkState final_state;
    std::vector<TrajectorySample> trajectory;
};

using SlotObserver = std::function<void(const NetworkState& before, const StepResult& after)>;

// Deterministic in (cfg, cfg.seed). Starts from empty queues and batteries.
SimMetrics run(const SimConfig& cfg, const SlotObserver& observer = {});

struct ServiceResiduals {
    double predicted_mu_s = 0.0;
    double measured_mu_s = 0.0;
    double predicted_mu_r = 0.0;
    double measured_mu_r = 0.0;

    double residual_s() const;
    double residual_r() const;
};

// Plugs measured occupancy probabilities into the service-rate identities
// and compares with the measured service rates. Requires an ORIGINAL run
// whose queues pass the drift screen (PreconditionError / UnstableRunError).
ServiceResiduals measure_service_identities(const SimMetrics& metrics, const SimConfig& cfg);

// Least-squares slope of queue length against slot over the post-warmup
// trajectory; `relay` selects the relay queue.
double trajectory_slope(const SimMetrics& metrics, std::uint64_t warmup, bool relay);

// Slope above which a queue counts as drifting.
inline constexpr double kDriftSlope = 1e-3;

} // namespace ehrelay
