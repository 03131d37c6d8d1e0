#include "ehrelay/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/stats.hpp"

namespace ehrelay {

std::string to_string(SimMode mode) {
    switch (mode) {
    case SimMode::Original: return "original";
    case SimMode::SourceDominant: return "source-dominant";
    case SimMode::RelayDominant: return "relay-dominant";
    case SimMode::Saturated: return "saturated";
    }
    return "?";
}

SimMode parse_mode(const std::string& text) {
    if (text == "original")
        return SimMode::Original;
    if (text == "source-dominant")
        return SimMode::SourceDominant;
    if (text == "relay-dominant")
        return SimMode::RelayDominant;
    if (text == "saturated")
        return SimMode::Saturated;
    throw ConfigError("mode: expected original|source-dominant|relay-dominant|saturated, got '" + text + "'");
}

void check_config(const SimConfig& cfg) {
    std::vector<FieldError> errors;
    // The p_rd > p_sd modelling assumption is enforced where configs are
    // loaded; the simulator itself runs for any probabilities.
    for (auto& e : validate(cfg.ch))
        if (e.field != "p_rd" || !(cfg.ch.p_rd >= 0.0 && cfg.ch.p_rd <= 1.0))
            errors.push_back(e);
    for (auto&& list : {validate(cfg.en), validate(cfg.pol), validate(cfg.rates)})
        errors.insert(errors.end(), list.begin(), list.end());
    if (!(cfg.horizon > cfg.warmup))
        errors.push_back({"horizon", "must exceed warmup"});
    if (cfg.trajectory_stride == 0)
        errors.push_back({"trajectory_stride", "must be positive"});
    if (!errors.empty())
        throw ConfigError(describe(errors));
}

RandomStreams::RandomStreams(std::uint64_t seed) {
    for (std::size_t s = 0; s < Count; ++s) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(s), 0x5eedu};
        engines_[s].seed(seq);
    }
}

double RandomStreams::uniform(Stream s) {
    return static_cast<double>(engines_[s]() >> 11) * 0x1.0p-53;
}

SlotDraws RandomStreams::next() {
    SlotDraws d;
    d.source_arrival = uniform(SourceArrival);
    d.relay_arrival = uniform(RelayArrival);
    d.source_harvest = uniform(SourceHarvest);
    d.relay_harvest = uniform(RelayHarvest);
    d.source_decision = uniform(SourceDecision);
    d.relay_decision = uniform(RelayDecision);
    d.channel_sd = uniform(ChannelSd);
    d.channel_sr = uniform(ChannelSr);
    d.channel_rd = uniform(ChannelRd);
    return d;
}

StepResult step(const NetworkState& state, const SimConfig& cfg, const SlotDraws& draws) {
    StepResult out{state, {}};
    SlotEvents& ev = out.events;
    NetworkState& next = out.state;

    const bool s_saturated = cfg.mode == SimMode::Saturated;
    const bool r_saturated = cfg.mode == SimMode::Saturated;
    const bool s_dummy_capable = s_saturated || cfg.mode == SimMode::SourceDominant;
    const bool r_dummy_capable = r_saturated || cfg.mode == SimMode::RelayDominant;

    // (1) eligibility from the start-of-slot state
    ev.s_battery = state.b_s_level > 0;
    ev.r_battery = state.b_r_level > 0;
    ev.s_busy = s_saturated || state.q_s_len > 0;
    ev.r_busy = r_saturated || state.q_r_len > 0;
    ev.s_active = (ev.s_busy || s_dummy_capable) && ev.s_battery;
    ev.r_active = (ev.r_busy || r_dummy_capable) && ev.r_battery;

    // (2) independent transmit decisions; every attempt costs one unit
    ev.s_attempt = ev.s_active && draws.source_decision < cfg.pol.q_s;
    ev.r_attempt = ev.r_active && draws.relay_decision < cfg.pol.q_r;
    if (ev.s_attempt) {
        --next.b_s_level;
        ev.s_dummy = !ev.s_busy;
    }
    if (ev.r_attempt) {
        --next.b_r_level;
        ev.r_dummy = !ev.r_busy;
    }

    // (3) outcome on the collision channel with erasures
    if (ev.s_attempt && ev.r_attempt) {
        ev.collision = true;
    } else if (ev.s_attempt && !ev.s_dummy) {
        if (draws.channel_sd < cfg.ch.p_sd) {
            ev.direct_delivery = true;
            if (!s_saturated)
                --next.q_s_len;
        } else if (draws.channel_sr < cfg.ch.p_sr) {
            // The relay is idle this slot, so it can overhear and take over.
            ev.relay_transfer = true;
            if (!s_saturated)
                --next.q_s_len;
            if (!r_saturated)
                ++next.q_r_len;
        }
    } else if (ev.r_attempt && !ev.r_dummy) {
        if (draws.channel_rd < cfg.ch.p_rd) {
            ev.relay_delivery = true;
            if (!r_saturated)
                --next.q_r_len;
        }
    }

    // (4) end-of-slot arrivals and harvests
    const bool s_arrives = draws.source_arrival < cfg.rates.lambda_s;
    const bool r_arrives = draws.relay_arrival < cfg.rates.lambda_r;
    ev.s_arrival = s_arrives && !s_saturated;
    ev.r_arrival = r_arrives && !r_saturated;
    if (ev.s_arrival)
        ++next.q_s_len;
    if (ev.r_arrival)
        ++next.q_r_len;
    ev.s_harvest = draws.source_harvest < cfg.en.delta_s;
    ev.r_harvest = draws.relay_harvest < cfg.en.delta_r;
    if (ev.s_harvest)
        ++next.b_s_level;
    if (ev.r_harvest)
        ++next.b_r_level;

    ++next.slot_index;
    return out;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

void tally_flows(FlowCounts& f, const SlotEvents& ev) {
    f.source_arrivals += ev.s_arrival;
    f.relay_arrivals += ev.r_arrival;
    f.direct_deliveries += ev.direct_delivery;
    f.relay_transfers += ev.relay_transfer;
    f.relay_deliveries += ev.relay_delivery;
    f.collisions += ev.collision;
    f.s_attempts += ev.s_attempt;
    f.r_attempts += ev.r_attempt;
    f.s_dummies += ev.s_dummy;
    f.r_dummies += ev.r_dummy;
    f.s_harvests += ev.s_harvest;
    f.r_harvests += ev.r_harvest;
}

void tally_occupancy(OccupancyCounts& o, const SlotEvents& ev) {
    ++o.slots;
    o.s_battery += ev.s_battery;
    o.r_battery += ev.r_battery;
    o.s_active += ev.s_active;
    o.r_active += ev.r_active;
    o.s_busy += ev.s_busy;
    o.r_busy += ev.r_busy;
    if (ev.s_busy && ev.s_battery) {
        if (ev.r_active)
            ++o.s_busy_charged_r_active;
        else
            ++o.s_busy_charged_r_idle;
    }
    if (ev.r_busy && ev.r_battery) {
        if (ev.s_active)
            ++o.r_busy_charged_s_active;
        else
            ++o.r_busy_charged_s_idle;
    }
    o.s_departures += ev.direct_delivery || ev.relay_transfer;
    o.r_departures += ev.relay_delivery;
    o.transfers += ev.relay_transfer;
}

} // namespace

SimMetrics run(const SimConfig& cfg, const SlotObserver& observer) {
    check_config(cfg);
    RandomStreams streams(cfg.seed);
    SimMetrics m;
    NetworkState state;
    m.trajectory.reserve(cfg.horizon / cfg.trajectory_stride + 1);

    for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
        if (t % cfg.trajectory_stride == 0)
            m.trajectory.push_back({t, state.q_s_len, state.q_r_len, state.b_s_level, state.b_r_level});
        const SlotDraws draws = streams.next();
        StepResult res = step(state, cfg, draws);
        tally_flows(m.flows, res.events);
        if (t >= cfg.warmup)
            tally_occupancy(m.occupancy, res.events);
        if (observer)
            observer(state, res);
        state = res.state;
    }

    const OccupancyCounts& o = m.occupancy;
    m.measured_mu_s = ratio(o.s_departures, o.s_busy);
    m.measured_mu_r = ratio(o.r_departures, o.r_busy);
    m.throughput_s = ratio(o.s_departures, o.slots);
    m.throughput_r = ratio(o.r_departures, o.slots);
    m.measured_lambda_s_to_r = ratio(o.transfers, o.slots);
    m.pr_bs_nonempty = ratio(o.s_battery, o.slots);
    m.pr_br_nonempty = ratio(o.r_battery, o.slots);
    m.pr_as = ratio(o.s_active, o.slots);
    m.pr_ar = ratio(o.r_active, o.slots);
    m.final_state = state;
    return m;
}

double ServiceResiduals::residual_s() const { return std::abs(predicted_mu_s - measured_mu_s); }
double ServiceResiduals::residual_r() const { return std::abs(predicted_mu_r - measured_mu_r); }

double trajectory_slope(const SimMetrics& metrics, std::uint64_t warmup, bool relay) {
    std::vector<double> xs, ys;
    for (const auto& s : metrics.trajectory) {
        if (s.slot < warmup)
            continue;
        xs.push_back(static_cast<double>(s.slot));
        ys.push_back(static_cast<double>(relay ? s.q_r : s.q_s));
    }
    return fit_line(xs, ys).slope;
}

ServiceResiduals measure_service_identities(const SimMetrics& metrics, const SimConfig& cfg) {
    if (cfg.mode != SimMode::Original)
        throw PreconditionError("measure_service_identities: requires an ORIGINAL-mode run, got " +
                                to_string(cfg.mode));
    const double slope_s = trajectory_slope(metrics, cfg.warmup, false);
    const double slope_r = trajectory_slope(metrics, cfg.warmup, true);
    if (slope_s > kDriftSlope || slope_r > kDriftSlope)
        throw UnstableRunError("measure_service_identities: queue drift exceeds stability screen");

    const OccupancyCounts& o = metrics.occupancy;
    const double alpha = success_aggregate(cfg.ch);
    ServiceResiduals r;
    r.measured_mu_s = metrics.measured_mu_s;
    r.measured_mu_r = metrics.measured_mu_r;
    r.predicted_mu_s = (cfg.pol.q_s * (1.0 - cfg.pol.q_r) * ratio(o.s_busy_charged_r_active, o.s_busy) +
                        cfg.pol.q_s * ratio(o.s_busy_charged_r_idle, o.s_busy)) *
                       alpha;
    r.predicted_mu_r = (cfg.pol.q_r * (1.0 - cfg.pol.q_s) * ratio(o.r_busy_charged_s_active, o.r_busy) +
                        cfg.pol.q_r * ratio(o.r_busy_charged_s_idle, o.r_busy)) *
                       cfg.ch.p_rd;
    return r;
}

} // namespace ehrelay
