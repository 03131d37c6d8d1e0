#include "doctest.h"

#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/simulator.hpp"

using namespace ehrelay;

namespace {

SimConfig reference(SimMode mode = SimMode::Original) {
    SimConfig cfg;
    cfg.ch = {0.2, 0.6, 0.5};
    cfg.en = {0.5, 0.6};
    cfg.pol = {0.3, 0.4};
    cfg.rates = {0.05, 0.1};
    cfg.mode = mode;
    cfg.horizon = 200'000;
    cfg.warmup = 20'000;
    return cfg;
}

// Draws that make every Bernoulli event fail.
SlotDraws nothing_happens() { return {}; }

} // namespace

TEST_CASE("lone source packet delivered directly") {
    const auto cfg = reference();
    SlotDraws d = nothing_happens();
    d.source_decision = 0.0;
    d.channel_sd = 0.0;
    const auto r = step({1, 0, 1, 0, 0}, cfg, d);
    CHECK(r.events.direct_delivery);
    CHECK(r.state.q_s_len == 0);
    CHECK(r.state.b_s_level == 0);
    CHECK(r.state.q_r_len == 0);
    CHECK(r.state.slot_index == 1);
}

TEST_CASE("relay takes over a packet the destination missed") {
    const auto cfg = reference();
    SlotDraws d = nothing_happens();
    d.source_decision = 0.0;
    d.channel_sr = 0.0;
    const auto r = step({1, 0, 1, 0, 0}, cfg, d);
    CHECK(r.events.relay_transfer);
    CHECK(r.state.q_s_len == 0);
    CHECK(r.state.q_r_len == 1);
}

TEST_CASE("collision costs both batteries and moves nothing") {
    const auto cfg = reference();
    SlotDraws d = nothing_happens();
    d.source_decision = 0.0;
    d.relay_decision = 0.0;
    d.channel_sd = d.channel_sr = d.channel_rd = 0.0;
    const auto r = step({2, 3, 1, 1, 0}, cfg, d);
    CHECK(r.events.collision);
    CHECK(r.state.q_s_len == 2);
    CHECK(r.state.q_r_len == 3);
    CHECK(r.state.b_s_level == 0);
    CHECK(r.state.b_r_level == 0);
}

TEST_CASE("erasure still costs energy") {
    const auto cfg = reference();
    SlotDraws d = nothing_happens();
    d.relay_decision = 0.0;
    const auto r = step({0, 1, 0, 2, 0}, cfg, d);
    CHECK(r.events.r_attempt);
    CHECK_FALSE(r.events.relay_delivery);
    CHECK(r.state.q_r_len == 1);
    CHECK(r.state.b_r_level == 1);
}

TEST_CASE("empty battery blocks transmission") {
    const auto cfg = reference();
    SlotDraws d = nothing_happens();
    d.source_decision = 0.0;
    d.channel_sd = 0.0;
    const auto r = step({4, 0, 0, 0, 0}, cfg, d);
    CHECK_FALSE(r.events.s_active);
    CHECK(r.state.q_s_len == 4);
}

TEST_CASE("arrivals and harvests land at slot end") {
    const auto cfg = reference();
    SlotDraws d{};
    d.source_arrival = 0.0;
    d.source_harvest = 0.0;
    d.source_decision = 0.0;
    d.channel_sd = 0.0;
    // Empty queue and battery at the start: nothing can be sent this slot.
    const auto r = step({0, 0, 0, 0, 0}, cfg, d);
    CHECK_FALSE(r.events.s_attempt);
    CHECK(r.state.q_s_len == 1);
    CHECK(r.state.b_s_level == 1);
}

TEST_CASE("dummy packets in the dominant systems") {
    SlotDraws d = nothing_happens();
    d.source_decision = 0.0;
    d.channel_sd = 0.0;
    auto r = step({0, 0, 1, 0, 0}, reference(SimMode::SourceDominant), d);
    CHECK(r.events.s_dummy);
    CHECK_FALSE(r.events.direct_delivery);
    CHECK(r.state.b_s_level == 0);

    // A relay dummy still collides with a real source packet.
    d.relay_decision = 0.0;
    r = step({1, 0, 1, 1, 0}, reference(SimMode::RelayDominant), d);
    CHECK(r.events.r_dummy);
    CHECK(r.events.collision);
    CHECK(r.state.q_s_len == 1);
}

TEST_CASE("saturated queues never change") {
    const auto cfg = reference(SimMode::Saturated);
    SlotDraws d{};
    d.source_arrival = d.relay_arrival = 0.0;
    d.source_decision = 0.0;
    d.channel_sd = 0.0;
    const auto r = step({0, 0, 1, 1, 0}, cfg, d);
    CHECK(r.events.direct_delivery);
    CHECK_FALSE(r.events.s_arrival);
    CHECK(r.state.q_s_len == 0);
    CHECK(r.state.q_r_len == 0);
}

TEST_CASE("packet and energy conservation") {
    for (auto mode : {SimMode::Original, SimMode::SourceDominant, SimMode::RelayDominant}) {
        auto cfg = reference(mode);
        cfg.rates = {0.12, 0.1};
        const auto m = run(cfg);
        const auto& f = m.flows;
        CHECK(f.source_arrivals == f.direct_deliveries + f.relay_transfers + m.final_state.q_s_len);
        CHECK(f.relay_arrivals + f.relay_transfers == f.relay_deliveries + m.final_state.q_r_len);
        CHECK(f.s_harvests - f.s_attempts == m.final_state.b_s_level);
        CHECK(f.r_harvests - f.r_attempts == m.final_state.b_r_level);
        CHECK(m.final_state.slot_index == cfg.horizon);
    }
}

TEST_CASE("half duplex relay") {
    auto cfg = reference();
    cfg.horizon = 50'000;
    cfg.warmup = 0;
    std::uint64_t both = 0;
    run(cfg, [&](const NetworkState&, const StepResult& r) {
        if (r.events.r_attempt)
            CHECK_FALSE(r.events.relay_transfer);
        both += r.events.s_attempt && r.events.r_attempt;
        if (r.events.collision)
            CHECK((r.events.direct_delivery || r.events.relay_transfer || r.events.relay_delivery) == false);
    });
    CHECK(both > 0);
}

TEST_CASE("runs are deterministic in the seed") {
    const auto cfg = reference();
    const auto a = run(cfg);
    const auto b = run(cfg);
    CHECK(a.flows.direct_deliveries == b.flows.direct_deliveries);
    CHECK(a.final_state.q_r_len == b.final_state.q_r_len);
    CHECK(a.measured_mu_s == b.measured_mu_s);

    auto other = cfg;
    other.seed = 2;
    CHECK(run(other).flows.source_arrivals != a.flows.source_arrivals);
}

TEST_CASE("modes share their random numbers") {
    // Harvest streams are drawn identically whatever the mode.
    const auto original = run(reference(SimMode::Original));
    const auto saturated = run(reference(SimMode::Saturated));
    CHECK(original.flows.s_harvests == saturated.flows.s_harvests);
    CHECK(original.flows.r_harvests == saturated.flows.r_harvests);
}

TEST_CASE("saturated mode converges to the closed forms") {
    const auto cfg = reference(SimMode::Saturated);
    const auto m = run(cfg);
    const auto mu = saturated_throughput(cfg.ch, cfg.en, cfg.pol);
    CHECK(std::abs(m.throughput_s - mu.mu_s) < 0.01);
    CHECK(std::abs(m.throughput_r - mu.mu_r) < 0.01);
    CHECK(std::abs(m.pr_bs_nonempty - battery_nonempty_prob(0.5, 0.3)) < 0.01);
}

TEST_CASE("single node reduction") {
    // No relay capture and no relay traffic: the source alone sees an
    // always-full queue and succeeds at rate min(delta, q) p_sd.
    auto cfg = reference();
    cfg.ch = {0.4, 0.6, 0.0};
    cfg.en = {0.25, 0.6};
    cfg.pol = {0.5, 0.4};
    cfg.rates = {1.0, 0.0};
    const auto m = run(cfg);
    CHECK(m.flows.relay_transfers == 0);
    CHECK(m.flows.r_attempts == 0);
    CHECK(std::abs(m.throughput_s - 0.25 * 0.4) < 0.005);
    CHECK(std::abs(m.pr_bs_nonempty - 0.5) < 0.01);
}

TEST_CASE("service identities on a stable run") {
    const auto cfg = reference();
    const auto m = run(cfg);
    const auto res = measure_service_identities(m, cfg);
    CHECK(res.residual_s() < 0.01);
    CHECK(res.residual_r() < 0.01);
    CHECK_THROWS_AS(measure_service_identities(run(reference(SimMode::Saturated)), reference(SimMode::Saturated)),
                    PreconditionError);

    auto overloaded = cfg;
    overloaded.rates = {0.3, 0.3};
    CHECK_THROWS_AS(measure_service_identities(run(overloaded), overloaded), UnstableRunError);
}

TEST_CASE("configuration checks") {
    CHECK(parse_mode("source-dominant") == SimMode::SourceDominant);
    CHECK(to_string(SimMode::RelayDominant) == "relay-dominant");
    CHECK_THROWS_AS(parse_mode("fast"), ConfigError);

    auto cfg = reference();
    cfg.warmup = cfg.horizon;
    CHECK_THROWS_AS(check_config(cfg), ConfigError);
    cfg = reference();
    cfg.pol.q_s = 1.5;
    CHECK_THROWS_AS(check_config(cfg), ConfigError);
    cfg = reference();
    cfg.trajectory_stride = 0;
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("random streams") {
    RandomStreams a(9), b(9), c(10);
    const auto x = a.next();
    const auto y = b.next();
    const auto z = c.next();
    CHECK(x.channel_rd == y.channel_rd);
    CHECK(x.source_arrival != x.relay_arrival);
    CHECK(x.source_arrival != z.source_arrival);
    for (int i = 0; i < 1000; ++i) {
        const auto d = a.next();
        CHECK(d.channel_sd >= 0.0);
        CHECK(d.channel_sd < 1.0);
    }
}
