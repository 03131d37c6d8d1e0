#include "doctest.h"

#include <random>

#include "ehrelay/closure.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/regions.hpp"
#include "ehrelay/simulator.hpp"
#include "ehrelay/stability.hpp"

using namespace ehrelay;

namespace {

ChannelParams random_channel(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p_sd = 0.05 + 0.45 * u(rng);
    return {p_sd, p_sd + (0.95 - p_sd) * (0.1 + 0.9 * u(rng)), 0.1 + 0.85 * u(rng)};
}

} // namespace

TEST_CASE("boundary points are the saturated throughput of the optimal policy") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{0.1 + 0.9 * u(rng), 0.1 + 0.9 * u(rng)};
        const double x = boundary(ch, en).x_end() * u(rng);
        const auto sol = optimize_p2(x, ch, en);
        const auto mu = saturated_throughput(ch, en, {sol.q_s, sol.q_r_star});
        CHECK(mu.mu_s == doctest::Approx(x).epsilon(1e-9));
        CHECK(mu.mu_r - relay_fraction(ch) * mu.mu_s == doctest::Approx(sol.y_star).epsilon(1e-9));
    }
}

TEST_CASE("policies never beat the closure") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const auto ch = random_channel(rng);
        const EnergyParams en{u(rng), u(rng)};
        const auto b = boundary(ch, en);
        for (int k = 0; k < 20; ++k) {
            const auto mu = saturated_throughput(ch, en, {u(rng), u(rng)});
            const RatePoint corner{mu.mu_s, mu.mu_r - relay_fraction(ch) * mu.mu_s};
            if (corner.lambda_r < 0.0)
                continue;
            CHECK(corner.lambda_r <= boundary_y(b, corner.lambda_s) + 1e-9);
        }
    }
}

TEST_CASE("simulated stability follows the inner bound at a boundary policy") {
    const ChannelParams ch{0.2, 0.6, 0.5};
    const EnergyParams en{0.5, 0.6};
    const auto sol = optimize_p2(0.12, ch, en);
    SimConfig cfg;
    cfg.ch = ch;
    cfg.en = en;
    cfg.pol = {sol.q_s, sol.q_r_star};
    cfg.horizon = 400'000;
    StabilityCriteria criteria;
    criteria.seeds = derive_seeds(77, 3);

    // Well inside: stable. Well past the closure: nothing can keep up.
    cfg.rates = {0.6 * 0.12, 0.6 * sol.y_star};
    CHECK(assess(cfg, criteria).network() == Verdict::Stable);
    cfg.rates = {0.12 * 1.3, sol.y_star * 1.3};
    CHECK(assess(cfg, criteria).network() == Verdict::Unstable);
}

TEST_CASE("saturated simulation sits on the policy's inner corner") {
    SimConfig cfg;
    cfg.ch = {0.3, 0.8, 0.6};
    cfg.en = {0.4, 0.7};
    cfg.pol = {0.35, 0.5};
    cfg.mode = SimMode::Saturated;
    cfg.horizon = 400'000;
    cfg.warmup = 40'000;
    const auto m = run(cfg);
    const auto poly = inner_boundary({cfg.ch, cfg.en, cfg.pol});
    REQUIRE(poly.vertices.size() == 3);
    const auto corner = poly.vertices[1];
    CHECK(std::abs(m.throughput_s - corner.lambda_s) < 0.01);
    CHECK(std::abs(m.throughput_r - m.measured_lambda_s_to_r - corner.lambda_r) < 0.01);
}
