#include "doctest.h"

#include "ehrelay/config.hpp"
#include "ehrelay/errors.hpp"

using namespace ehrelay;
using nlohmann::json;

namespace {

json reference() {
    return {{"p_sd", 0.2}, {"p_rd", 0.6}, {"p_sr", 0.5},      {"delta_s", 0.5},  {"delta_r", 0.6},
            {"q_s", 0.3},  {"q_r", 0.4},  {"lambda_s", 0.05}, {"lambda_r", 0.1}};
}

std::string message_for(const json& doc) {
    try {
        parse_sim_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("model config round trip") {
    const auto cfg = parse_model_config(reference());
    CHECK(cfg.ch.p_rd == 0.6);
    CHECK(cfg.pol.q_r == 0.4);
    CHECK(to_json(cfg) == reference());
}

TEST_CASE("simulation extension keys") {
    json doc = reference();
    auto cfg = parse_sim_config(doc);
    CHECK(cfg.mode == SimMode::Original);
    CHECK(cfg.horizon == 1'000'000);
    CHECK(cfg.warmup == 100'000);

    doc["mode"] = "relay-dominant";
    doc["horizon"] = 200000;
    doc["seed"] = 42;
    cfg = parse_sim_config(doc);
    CHECK(cfg.mode == SimMode::RelayDominant);
    CHECK(cfg.seed == 42);
    CHECK(cfg.warmup == 20000);
}

TEST_CASE("config errors are field level") {
    json doc = reference();
    doc.erase("p_sr");
    CHECK(message_for(doc).find("p_sr") != std::string::npos);

    doc = reference();
    doc["q_s"] = "high";
    CHECK(message_for(doc).find("q_s") != std::string::npos);

    doc = reference();
    doc["p_sd"] = 0.7;
    CHECK(message_for(doc).find("p_rd") != std::string::npos);

    doc = reference();
    doc["mode"] = "turbo";
    CHECK_THROWS_AS(parse_sim_config(doc), ConfigError);

    doc = reference();
    doc["horizon"] = -5;
    CHECK(message_for(doc).find("horizon") != std::string::npos);

    CHECK_THROWS_AS(parse_model_config(json::array()), ConfigError);
    CHECK_THROWS_AS(load_json_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("metrics serialization") {
    auto cfg = parse_sim_config(reference());
    cfg.horizon = 20'000;
    cfg.warmup = 2'000;
    cfg.trajectory_stride = 1000;
    const auto m = run(cfg);
    const json doc = to_json(m);
    CHECK(doc.at("flows").at("source_arrivals").get<std::uint64_t>() == m.flows.source_arrivals);
    CHECK(doc.contains("measured_mu_s"));

    const std::string csv = trajectory_csv(m);
    CHECK(csv.rfind("slot,q_s,q_r,b_s,b_r\n", 0) == 0);
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == static_cast<long>(m.trajectory.size()) + 1);
}
