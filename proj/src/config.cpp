#include "ehrelay/config.hpp"

#include <fstream>
#include <sstream>

#include "ehrelay/errors.hpp"

namespace ehrelay {

namespace {

using nlohmann::json;

double number_field(const json& doc, const char* key, std::vector<FieldError>& errors) {
    if (!doc.contains(key)) {
        errors.push_back({key, "missing required key"});
        return 0.0;
    }
    const json& v = doc.at(key);
    if (!v.is_number()) {
        errors.push_back({key, "must be a number"});
        return 0.0;
    }
    return v.get<double>();
}

template <typename T>
T uint_field(const json& doc, const char* key, T fallback, std::vector<FieldError>& errors) {
    if (!doc.contains(key))
        return fallback;
    const json& v = doc.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        errors.push_back({key, "must be a nonnegative integer"});
        return fallback;
    }
    return v.get<T>();
}

} // namespace

ModelConfig parse_model_config(const json& doc) {
    if (!doc.is_object())
        throw ConfigError("config: expected a JSON object");
    std::vector<FieldError> errors;
    ModelConfig cfg;
    cfg.ch.p_sd = number_field(doc, "p_sd", errors);
    cfg.ch.p_rd = number_field(doc, "p_rd", errors);
    cfg.ch.p_sr = number_field(doc, "p_sr", errors);
    cfg.en.delta_s = number_field(doc, "delta_s", errors);
    cfg.en.delta_r = number_field(doc, "delta_r", errors);
    cfg.pol.q_s = number_field(doc, "q_s", errors);
    cfg.pol.q_r = number_field(doc, "q_r", errors);
    cfg.rates.lambda_s = number_field(doc, "lambda_s", errors);
    cfg.rates.lambda_r = number_field(doc, "lambda_r", errors);
    if (errors.empty()) {
        for (auto&& list : {validate(cfg.ch), validate(cfg.en), validate(cfg.pol), validate(cfg.rates)})
            errors.insert(errors.end(), list.begin(), list.end());
    }
    if (!errors.empty())
        throw ConfigError(describe(errors));
    return cfg;
}

SimConfig parse_sim_config(const json& doc) {
    const ModelConfig model = parse_model_config(doc);
    SimConfig cfg;
    cfg.ch = model.ch;
    cfg.en = model.en;
    cfg.pol = model.pol;
    cfg.rates = model.rates;

    std::vector<FieldError> errors;
    if (doc.contains("mode")) {
        if (!doc.at("mode").is_string())
            errors.push_back({"mode", "must be a string"});
        else
            cfg.mode = parse_mode(doc.at("mode").get<std::string>());
    }
    cfg.horizon = uint_field<std::uint64_t>(doc, "horizon", cfg.horizon, errors);
    cfg.seed = uint_field<std::uint64_t>(doc, "seed", cfg.seed, errors);
    cfg.warmup = uint_field<std::uint64_t>(doc, "warmup", cfg.horizon / 10, errors);
    cfg.trajectory_stride = uint_field<std::uint64_t>(doc, "trajectory_stride", cfg.trajectory_stride, errors);
    if (!errors.empty())
        throw ConfigError(describe(errors));
    check_config(cfg);
    return cfg;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: malformed JSON in '" + path + "': " + e.what());
    }
}

json to_json(const ModelConfig& cfg) {
    return {{"p_sd", cfg.ch.p_sd},         {"p_rd", cfg.ch.p_rd},         {"p_sr", cfg.ch.p_sr},
            {"delta_s", cfg.en.delta_s},   {"delta_r", cfg.en.delta_r},   {"q_s", cfg.pol.q_s},
            {"q_r", cfg.pol.q_r},          {"lambda_s", cfg.rates.lambda_s}, {"lambda_r", cfg.rates.lambda_r}};
}

json to_json(const SimConfig& cfg) {
    json doc = to_json(ModelConfig{cfg.ch, cfg.en, cfg.pol, cfg.rates});
    doc["mode"] = to_string(cfg.mode);
    doc["horizon"] = cfg.horizon;
    doc["seed"] = cfg.seed;
    doc["warmup"] = cfg.warmup;
    doc["trajectory_stride"] = cfg.trajectory_stride;
    return doc;
}

json to_json(const SimMetrics& m) {
    const FlowCounts& f = m.flows;
    const OccupancyCounts& o = m.occupancy;
    return {
        {"measured_mu_s", m.measured_mu_s},
        {"measured_mu_r", m.measured_mu_r},
        {"throughput_s", m.throughput_s},
        {"throughput_r", m.throughput_r},
        {"measured_lambda_s_to_r", m.measured_lambda_s_to_r},
        {"pr_bs_nonempty", m.pr_bs_nonempty},
        {"pr_br_nonempty", m.pr_br_nonempty},
        {"pr_as", m.pr_as},
        {"pr_ar", m.pr_ar},
        {"flows",
         {{"source_arrivals", f.source_arrivals},
          {"relay_arrivals", f.relay_arrivals},
          {"direct_deliveries", f.direct_deliveries},
          {"relay_transfers", f.relay_transfers},
          {"relay_deliveries", f.relay_deliveries},
          {"collisions", f.collisions},
          {"s_attempts", f.s_attempts},
          {"r_attempts", f.r_attempts},
          {"s_dummies", f.s_dummies},
          {"r_dummies", f.r_dummies},
          {"s_harvests", f.s_harvests},
          {"r_harvests", f.r_harvests}}},
        {"occupancy",
         {{"slots", o.slots},
          {"s_busy", o.s_busy},
          {"r_busy", o.r_busy},
          {"s_busy_charged_r_active", o.s_busy_charged_r_active},
          {"s_busy_charged_r_idle", o.s_busy_charged_r_idle},
          {"r_busy_charged_s_active", o.r_busy_charged_s_active},
          {"r_busy_charged_s_idle", o.r_busy_charged_s_idle}}},
        {"final_state",
         {{"q_s", m.final_state.q_s_len},
          {"q_r", m.final_state.q_r_len},
          {"b_s", m.final_state.b_s_level},
          {"b_r", m.final_state.b_r_level},
          {"slot", m.final_state.slot_index}}},
    };
}

std::string trajectory_csv(const SimMetrics& m) {
    std::ostringstream out;
    out << "slot,q_s,q_r,b_s,b_r\n";
    for (const auto& s : m.trajectory)
        out << s.slot << ',' << s.q_s << ',' << s.q_r << ',' << s.b_s << ',' << s.b_r << '\n';
    return out.str();
}

} // namespace ehrelay
