#include "ehrelay/cli.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "ehrelay/closure.hpp"
#include "ehrelay/config.hpp"
#include "ehrelay/csv.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/regions.hpp"
#include "ehrelay/simulator.hpp"
#include "ehrelay/stability.hpp"

namespace ehrelay::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw ConfigError("cannot write '" + path + "'");
    file << content;
    if (!file)
        throw ConfigError("write failed for '" + path + "'");
}

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw ConfigError("grid: bad number '" + text + "' in " + what);
    return v;
}

GridAxis parse_axis(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');)
        parts.push_back(part);
    if (parts.size() != 3)
        throw ConfigError("grid: expected min:max:step, got '" + text + "'");
    return {parse_number(parts[0], text), parse_number(parts[1], text), parse_number(parts[2], text)};
}

GridAxis axis_from_json(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_object())
        throw ConfigError(std::string("grid.") + key + ": expected {min, max, step}");
    const json& a = doc.at(key);
    GridAxis axis;
    for (auto [name, slot] : {std::pair{"min", &axis.min}, std::pair{"max", &axis.max}, std::pair{"step", &axis.step}}) {
        if (!a.contains(name) || !a.at(name).is_number())
            throw ConfigError(std::string("grid.") + key + "." + name + ": must be a number");
        *slot = a.at(name).get<double>();
    }
    return axis;
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

// Common flags shared by several subcommands.
struct Flags {
    std::string config;
    std::string out;
    std::string trajectory;
    std::string grid;
    std::string mode;
    std::uint64_t seed = 0;
    std::uint64_t horizon = 0;
    unsigned threads = 0;
};

int cmd_regions(const Flags& f, std::ostream& out, std::ostream& err) {
    const ModelConfig cfg = parse_model_config(load_json_file(f.config));
    const RegionSpec spec{cfg.ch, cfg.en, cfg.pol};
    const std::pair<const char*, BoundaryPolyline> regions[] = {
        {"inner", inner_boundary(spec)},
        {"r1", r1_boundary(spec)},
        {"r2", r2_boundary(spec)},
        {"outer", outer_boundary(spec)},
    };
    std::string csv = "region,lambda_s,lambda_r,active_constraint\n";
    for (const auto& [name, poly] : regions) {
        if (poly.empty()) {
            err << "warning: " << name << " region is empty for this configuration\n";
            continue;
        }
        std::istringstream rows(polyline_csv(poly));
        std::string line;
        std::getline(rows, line); // header
        while (std::getline(rows, line))
            csv += std::string(name) + "," + line + "\n";
    }
    emit(f.out, csv, out);
    return kOk;
}

int cmd_closure(const Flags& f, std::ostream& out, std::ostream&) {
    const ModelConfig cfg = parse_model_config(load_json_file(f.config));
    emit(f.out, boundary_csv(boundary(cfg.ch, cfg.en)), out);
    return kOk;
}

SimConfig sim_config_with_overrides(const json& doc, const Flags& f) {
    json merged = doc;
    if (f.horizon != 0) {
        merged["horizon"] = f.horizon;
        if (!doc.contains("warmup"))
            merged["warmup"] = f.horizon / 10;
    }
    if (f.seed != 0)
        merged["seed"] = f.seed;
    if (!f.mode.empty())
        merged["mode"] = f.mode;
    return parse_sim_config(merged);
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream&) {
    const SimConfig cfg = sim_config_with_overrides(load_json_file(f.config), f);
    const SimMetrics m = run(cfg);
    json doc = {{"config", to_json(cfg)}, {"metrics", to_json(m)}};
    emit(f.out, doc.dump(2) + "\n", out);
    if (!f.trajectory.empty())
        emit(f.trajectory, trajectory_csv(m), out);
    return kOk;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream&) {
    const json doc = load_json_file(f.config);
    const json base = doc.contains("base") ? doc.at("base") : doc;
    SimConfig cfg = sim_config_with_overrides(base, f);

    std::pair<GridAxis, GridAxis> axes;
    if (!f.grid.empty())
        axes = parse_grid(f.grid);
    else if (doc.contains("grid"))
        axes = {axis_from_json(doc.at("grid"), "lambda_s"), axis_from_json(doc.at("grid"), "lambda_r")};
    else
        throw ConfigError("sweep: no grid given (use --grid or a \"grid\" key)");
    const auto xs = axes.first.values();
    const auto ys = axes.second.values();

    std::size_t seed_count = 3;
    if (doc.contains("seeds")) {
        if (!doc.at("seeds").is_number_unsigned())
            throw ConfigError("seeds: must be a positive integer");
        seed_count = doc.at("seeds").get<std::size_t>();
    }

    const RegionSpec spec{cfg.ch, cfg.en, cfg.pol};
    const auto closure = boundary(cfg.ch, cfg.en);
    const std::size_t n = xs.size() * ys.size();
    const auto point_seeds = derive_seeds(f.seed, n);

    // Rows are computed in parallel and assembled in grid order.
    std::vector<std::string> rows(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    const unsigned count = f.threads != 0 ? f.threads : std::max(1u, std::thread::hardware_concurrency());
    for (unsigned w = 0; w < count; ++w) {
        workers.push_back(std::async(std::launch::async, [&] {
            for (std::size_t k = next++; k < n; k = next++) {
                const RatePoint p{xs[k / ys.size()], ys[k % ys.size()]};
                SimConfig point_cfg = cfg;
                point_cfg.rates = p;
                StabilityCriteria criteria;
                criteria.seeds = derive_seeds(point_seeds[k], seed_count);
                criteria.threads = 1;
                const auto verdict = assess(point_cfg, criteria);
                double mu_s = 0.0, mu_r = 0.0;
                for (const auto& e : verdict.source.evidence)
                    mu_s += e.measured_mu;
                for (const auto& e : verdict.relay.evidence)
                    mu_r += e.measured_mu;
                mu_s /= static_cast<double>(seed_count);
                mu_r /= static_cast<double>(seed_count);
                rows[k] = format_double(p.lambda_s) + "," + format_double(p.lambda_r) + "," +
                          bool_text(inner_contains(p, spec)) + "," + bool_text(outer_contains(p, spec)) + "," +
                          bool_text(contains(p, closure)) + "," + to_string(verdict.source.verdict) + "," +
                          to_string(verdict.relay.verdict) + "," + format_double(mu_s) + "," + format_double(mu_r) +
                          "\n";
            }
        }));
    }
    for (auto& w : workers)
        w.get();

    std::string csv = "lambda_s,lambda_r,in_inner,in_outer,in_closure,sim_verdict_s,sim_verdict_r,measured_mu_s,"
                      "measured_mu_r\n";
    for (const auto& r : rows)
        csv += r;
    emit(f.out, csv, out);
    return kOk;
}

int cmd_validate(const Flags& f, std::ostream& out, std::ostream&) {
    ValidationOptions opts;
    opts.seed = f.seed;
    opts.threads = f.threads;
    if (!f.config.empty()) {
        const json doc = load_json_file(f.config);
        if (doc.contains("horizon")) {
            if (!doc.at("horizon").is_number_unsigned())
                throw ConfigError("horizon: must be a positive integer");
            opts.horizon = doc.at("horizon").get<std::uint64_t>();
        }
    }
    if (f.horizon != 0)
        opts.horizon = f.horizon;
    if (opts.horizon < 100'000)
        throw ConfigError("horizon: validation needs at least 100000 slots");

    const auto results = acceptance_suite(opts);
    bool all = true;
    std::ostringstream summary;
    for (const auto& r : results) {
        all = all && r.passed;
        summary << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << "\n";
    }
    const std::string report = to_json(results).dump(2) + "\n";
    if (f.out.empty()) {
        out << report;
    } else {
        emit(f.out, report, out);
        out << summary.str();
    }
    return all ? kOk : kValidationFailed;
}

} // namespace

std::vector<double> GridAxis::values() const {
    if (!(step > 0.0))
        throw ConfigError("grid: step must be positive");
    if (min > max)
        throw ConfigError("grid: empty range (min > max)");
    if (min < 0.0 || max > 1.0)
        throw ConfigError("grid: range must lie within [0, 1]");
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> v;
    v.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        // Snap to 12 decimals so 0 + 3 * 0.05 prints as 0.15.
        v.push_back(std::round((min + static_cast<double>(k) * step) * 1e12) / 1e12);
    return v;
}

std::pair<GridAxis, GridAxis> parse_grid(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        const GridAxis a = parse_axis(text);
        return {a, a};
    }
    return {parse_axis(text.substr(0, comma)), parse_axis(text.substr(comma + 1))};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy-harvesting relay network: stability regions, closure and simulation", "ehrelay"};
    app.require_subcommand(1);
    Flags f;

    auto* regions = app.add_subcommand("regions", "Inner and outer bound polylines as CSV");
    auto* closure = app.add_subcommand("closure", "Closure boundary over all transmit probabilities as CSV");
    auto* simulate = app.add_subcommand("simulate", "Run the slot simulator; metrics as JSON");
    auto* sweep = app.add_subcommand("sweep", "Rate-grid sweep: analytic membership and simulated verdicts");
    auto* validate = app.add_subcommand("validate", "Run the acceptance checks; JSON report");

    for (auto* sub : {regions, closure, simulate, sweep})
        sub->add_option("--config", f.config, "JSON configuration")->required();
    validate->add_option("--config", f.config, "optional JSON with a horizon key");
    for (auto* sub : {regions, closure, simulate, sweep, validate})
        sub->add_option("--out", f.out, "output path (default stdout)");

    simulate->add_option("--seed", f.seed, "master seed (overrides config)");
    sweep->add_option("--seed", f.seed, "master seed")->required();
    validate->add_option("--seed", f.seed, "master seed")->required();
    for (auto* sub : {simulate, sweep, validate})
        sub->add_option("--horizon", f.horizon, "slots per run")->check(CLI::PositiveNumber);
    for (auto* sub : {sweep, validate})
        sub->add_option("--threads", f.threads, "worker threads (default all cores)");
    simulate->add_option("--mode", f.mode, "original|source-dominant|relay-dominant|saturated");
    simulate->add_option("--trajectory", f.trajectory, "trajectory CSV path");
    sweep->add_option("--grid", f.grid, "min:max:step[,min:max:step]");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        if (regions->parsed())
            return cmd_regions(f, out, err);
        if (closure->parsed())
            return cmd_closure(f, out, err);
        if (simulate->parsed())
            return cmd_simulate(f, out, err);
        if (sweep->parsed())
            return cmd_sweep(f, out, err);
        return cmd_validate(f, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

CheckResult check_determinism(const ValidationOptions& opts) {
    CheckResult r;
    r.id = 11;
    r.name = "determinism";

    const fs::path dir = fs::temp_directory_path() /
                         ("ehrelay-determinism-" + std::to_string(opts.seed) + "-" +
                          std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    fs::create_directories(dir);
    const std::string config = (dir / "config.json").string();
    const std::string sweep_config = (dir / "sweep.json").string();
    const json model = {{"p_sd", 0.2}, {"p_rd", 0.6}, {"p_sr", 0.5}, {"delta_s", 0.5}, {"delta_r", 0.6},
                        {"q_s", 0.3},  {"q_r", 0.4},  {"lambda_s", 0.05}, {"lambda_r", 0.1}};
    emit(config, model.dump(2), std::cout);
    emit(sweep_config, json{{"base", model}, {"grid", {{"lambda_s", {{"min", 0.0}, {"max", 0.2}, {"step", 0.1}}},
                                                      {"lambda_r", {{"min", 0.0}, {"max", 0.2}, {"step", 0.1}}}}}}
                           .dump(2),
         std::cout);

    const std::string seed = std::to_string(opts.seed);
    const std::string horizon = std::to_string(std::min<std::uint64_t>(opts.horizon, 200'000));
    struct Command {
        std::string name;
        std::vector<std::string> args; // without --out
        bool trajectory = false;
    };
    const std::vector<Command> commands = {
        {"regions", {"regions", "--config", config}},
        {"closure", {"closure", "--config", config}},
        {"simulate", {"simulate", "--config", config, "--seed", seed, "--horizon", horizon}, true},
        {"simulate-saturated",
         {"simulate", "--config", config, "--seed", seed, "--horizon", horizon, "--mode", "saturated"}},
        {"sweep", {"sweep", "--config", sweep_config, "--seed", seed, "--horizon", "100000"}},
    };

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    std::vector<std::string> differing;
    json rows = json::array();
    for (const auto& cmd : commands) {
        std::string outputs[2];
        int codes[2] = {0, 0};
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out_path = dir / (cmd.name + "-" + std::to_string(rep) + ".out");
            const fs::path traj_path = dir / (cmd.name + "-" + std::to_string(rep) + ".csv");
            auto args = cmd.args;
            args.insert(args.end(), {"--out", out_path.string()});
            if (cmd.trajectory)
                args.insert(args.end(), {"--trajectory", traj_path.string()});
            std::ostringstream out, err;
            codes[rep] = run(args, out, err);
            outputs[rep] = out.str() + err.str() + slurp(out_path) + (cmd.trajectory ? slurp(traj_path) : "");
        }
        const bool same = codes[0] == kOk && codes[1] == kOk && outputs[0] == outputs[1] && !outputs[0].empty();
        if (!same)
            differing.push_back(cmd.name);
        rows.push_back({{"command", cmd.name}, {"identical", same}, {"bytes", outputs[0].size()}});
    }
    std::error_code ec;
    fs::remove_all(dir, ec);

    r.passed = differing.empty();
    if (r.passed) {
        r.detail = std::to_string(commands.size()) + " commands repeated, outputs byte-identical";
    } else {
        r.detail = "outputs differ or failed for:";
        for (const auto& d : differing)
            r.detail += " " + d;
    }
    r.metrics = {{"commands", rows}};
    return r;
}

std::vector<CheckResult> acceptance_suite(const ValidationOptions& opts) {
    auto checks = model_checks();
    checks.push_back(check_determinism);
    return run_checks(checks, opts);
}

} // namespace ehrelay::cli
