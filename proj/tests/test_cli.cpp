#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "ehrelay/cli.hpp"
#include "ehrelay/errors.hpp"

using namespace ehrelay;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() : dir(fs::temp_directory_path() / ("ehrelay-cli-test-" + std::to_string(::getpid()))) {
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string write(const std::string& name, const std::string& content) const {
        std::ofstream(dir / name) << content;
        return (dir / name).string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const char* kReference = R"({"p_sd":0.2,"p_rd":0.6,"p_sr":0.5,"delta_s":0.5,"delta_r":0.6,
                             "q_s":0.3,"q_r":0.4,"lambda_s":0.05,"lambda_r":0.1})";

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        std::vector<std::string> cells;
        std::istringstream cs(line);
        for (std::string cell; std::getline(cs, cell, ',');)
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("regions writes both bounds") {
    Scratch s;
    const auto cfg = s.write("ref.json", kReference);
    const auto r = invoke({"regions", "--config", cfg});
    REQUIRE(r.code == cli::kOk);
    bool corner = false;
    for (const auto& row : csv_rows(r.out)) {
        if (row[0] == "inner" && std::abs(std::stod(row[1]) - 0.108) < 1e-12 &&
            std::abs(std::stod(row[2]) - 0.096) < 1e-12)
            corner = true;
    }
    CHECK(corner);
    CHECK(r.out.find("\nouter,") != std::string::npos);
}

TEST_CASE("regions with an idle policy warns") {
    Scratch s;
    std::string doc = kReference;
    doc.replace(doc.find("\"q_s\":0.3"), 9, "\"q_s\":0.0");
    doc.replace(doc.find("\"q_r\":0.4"), 9, "\"q_r\":0.0");
    const auto r = invoke({"regions", "--config", s.write("idle.json", doc)});
    CHECK(r.code == cli::kOk);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(csv_rows(r.out).size() == 1);
}

TEST_CASE("config errors exit with code 2") {
    Scratch s;
    CHECK(invoke({"regions", "--config", s.write("bad.json", "{\"p_sd\": ")}).code == cli::kUsageError);
    std::string doc = kReference;
    doc.replace(doc.find("\"p_sd\":0.2"), 10, "\"p_sd\":-1");
    const auto r = invoke({"closure", "--config", s.write("neg.json", doc)});
    CHECK(r.code == cli::kUsageError);
    CHECK(r.err.find("p_sd") != std::string::npos);
    CHECK(invoke({"regions"}).code == cli::kUsageError);
    CHECK(invoke({"frobnicate"}).code == cli::kUsageError);
    CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("closure vertices") {
    Scratch s;
    const auto out = s.path("closure.csv");
    REQUIRE(invoke({"closure", "--config", s.write("ref.json", kReference), "--out", out}).code == cli::kOk);
    std::map<std::string, std::pair<double, double>> vertices;
    for (const auto& row : csv_rows(slurp(out)))
        if (row[0].size() == 1)
            vertices[row[0]] = {std::stod(row[1]), std::stod(row[2])};
    REQUIRE(vertices.size() == 4);
    CHECK(vertices["B"].first == doctest::Approx(0.096));
    CHECK(vertices["C"].second == doctest::Approx(0.05));
    CHECK(vertices["D"].first == doctest::Approx(0.18));

    std::string below = kReference;
    below.replace(below.find("\"delta_s\":0.5"), 13, "\"delta_s\":0.3");
    below.replace(below.find("\"delta_r\":0.6"), 13, "\"delta_r\":0.4");
    const auto r = invoke({"closure", "--config", s.write("below.json", below)});
    CHECK(r.out.find("\nF,0.108") != std::string::npos);
    CHECK(r.out.find("\nG,0.14") != std::string::npos);
}

TEST_CASE("sweep rows and verdicts") {
    Scratch s;
    const auto cfg = s.write("ref.json", kReference);
    const auto out = s.path("sweep.csv");
    const auto r = invoke({"sweep", "--config", cfg, "--seed", "5", "--grid", "0:0.2:0.05", "--horizon", "100000",
                           "--out", out});
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 26);
    CHECK(rows[0][0] == "lambda_s");
    CHECK(rows[4][1] == "0.15");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 9);
        if (rows[i][2] == "true") {
            CHECK(rows[i][5] == "STABLE");
            CHECK(rows[i][6] == "STABLE");
        }
    }

    // Same inputs, same bytes.
    const auto again = s.path("sweep2.csv");
    invoke({"sweep", "--config", cfg, "--seed", "5", "--grid", "0:0.2:0.05", "--horizon", "100000", "--out", again});
    CHECK(slurp(out) == slurp(again));
}

TEST_CASE("sweep input errors") {
    Scratch s;
    const auto cfg = s.write("ref.json", kReference);
    CHECK(invoke({"sweep", "--config", cfg, "--seed", "1", "--grid", "0.3:0.2:0.05"}).code == cli::kUsageError);
    CHECK(invoke({"sweep", "--config", cfg, "--grid", "0:0.2:0.05"}).code == cli::kUsageError);
    CHECK(invoke({"sweep", "--config", cfg, "--seed", "1"}).code == cli::kUsageError);
    CHECK(invoke({"sweep", "--config", cfg, "--seed", "1", "--grid", "0:2:0.5"}).code == cli::kUsageError);
}

TEST_CASE("simulate writes metrics and trajectory") {
    Scratch s;
    const auto cfg = s.write("ref.json", kReference);
    const auto traj = s.path("traj.csv");
    const auto r = invoke({"simulate", "--config", cfg, "--seed", "3", "--horizon", "100000", "--mode", "saturated",
                           "--trajectory", traj});
    REQUIRE(r.code == cli::kOk);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("config").at("mode") == "saturated");
    CHECK(std::abs(doc.at("metrics").at("throughput_s").get<double>() - 0.108) < 0.01);
    CHECK(slurp(traj).rfind("slot,q_s,q_r,b_s,b_r\n", 0) == 0);
    CHECK(invoke({"simulate", "--config", cfg, "--mode", "warp"}).code == cli::kUsageError);
}

TEST_CASE("validate requires a seed and a sane horizon") {
    CHECK(invoke({"validate"}).code == cli::kUsageError);
    CHECK(invoke({"validate", "--seed", "1", "--horizon", "1000"}).code == cli::kUsageError);
}

TEST_CASE("grid parsing") {
    const auto [a, b] = cli::parse_grid("0:0.2:0.05,0.1:0.3:0.1");
    CHECK(a.values().size() == 5);
    CHECK(b.values() == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(cli::parse_grid("0:1:0.5").second.values().size() == 3);
    CHECK_THROWS_AS(cli::parse_grid("0:1"), ConfigError);
    CHECK_THROWS_AS(cli::parse_grid("a:1:0.1"), ConfigError);
    CHECK_THROWS_AS(cli::GridAxis({0.0, 1.0, 0.0}).values(), ConfigError);
}
