#include "ehrelay/stability.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/stats.hpp"

namespace ehrelay {

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Stable: return "STABLE";
    case Verdict::Unstable: return "UNSTABLE";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Verdict StabilityVerdict::network() const {
    if (source.verdict == Verdict::Unstable || relay.verdict == Verdict::Unstable)
        return Verdict::Unstable;
    if (source.verdict == Verdict::Stable && relay.verdict == Verdict::Stable)
        return Verdict::Stable;
    return Verdict::Inconclusive;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count) {
    // splitmix64
    std::vector<std::uint64_t> out;
    std::uint64_t x = master;
    for (std::size_t i = 0; i < count; ++i) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        out.push_back(z ^ (z >> 31));
    }
    return out;
}

double default_l_max(double load) {
    return load >= 0.0 && load < 1.0 ? 50.0 / (1.0 - load) : 1000.0;
}

namespace {

QueueEvidence queue_evidence(const SimMetrics& m, std::uint64_t warmup, bool relay) {
    QueueEvidence ev;
    std::vector<double> xs, ys;
    for (const auto& s : m.trajectory) {
        if (s.slot < warmup)
            continue;
        xs.push_back(static_cast<double>(s.slot));
        ys.push_back(static_cast<double>(relay ? s.q_r : s.q_s));
    }
    const LinearFit fit = fit_line(xs, ys);
    ev.slope = fit.slope;
    ev.slope_stderr = fit.slope_stderr;
    const std::size_t n = ys.size();
    const std::size_t quarter = std::max<std::size_t>(n / 4, 1);
    if (n > 0) {
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < quarter && i < n; ++i)
            first += ys[i];
        for (std::size_t i = n - std::min(quarter, n); i < n; ++i)
            last += ys[i];
        ev.first_quartile_mean = first / static_cast<double>(std::min(quarter, n));
        ev.final_quartile_mean = last / static_cast<double>(std::min(quarter, n));
        ev.max_length = *std::max_element(ys.begin(), ys.end());
    }
    ev.measured_mu = relay ? m.measured_mu_r : m.measured_mu_s;
    return ev;
}

Verdict classify(const std::vector<QueueEvidence>& evidence, double threshold, double l_max) {
    const bool all_flat = std::all_of(evidence.begin(), evidence.end(), [&](const QueueEvidence& e) {
        return e.slope < threshold && e.final_quartile_mean < l_max;
    });
    if (all_flat)
        return Verdict::Stable;
    const bool all_growing = std::all_of(evidence.begin(), evidence.end(), [&](const QueueEvidence& e) {
        return e.slope > threshold && e.final_quartile_mean > e.first_quartile_mean;
    });
    return all_growing ? Verdict::Unstable : Verdict::Inconclusive;
}

} // namespace

StabilityVerdict assess(const SimConfig& cfg, const StabilityCriteria& criteria) {
    if (cfg.horizon < 100'000)
        throw ConfigError("horizon: stability assessment needs at least 100000 slots");
    if (criteria.seeds.size() < 3)
        throw ConfigError("seeds: stability assessment needs at least 3 seeds");

    SimConfig base = cfg;
    base.mode = SimMode::Original;
    base.warmup = static_cast<std::uint64_t>(criteria.warmup_fraction * static_cast<double>(cfg.horizon));
    base.trajectory_stride = criteria.trajectory_stride;
    check_config(base);

    const std::size_t n = criteria.seeds.size();
    std::vector<QueueEvidence> src(n), rel(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            SimConfig run_cfg = base;
            run_cfg.seed = criteria.seeds[i];
            const SimMetrics m = run(run_cfg);
            src[i] = queue_evidence(m, base.warmup, false);
            rel[i] = queue_evidence(m, base.warmup, true);
            src[i].seed = rel[i].seed = run_cfg.seed;
        }
    };
    const unsigned threads = std::min<unsigned>(
        criteria.threads ? criteria.threads : std::max(1u, std::thread::hardware_concurrency()),
        static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    const ThroughputPair sat = saturated_throughput(cfg.ch, cfg.en, cfg.pol);
    const double load_s = sat.mu_s > 0.0 ? cfg.rates.lambda_s / sat.mu_s : -1.0;
    double load_r = -1.0;
    if (sat.mu_r > 0.0 && success_aggregate(cfg.ch) > 0.0)
        load_r = relay_total_arrival(cfg.rates, cfg.ch) / sat.mu_r;

    StabilityVerdict v;
    v.source.l_max = criteria.l_max_s.value_or(default_l_max(load_s));
    v.relay.l_max = criteria.l_max_r.value_or(default_l_max(load_r));
    v.source.evidence = std::move(src);
    v.relay.evidence = std::move(rel);
    v.source.verdict = classify(v.source.evidence, criteria.slope_threshold, v.source.l_max);
    v.relay.verdict = classify(v.relay.evidence, criteria.slope_threshold, v.relay.l_max);
    return v;
}

namespace {

nlohmann::json queue_json(const QueueVerdict& q) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : q.evidence) {
        ev.push_back({{"seed", e.seed},
                      {"slope", e.slope},
                      {"slope_stderr", e.slope_stderr},
                      {"slope_ci95", {e.slope - 1.96 * e.slope_stderr, e.slope + 1.96 * e.slope_stderr}},
                      {"first_quartile_mean", e.first_quartile_mean},
                      {"final_quartile_mean", e.final_quartile_mean},
                      {"max_length", e.max_length},
                      {"measured_mu", e.measured_mu}});
    }
    return {{"verdict", to_string(q.verdict)}, {"l_max", q.l_max}, {"evidence", ev}};
}

} // namespace

nlohmann::json to_json(const StabilityVerdict& v) {
    return {{"network", to_string(v.network())}, {"source", queue_json(v.source)}, {"relay", queue_json(v.relay)}};
}

} // namespace ehrelay
