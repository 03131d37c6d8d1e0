#include "ehrelay/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <boost/rational.hpp>

#include "ehrelay/closure.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/regions.hpp"
#include "ehrelay/simulator.hpp"
#include "ehrelay/stability.hpp"

namespace ehrelay {

namespace {

using nlohmann::json;

// Pinned tolerances, one per criterion.
constexpr double kBatteryTol = 0.01;
constexpr double kRelaySplitTol = 0.02;
constexpr double kSaturatedTol = 0.01;
constexpr double kServiceTol = 0.01;
constexpr double kUnionBand = 0.01;
constexpr double kContinuityTol = 1e-9;
constexpr double kVertexTol = 1e-12;
constexpr double kP2Tol = 1e-3;
constexpr double kP1Tol = 2e-3;
constexpr double kAchieveTol = 0.015;
constexpr double kDepth = 0.10; // relative depth for the concordance points

// Uniform doubles from a seeded engine; avoids the implementation-defined
// std::uniform_real_distribution so samples match across standard libraries.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed, std::uint64_t salt) : rng_(seed ^ (salt * 0x9e3779b97f4a7c15ULL)) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t bits() { return rng_(); }

    ChannelParams channel() {
        ChannelParams ch;
        ch.p_sd = uniform(0.05, 0.5);
        ch.p_rd = uniform(ch.p_sd + 0.05, 0.95);
        ch.p_sr = uniform(0.1, 0.95);
        return ch;
    }
    EnergyParams energy(double lo = 0.1, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi)}; }
    AccessPolicy policy(double lo = 0.05, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi)}; }

private:
    std::mt19937_64 rng_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

unsigned worker_count(unsigned requested) {
    if (requested != 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates fn(i) for i in [0, n) on a small pool; results in index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    const unsigned count = std::min<std::size_t>(worker_count(threads), std::max<std::size_t>(n, 1));
    for (unsigned w = 0; w < count; ++w) {
        workers.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++)
                out[i] = fn(i);
        }));
    }
    for (auto& f : workers)
        f.get();
    return out;
}

SimConfig sim_config(const ChannelParams& ch, const EnergyParams& en, const AccessPolicy& pol,
                     const RatePoint& rates, SimMode mode, const ValidationOptions& opts, std::uint64_t seed) {
    SimConfig cfg;
    cfg.ch = ch;
    cfg.en = en;
    cfg.pol = pol;
    cfg.rates = rates;
    cfg.mode = mode;
    cfg.horizon = opts.horizon;
    cfg.warmup = opts.horizon / 10;
    cfg.seed = seed;
    cfg.trajectory_stride = 100;
    return cfg;
}

// Largest t such that t * (cos a, sin a) satisfies `inside`, by bisection.
// The regions here are star-shaped about the origin and bounded by 1.
template <typename Pred>
double radial_extent(double angle, Pred inside) {
    const double cx = std::cos(angle), cy = std::sin(angle);
    double lo = 0.0, hi = 2.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (inside(RatePoint{mid * cx, mid * cy}))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

RatePoint along(double angle, double t) { return {t * std::cos(angle), t * std::sin(angle)}; }

// A configuration and a rate point at half the inner bound's radial extent.
struct StableCase {
    RegionSpec spec;
    RatePoint rates;
};

StableCase stable_case(Sampler& s) {
    StableCase c;
    c.spec = {s.channel(), s.energy(0.3, 1.0), s.policy(0.2, 0.8)};
    const double angle = s.uniform(0.15, std::numbers::pi / 2 - 0.15);
    const double t = radial_extent(angle, [&](const RatePoint& p) { return inner_contains(p, c.spec); });
    c.rates = along(angle, 0.5 * t);
    return c;
}

CheckResult make(int id, const char* name) {
    CheckResult r;
    r.id = id;
    r.name = name;
    return r;
}

} // namespace

CheckResult check_battery_law(const ValidationOptions& opts) {
    CheckResult r = make(1, "battery_occupancy_law");
    struct Pair {
        double delta, q;
    };
    // δ < q, δ = q, δ > q: four of each.
    const std::vector<Pair> pairs = {{0.2, 0.5},  {0.3, 0.9}, {0.1, 0.3}, {0.45, 0.6}, {0.3, 0.3}, {0.5, 0.5},
                                     {0.7, 0.7},  {0.15, 0.15}, {0.6, 0.3}, {0.9, 0.5}, {0.4, 0.2}, {0.8, 0.75}};
    const ChannelParams ch{0.2, 0.6, 0.5};
    const auto seeds = derive_seeds(opts.seed ^ 0x01, pairs.size());
    const auto measured = parallel_map<double>(pairs.size(), opts.threads, [&](std::size_t i) {
        const auto cfg = sim_config(ch, {pairs[i].delta, 0.5}, {pairs[i].q, 0.5}, {}, SimMode::Saturated, opts, seeds[i]);
        return run(cfg).pr_bs_nonempty;
    });
    double worst = 0.0;
    json rows = json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double expected = battery_nonempty_prob(pairs[i].delta, pairs[i].q);
        worst = std::max(worst, std::abs(measured[i] - expected));
        rows.push_back({{"delta", pairs[i].delta}, {"q", pairs[i].q}, {"expected", expected}, {"measured", measured[i]}});
    }
    r.passed = worst <= kBatteryTol;
    r.detail = "max |Pr(B!=0) - min(delta/q,1)| = " + fmt(worst) + " (tol " + fmt(kBatteryTol) + ")";
    r.metrics = {{"max_error", worst}, {"pairs", rows}};
    return r;
}

CheckResult check_relay_split(const ValidationOptions& opts) {
    CheckResult r = make(2, "relay_traffic_split");
    Sampler s(opts.seed, 2);
    std::vector<StableCase> cases;
    for (int i = 0; i < 5; ++i)
        cases.push_back(stable_case(s));
    const auto seeds = derive_seeds(opts.seed ^ 0x02, cases.size());
    const auto measured = parallel_map<double>(cases.size(), opts.threads, [&](std::size_t i) {
        const auto& c = cases[i];
        const auto m = run(sim_config(c.spec.ch, c.spec.en, c.spec.pol, c.rates, SimMode::Original, opts, seeds[i]));
        const double departed = static_cast<double>(m.flows.direct_deliveries + m.flows.relay_transfers);
        return departed > 0 ? static_cast<double>(m.flows.relay_transfers) / departed : 0.0;
    });
    double worst = 0.0;
    json rows = json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double expected = relay_fraction(cases[i].spec.ch);
        worst = std::max(worst, std::abs(measured[i] - expected));
        rows.push_back({{"expected", expected}, {"measured", measured[i]}});
    }
    r.passed = worst <= kRelaySplitTol;
    r.detail = "max |relayed/departed - c/alpha| = " + fmt(worst) + " (tol " + fmt(kRelaySplitTol) + ")";
    r.metrics = {{"max_error", worst}, {"configs", rows}};
    return r;
}

CheckResult check_saturated_throughput(const ValidationOptions& opts) {
    CheckResult r = make(3, "saturated_throughput");
    Sampler s(opts.seed, 3);
    std::vector<RegionSpec> specs;
    for (int i = 0; i < 10; ++i)
        specs.push_back({s.channel(), s.energy(), s.policy()});
    const auto seeds = derive_seeds(opts.seed ^ 0x03, specs.size());
    const auto measured = parallel_map<ThroughputPair>(specs.size(), opts.threads, [&](std::size_t i) {
        const auto m = run(sim_config(specs[i].ch, specs[i].en, specs[i].pol, {}, SimMode::Saturated, opts, seeds[i]));
        return ThroughputPair{m.throughput_s, m.throughput_r};
    });
    double worst = 0.0;
    json rows = json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto mu = saturated_throughput(specs[i].ch, specs[i].en, specs[i].pol);
        worst = std::max({worst, std::abs(measured[i].mu_s - mu.mu_s), std::abs(measured[i].mu_r - mu.mu_r)});
        rows.push_back({{"mu_s", mu.mu_s}, {"mu_r", mu.mu_r}, {"measured_s", measured[i].mu_s}, {"measured_r", measured[i].mu_r}});
    }
    r.passed = worst <= kSaturatedTol;
    r.detail = "max throughput error = " + fmt(worst) + " (tol " + fmt(kSaturatedTol) + ")";
    r.metrics = {{"max_error", worst}, {"samples", rows}};
    return r;
}

CheckResult check_service_identities(const ValidationOptions& opts) {
    CheckResult r = make(4, "service_rate_identities");
    Sampler s(opts.seed, 4);
    std::vector<StableCase> cases;
    for (int i = 0; i < 5; ++i)
        cases.push_back(stable_case(s));
    const auto seeds = derive_seeds(opts.seed ^ 0x04, cases.size());
    const auto residuals = parallel_map<ServiceResiduals>(cases.size(), opts.threads, [&](std::size_t i) {
        const auto& c = cases[i];
        const auto cfg = sim_config(c.spec.ch, c.spec.en, c.spec.pol, c.rates, SimMode::Original, opts, seeds[i]);
        return measure_service_identities(run(cfg), cfg);
    });
    double worst = 0.0;
    json rows = json::array();
    for (const auto& res : residuals) {
        worst = std::max({worst, res.residual_s(), res.residual_r()});
        rows.push_back({{"predicted_mu_s", res.predicted_mu_s}, {"measured_mu_s", res.measured_mu_s},
                        {"predicted_mu_r", res.predicted_mu_r}, {"measured_mu_r", res.measured_mu_r}});
    }
    r.passed = worst <= kServiceTol;
    r.detail = "max service-rate residual = " + fmt(worst) + " (tol " + fmt(kServiceTol) + ")";
    r.metrics = {{"max_residual", worst}, {"configs", rows}};
    return r;
}

CheckResult check_bound_sandwich(const ValidationOptions& opts) {
    CheckResult r = make(5, "bound_sandwich");
    Sampler s(opts.seed, 5);
    int violations = 0, inner_hits = 0, outer_hits = 0;
    constexpr int kSamples = 10'000;
    for (int i = 0; i < kSamples; ++i) {
        const RegionSpec spec{s.channel(), s.energy(0.0, 1.0), s.policy(0.0, 1.0)};
        const auto mu = saturated_throughput(spec.ch, spec.en, spec.pol);
        // Points on a box a little larger than the saturated throughputs keep
        // most samples near the interesting part of the plane.
        const RatePoint p{s.uniform(0.0, 1.5 * mu.mu_s + 0.01), s.uniform(0.0, 1.5 * mu.mu_r + 0.01)};
        const bool in = inner_contains(p, spec);
        const bool out = outer_contains(p, spec);
        inner_hits += in;
        outer_hits += out;
        violations += in && !out;
    }
    r.passed = violations == 0;
    r.detail = std::to_string(violations) + " violations in " + std::to_string(kSamples) + " samples (" +
               std::to_string(inner_hits) + " inside the inner bound)";
    r.metrics = {{"violations", violations}, {"inner_hits", inner_hits}, {"outer_hits", outer_hits}};
    return r;
}

CheckResult check_closure_vs_union(const ValidationOptions& opts) {
    CheckResult r = make(6, "closure_vs_union_oracle");
    const ChannelParams star{0.2, 0.6, 0.5};
    struct Set {
        ChannelParams ch;
        EnergyParams en;
    };
    // Both cases, plus sets where the construction clips at the axis.
    const std::vector<Set> sets = {
        {star, {0.5, 0.6}},             // above one, A-B-C-D
        {star, {0.3, 0.4}},             // below one, E-F-G
        {star, {1.0, 1.0}},             // pure curve
        {star, {0.9, 0.9}},             // curve clipped before C
        {{0.1, 0.8, 0.9}, {0.2, 0.5}},  // below one, strong relay link
        {{0.3, 0.5, 0.3}, {0.7, 0.35}}, // above one, other channel
    };
    UnionOracleOptions uo;
    uo.grid_n = 200;
    uo.rate_n = 200;
    uo.domain = PolicyDomain::Full;
    uo.include_curve_policies = false;
    uo.threads = opts.threads;

    double worst_band = 0.0;
    long total_disagree = 0;
    json rows = json::array();
    for (const auto& set : sets) {
        const auto b = boundary(set.ch, set.en);
        const auto grid = union_oracle(set.ch, set.en, uo);
        double band = 0.0;
        long disagree = 0;
        for (int i = 0; i < grid.rate_n; ++i) {
            for (int j = 0; j < grid.rate_n; ++j) {
                const RatePoint p{grid.coord(i), grid.coord(j)};
                if (grid.at(i, j) != contains(p, b)) {
                    ++disagree;
                    band = std::max(band, distance_to_boundary(p, b));
                }
            }
        }
        worst_band = std::max(worst_band, band);
        total_disagree += disagree;
        rows.push_back({{"delta_s", set.en.delta_s}, {"delta_r", set.en.delta_r}, {"case", to_string(b.closure_case)},
                        {"disagreements", disagree}, {"max_distance", band}});
    }
    r.passed = worst_band <= kUnionBand;
    r.detail = std::to_string(total_disagree) + " disagreeing grid points, all within " + fmt(worst_band) +
               " of the boundary (band " + fmt(kUnionBand) + ")";
    r.metrics = {{"max_distance", worst_band}, {"sets", rows}};
    return r;
}

CheckResult check_boundary_continuity(const ValidationOptions& opts) {
    CheckResult r = make(7, "boundary_continuity");
    Sampler s(opts.seed, 7);
    double worst = 0.0;
    int sets = 0;
    auto vertex = [](const ClosureBoundary& b, char label) -> const NamedVertex* {
        if (const auto* v = b.find(label))
            return v;
        for (const auto& d : b.dropped)
            if (d.label == label)
                return &d;
        return nullptr;
    };
    while (sets < 100) {
        const ChannelParams ch = s.channel();
        const EnergyParams en = s.energy(0.05, 1.0);
        if (en.delta_s + en.delta_r < 1.0)
            continue;
        const auto b = boundary(ch, en);
        for (char label : {'B', 'C'}) {
            const auto* v = vertex(b, label);
            if (v == nullptr)
                throw std::logic_error(std::string("closure boundary lacks vertex ") + label);
            worst = std::max(worst, std::abs(curve_y(v->point.lambda_s, ch) - v->point.lambda_r));
        }
        ++sets;
    }

    // Exact reference for p_sd=1/5, p_rd=3/5, p_sr=1/2, delta=(1/2, 3/5),
    // from the vertex formulas in rational arithmetic.
    using Q = boost::rational<long long>;
    const Q p_sd(1, 5), p_rd(3, 5), p_sr(1, 2), d_s(1, 2), d_r(3, 5);
    const Q alpha = p_sd + (Q(1) - p_sd) * p_sr;
    const Q c = (Q(1) - p_sd) * p_sr;
    const Q one(1);
    auto as_point = [](Q x, Q y) { return RatePoint{boost::rational_cast<double>(x), boost::rational_cast<double>(y)}; };
    const std::vector<std::pair<char, RatePoint>> expected = {
        {'A', as_point(Q(0), d_r * p_rd)},
        {'B', as_point((one - d_r) * (one - d_r) * alpha, d_r * d_r * p_rd - (one - d_r) * (one - d_r) * c)},
        {'C', as_point(d_s * d_s * alpha, (one - d_s) * (one - d_s) * p_rd - d_s * d_s * c)},
        {'D', as_point(d_s * (one - d_s) * p_rd * alpha / ((one - d_s) * p_rd + d_s * c), Q(0))},
    };
    // The same vertices as decimals: (0, 0.36), (0.096, 0.152), (0.15, 0.05), (0.18, 0).
    const RatePoint decimals[] = {{0.0, 0.36}, {0.096, 0.152}, {0.15, 0.05}, {0.18, 0.0}};
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (std::abs(expected[i].second.lambda_s - decimals[i].lambda_s) > kVertexTol ||
            std::abs(expected[i].second.lambda_r - decimals[i].lambda_r) > kVertexTol)
            throw std::logic_error("exact vertex reference disagrees with its decimal form");
    const auto b = boundary({0.2, 0.6, 0.5}, {0.5, 0.6});
    double vertex_err = 0.0;
    bool all_found = b.vertices.size() == expected.size();
    for (const auto& [label, point] : expected) {
        const auto* v = b.find(label);
        if (v == nullptr) {
            all_found = false;
            continue;
        }
        vertex_err = std::max({vertex_err, std::abs(v->point.lambda_s - point.lambda_s),
                               std::abs(v->point.lambda_r - point.lambda_r)});
    }
    r.passed = worst <= kContinuityTol && all_found && vertex_err <= kVertexTol;
    r.detail = "max curve mismatch at B/C = " + fmt(worst) + " over 100 sets; example vertices off by " +
               fmt(vertex_err) + (all_found ? "" : " (vertex missing)");
    r.metrics = {{"max_curve_mismatch", worst}, {"example_vertex_error", vertex_err}, {"example_vertices_found", all_found}};
    return r;
}

CheckResult check_optimizers(const ValidationOptions& opts) {
    CheckResult r = make(8, "optimizer_correctness");
    Sampler s(opts.seed, 8);
    struct Sample {
        ChannelParams ch;
        EnergyParams en;
        double x, y;
    };
    std::vector<Sample> samples;
    for (int i = 0; i < 100; ++i) {
        Sample smp{s.channel(), s.energy(0.1, 1.0), 0.0, 0.0};
        smp.x = s.uniform(0.0, boundary(smp.ch, smp.en).x_end());
        smp.y = s.uniform(0.0, smp.en.delta_r * smp.ch.p_rd);
        samples.push_back(smp);
    }
    struct Errors {
        double p2 = 0.0, p1 = 0.0;
    };
    const auto errors = parallel_map<Errors>(samples.size(), opts.threads, [&](std::size_t i) {
        const auto& smp = samples[i];
        const double alpha = success_aggregate(smp.ch);
        const double c = relay_capture(smp.ch);
        const double p_rd = smp.ch.p_rd;
        Errors e;

        // P2: q_r on a 1e-4 grid; q_s is pinned by x.
        double best_y = -1.0;
        const auto steps = static_cast<long>(std::floor(smp.en.delta_r / 1e-4));
        for (long k = 0; k <= steps + 1; ++k) {
            const double q_r = std::min(k * 1e-4, smp.en.delta_r);
            if (q_r >= 1.0 || smp.x > smp.en.delta_s * (1.0 - q_r) * alpha)
                continue;
            best_y = std::max(best_y, q_r * p_rd * (1.0 - smp.x / ((1.0 - q_r) * alpha)) - c * smp.x / alpha);
        }
        e.p2 = std::abs(optimize_p2(smp.x, smp.ch, smp.en).y_star - best_y);

        // P1: 2-D grid over (q_s, q_r) of the largest admissible x.
        constexpr int kN = 1000;
        double best_x = 0.0;
        for (int a = 0; a <= kN; ++a) {
            const double q_s = smp.en.delta_s * a / kN;
            for (int b = 0; b <= kN; ++b) {
                const double q_r = smp.en.delta_r * b / kN;
                const double relay_room = q_r * (1.0 - q_s) * p_rd - smp.y;
                if (relay_room < 0.0)
                    continue;
                double x = q_s * (1.0 - q_r) * alpha;
                if (c > 0.0)
                    x = std::min(x, alpha * relay_room / c);
                best_x = std::max(best_x, x);
            }
        }
        e.p1 = std::abs(optimize_p1(smp.y, smp.ch, smp.en).x_star - best_x);
        return e;
    });
    double worst_p2 = 0.0, worst_p1 = 0.0;
    for (const auto& e : errors) {
        worst_p2 = std::max(worst_p2, e.p2);
        worst_p1 = std::max(worst_p1, e.p1);
    }
    r.passed = worst_p2 <= kP2Tol && worst_p1 <= kP1Tol;
    r.detail = "P2 max error " + fmt(worst_p2) + " (tol " + fmt(kP2Tol) + "), P1 max error " + fmt(worst_p1) +
               " (tol " + fmt(kP1Tol) + ")";
    r.metrics = {{"p2_max_error", worst_p2}, {"p1_max_error", worst_p1}};
    return r;
}

CheckResult check_stability_concordance(const ValidationOptions& opts) {
    CheckResult r = make(9, "stability_concordance");
    Sampler s(opts.seed, 9);
    struct Point {
        RegionSpec spec;
        RatePoint rates;
        bool inside;
    };
    std::vector<Point> points;
    constexpr int kPerSide = 20;
    int inside_count = 0, outside_count = 0;
    while (inside_count < kPerSide || outside_count < kPerSide) {
        const RegionSpec spec{s.channel(), s.energy(0.3, 1.0), s.policy(0.2, 0.8)};
        const double angle = s.uniform(0.15, std::numbers::pi / 2 - 0.15);
        if (inside_count < kPerSide) {
            const double t = radial_extent(angle, [&](const RatePoint& p) { return inner_contains(p, spec); });
            points.push_back({spec, along(angle, (1.0 - kDepth) * t), true});
            ++inside_count;
        } else {
            const double t = radial_extent(angle, [&](const RatePoint& p) { return outer_contains(p, spec); });
            const RatePoint p = along(angle, (1.0 + kDepth) * t);
            if (p.lambda_s > 1.0 || p.lambda_r > 1.0)
                continue;
            points.push_back({spec, p, false});
            ++outside_count;
        }
    }

    StabilityCriteria criteria;
    criteria.threads = 1; // points already run in parallel
    const auto point_seeds = derive_seeds(opts.seed ^ 0x09, points.size());
    const auto verdicts = parallel_map<Verdict>(points.size(), opts.threads, [&](std::size_t i) {
        StabilityCriteria c = criteria;
        c.seeds = derive_seeds(point_seeds[i], 3);
        const auto& pt = points[i];
        const auto cfg = sim_config(pt.spec.ch, pt.spec.en, pt.spec.pol, pt.rates, SimMode::Original, opts, 0);
        return assess(cfg, c).network();
    });

    int misses = 0;
    json rows = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Verdict want = points[i].inside ? Verdict::Stable : Verdict::Unstable;
        misses += verdicts[i] != want;
        const auto& sp = points[i].spec;
        rows.push_back({{"inside", points[i].inside},
                        {"lambda_s", points[i].rates.lambda_s},
                        {"lambda_r", points[i].rates.lambda_r},
                        {"p_sd", sp.ch.p_sd}, {"p_rd", sp.ch.p_rd}, {"p_sr", sp.ch.p_sr},
                        {"delta_s", sp.en.delta_s}, {"delta_r", sp.en.delta_r},
                        {"q_s", sp.pol.q_s}, {"q_r", sp.pol.q_r},
                        {"verdict", to_string(verdicts[i])}});
    }
    r.passed = misses == 0;
    r.detail = std::to_string(misses) + " of " + std::to_string(points.size()) +
               " points misclassified (inside must be STABLE, outside UNSTABLE)";
    r.metrics = {{"misclassified", misses}, {"points", rows}};
    return r;
}

CheckResult check_achievability(const ValidationOptions& opts) {
    CheckResult r = make(10, "achievability");
    Sampler s(opts.seed, 10);
    struct Target {
        ChannelParams ch;
        EnergyParams en;
        RatePoint point;
        AccessPolicy pol;
    };
    std::vector<Target> targets;
    while (targets.size() < 10) {
        Target t;
        t.ch = s.channel();
        t.en = s.energy(0.2, 1.0);
        const auto b = boundary(t.ch, t.en);
        const double x = s.uniform(0.0, b.x_end());
        const auto sol = optimize_p2(x, t.ch, t.en);
        t.point = {x, sol.y_star};
        t.pol = {sol.q_s, sol.q_r_star};
        targets.push_back(t);
    }
    const auto seeds = derive_seeds(opts.seed ^ 0x0a, targets.size());
    const auto measured = parallel_map<RatePoint>(targets.size(), opts.threads, [&](std::size_t i) {
        const auto& t = targets[i];
        const auto m = run(sim_config(t.ch, t.en, t.pol, {}, SimMode::Saturated, opts, seeds[i]));
        // Relay capacity left for exogenous traffic after forwarding.
        return RatePoint{m.throughput_s, m.throughput_r - m.measured_lambda_s_to_r};
    });
    double worst = 0.0;
    json rows = json::array();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        worst = std::max({worst, std::abs(measured[i].lambda_s - t.point.lambda_s),
                          std::abs(measured[i].lambda_r - t.point.lambda_r)});
        rows.push_back({{"x", t.point.lambda_s}, {"y", t.point.lambda_r}, {"q_s", t.pol.q_s}, {"q_r", t.pol.q_r},
                        {"measured_x", measured[i].lambda_s}, {"measured_y", measured[i].lambda_r}});
    }
    r.passed = worst <= kAchieveTol;
    r.detail = "max |measured - boundary point| = " + fmt(worst) + " (tol " + fmt(kAchieveTol) + ")";
    r.metrics = {{"max_error", worst}, {"points", rows}};
    return r;
}

std::vector<Check> model_checks() {
    return {check_battery_law,     check_relay_split,        check_saturated_throughput, check_service_identities,
            check_bound_sandwich,  check_closure_vs_union,   check_boundary_continuity,  check_optimizers,
            check_stability_concordance, check_achievability};
}

std::vector<CheckResult> run_checks(const std::vector<Check>& checks, const ValidationOptions& opts) {
    std::vector<std::future<CheckResult>> pending;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        pending.push_back(std::async(std::launch::async, [&, i] {
            try {
                return checks[i](opts);
            } catch (const std::exception& e) {
                CheckResult r;
                r.id = static_cast<int>(i) + 1;
                r.name = "check_" + std::to_string(i + 1);
                r.detail = std::string("threw: ") + e.what();
                return r;
            }
        }));
    }
    std::vector<CheckResult> out;
    for (auto& f : pending)
        out.push_back(f.get());
    return out;
}

json to_json(const CheckResult& r) {
    return {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"metrics", r.metrics}};
}

json to_json(const std::vector<CheckResult>& results) {
    json checks = json::array();
    bool all = true;
    for (const auto& r : results) {
        checks.push_back(to_json(r));
        all = all && r.passed;
    }
    return {{"passed", all}, {"checks", checks}};
}

} // namespace ehrelay
