#include "ehrelay/model.hpp"

#include <algorithm>
#include <sstream>

#include "ehrelay/errors.hpp"

namespace ehrelay {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_unit(std::vector<FieldError>& out, const char* name, double v) {
    if (!in_unit(v)) {
        std::ostringstream msg;
        msg << "must be in [0,1], got " << v;
        out.push_back({name, msg.str()});
    }
}

} // namespace

std::vector<FieldError> validate(const ChannelParams& ch) {
    std::vector<FieldError> out;
    check_unit(out, "p_sd", ch.p_sd);
    check_unit(out, "p_rd", ch.p_rd);
    check_unit(out, "p_sr", ch.p_sr);
    if (out.empty() && !(ch.p_rd > ch.p_sd))
        out.push_back({"p_rd", "must exceed p_sd (relay has the better channel to D)"});
    return out;
}

std::vector<FieldError> validate(const EnergyParams& en) {
    std::vector<FieldError> out;
    check_unit(out, "delta_s", en.delta_s);
    check_unit(out, "delta_r", en.delta_r);
    return out;
}

std::vector<FieldError> validate(const AccessPolicy& pol) {
    std::vector<FieldError> out;
    check_unit(out, "q_s", pol.q_s);
    check_unit(out, "q_r", pol.q_r);
    return out;
}

std::vector<FieldError> validate(const RatePoint& rates) {
    std::vector<FieldError> out;
    check_unit(out, "lambda_s", rates.lambda_s);
    check_unit(out, "lambda_r", rates.lambda_r);
    return out;
}

std::string describe(const std::vector<FieldError>& errors) {
    std::string out;
    for (const auto& e : errors) {
        if (!out.empty())
            out += "; ";
        out += e.field + ": " + e.message;
    }
    return out;
}

double success_aggregate(const ChannelParams& ch) noexcept {
    return ch.p_sd + relay_capture(ch);
}

double relay_capture(const ChannelParams& ch) noexcept {
    return (1.0 - ch.p_sd) * ch.p_sr;
}

double relay_fraction(const ChannelParams& ch) {
    const double alpha = success_aggregate(ch);
    if (alpha <= 0.0)
        throw DegenerateChannelError("relay_fraction: p_sd + (1-p_sd) p_sr is zero, no source packet departs");
    return relay_capture(ch) / alpha;
}

double relay_total_arrival(const RatePoint& rates, const ChannelParams& ch) {
    return rates.lambda_r + relay_fraction(ch) * rates.lambda_s;
}

double battery_nonempty_prob(double delta, double q) noexcept {
    if (q <= 0.0)
        return delta > 0.0 ? 1.0 : 0.0;
    return std::min(delta / q, 1.0);
}

double effective_access(double delta, double q) noexcept {
    return std::min(delta, q);
}

ThroughputPair saturated_throughput(const ChannelParams& ch, const EnergyParams& en,
                                    const AccessPolicy& pol) noexcept {
    const double ms = effective_access(en.delta_s, pol.q_s);
    const double mr = effective_access(en.delta_r, pol.q_r);
    return {ms * (1.0 - mr) * success_aggregate(ch), mr * (1.0 - ms) * ch.p_rd};
}

namespace {

double occupancy_fraction(double load, double capacity, const char* what) {
    if (capacity <= 0.0)
        throw DegenerateRegionError(std::string(what) + ": zero service per active slot");
    const double frac = load / capacity;
    if (frac > 1.0 + kProbTol) {
        std::ostringstream msg;
        msg << what << ": active-slot fraction " << frac << " exceeds 1, queue unstable";
        throw UnstableOccupancyError(msg.str());
    }
    return std::min(frac, 1.0);
}

} // namespace

double hypo_active_fraction_relay(const RatePoint& rates, const ChannelParams& ch,
                                  const EnergyParams& en, const AccessPolicy& pol) {
    const double ms = effective_access(en.delta_s, pol.q_s);
    const double capacity = (1.0 - ms) * pol.q_r * ch.p_rd;
    if (capacity <= 0.0)
        throw DegenerateRegionError("hypo_active_fraction_relay: zero service per active slot");
    return occupancy_fraction(relay_total_arrival(rates, ch), capacity, "hypo_active_fraction_relay");
}

double hypo_active_fraction_source(const RatePoint& rates, const ChannelParams& ch,
                                   const EnergyParams& en, const AccessPolicy& pol) {
    const double mr = effective_access(en.delta_r, pol.q_r);
    const double capacity = pol.q_s * (1.0 - mr) * success_aggregate(ch);
    return occupancy_fraction(rates.lambda_s, capacity, "hypo_active_fraction_source");
}

} // namespace ehrelay
