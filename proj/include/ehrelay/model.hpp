#pragma once

#include "ehrelay/params.hpp"

namespace ehrelay {

// Probability that a solo source transmission leaves the source queue:
// p_sd + (1 - p_sd) p_sr.
double success_aggregate(const ChannelParams& ch) noexcept;

// (1 - p_sd) p_sr, the unconditional probability that a solo source
// transmission is taken over by the relay.
double relay_capture(const ChannelParams& ch) noexcept;

// Fraction of departing source packets that enter the relay queue.
// Throws DegenerateChannelError when success_aggregate(ch) == 0.
double relay_fraction(const ChannelParams& ch);

// lambda_R + relay_fraction(ch) * lambda_S. Independent of q and delta.
double relay_total_arrival(const RatePoint& rates, const ChannelParams& ch);

// Pr(B != 0) = min(delta / q, 1). For q == 0 the battery never drains, so
// the result is 1 if delta > 0 and 0 otherwise.
double battery_nonempty_prob(double delta, double q) noexcept;

// min(delta, q): the effective per-slot transmit probability of a
// saturated node.
double effective_access(double delta, double q) noexcept;

ThroughputPair saturated_throughput(const ChannelParams& ch, const EnergyParams& en,
                                    const AccessPolicy& pol) noexcept;

// Pr(B_R != 0, Q_R != 0) in the system where the source always transmits
// (dummy packets when empty). Throws DegenerateRegionError on a zero
// denominator and UnstableOccupancyError when the fraction exceeds one.
double hypo_active_fraction_relay(const RatePoint& rates, const ChannelParams& ch,
                                  const EnergyParams& en, const AccessPolicy& pol);

// Pr(B_S != 0, Q_S != 0) in the system where the relay always transmits.
double hypo_active_fraction_source(const RatePoint& rates, const ChannelParams& ch,
                                   const EnergyParams& en, const AccessPolicy& pol);

} // namespace ehrelay
