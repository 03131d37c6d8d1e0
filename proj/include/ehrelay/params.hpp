#pragma once

#include <string>
#include <vector>

namespace ehrelay {

// Tolerance for double-precision probability comparisons.
inline constexpr double kProbTol = 1e-9;

// Link success probabilities S->D, R->D and S->R.
struct ChannelParams {
    double p_sd = 0.0;
    double p_rd = 0.0;
    double p_sr = 0.0;
};

// Bernoulli energy-harvest rates per slot.
struct EnergyParams {
    double delta_s = 0.0;
    double delta_r = 0.0;
};

// Transmit probabilities of an active node.
struct AccessPolicy {
    double q_s = 0.0;
    double q_r = 0.0;
};

// Arrival-rate pair (lambda_S, lambda_R), packets/slot.
struct RatePoint {
    double lambda_s = 0.0;
    double lambda_r = 0.0;
};

struct ThroughputPair {
    double mu_s = 0.0;
    double mu_r = 0.0;
};

struct FieldError {
    std::string field;
    std::string message;
};

// Each returns one entry per violated invariant; empty means valid.
std::vector<FieldError> validate(const ChannelParams& ch);
std::vector<FieldError> validate(const EnergyParams& en);
std::vector<FieldError> validate(const AccessPolicy& pol);
std::vector<FieldError> validate(const RatePoint& rates);

std::string describe(const std::vector<FieldError>& errors);

} // namespace ehrelay
