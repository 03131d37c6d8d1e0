#pragma once

#include <stdexcept>
#include <string>

namespace ehrelay {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// success_aggregate(ch) == 0: no source packet ever departs.
class DegenerateChannelError : public Error {
public:
    using Error::Error;
};

// A region or hypothetical-system formula divides by zero for this spec.
class DegenerateRegionError : public Error {
public:
    using Error::Error;
};

// A hypothetical-system occupancy fraction exceeds one.
class UnstableOccupancyError : public Error {
public:
    using Error::Error;
};

// An optimisation problem has no feasible point with nonnegative objective.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Configuration document or run parameters are invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A run that was required to be stable is not.
class UnstableRunError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace ehrelay
