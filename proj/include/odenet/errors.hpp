#pragma once

#include <stdexcept>
#include <string>

namespace odenet {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched sizes between states, controls and fields.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Time argument outside the horizon a schedule or field is defined on.
class TimeRangeError : public Error {
public:
    using Error::Error;
};

// State norm crossed the divergence threshold during integration.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double at_time)
        : Error(what), time(at_time) {}
    double time;
};

// A numeric precondition (lemma hypothesis, argument range, ...) failed.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Singular or unusably ill-conditioned linear system.
class ConditioningError : public Error {
public:
    using Error::Error;
};

// A tolerance-driven search (fit width, mollification radius, switching rate)
// exhausted its range; carries the best value it reached.
class ApproximationError : public Error {
public:
    ApproximationError(const std::string& what, double achieved)
        : Error(what), best_achieved(achieved) {}
    double best_achieved;
};

// Malformed configuration or schedule file.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace odenet
