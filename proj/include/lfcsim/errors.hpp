#pragma once

#include <stdexcept>
#include <string>

namespace lfcsim {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or invariant on a value type was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The integrator produced a non-finite state.
class IntegrationDiverged : public Error {
public:
    IntegrationDiverged(double t, const std::string& what)
        : Error(what + " (t=" + std::to_string(t) + " s)")
        , time_(t)
    {
    }

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Broker invariant breach: out-of-lockstep grant or undelivered obligation.
class SchedulingError : public Error {
public:
    using Error::Error;
};

/// Scenario text could not be parsed or failed validation.
/// `location` names the section and key (and line, when known).
class ConfigError : public Error {
public:
    ConfigError(std::string location, const std::string& message)
        : Error(location.empty() ? message : location + ": " + message)
        , location_(std::move(location))
    {
    }

    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

} // namespace lfcsim
