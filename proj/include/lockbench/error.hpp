#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace lockbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, grids, timings or scenario documents.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Traces that must share a grid do not.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Stochastic integration left its stable region.
class NumericalInstability : public Error {
  public:
    NumericalInstability(const std::string& what, double dt)
        : Error(what), dt_(dt) {}
    double dt() const noexcept { return dt_; }

  private:
    double dt_;
};

/// Input does not satisfy the statistical preconditions of an estimator.
class DiagnosticError : public Error {
  public:
    using Error::Error;
};

/// Feedforward phase correction ran past the actuator range (or went
/// non-finite).
class ActuatorRangeError : public Error {
  public:
    ActuatorRangeError(const std::string& what, double first_failure_time)
        : Error(what), time_(first_failure_time) {}
    double first_failure_time() const noexcept { return time_; }

  private:
    double time_;
};

/// Closed feedback loop diverged.
class InstabilityError : public Error {
  public:
    InstabilityError(const std::string& what, double oscillation_omega,
                     double detection_time)
        : Error(what), omega_(oscillation_omega), time_(detection_time) {}
    /// Angular frequency (rad/s) of the growing oscillation, or 0 when fewer
    /// than two zero crossings cleared the noise before detection.
    double oscillation_omega() const noexcept { return omega_; }
    double detection_time() const noexcept { return time_; }

  private:
    double omega_;
    double time_;
};

// Warnings go through a replaceable sink; the default writes to std::clog.
using WarningSink = std::function<void(const std::string&)>;
/// Installs `sink` and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace lockbench
