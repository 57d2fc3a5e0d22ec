#include "lockbench/trace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lockbench/error.hpp"

namespace lockbench {

TimeGrid::TimeGrid(double dt, std::size_t n) : dt_(dt), n_(n) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        std::ostringstream os;
        os << "time grid: dt must be positive and finite, got " << dt;
        throw ConfigError(os.str());
    }
    if (n < 2) {
        std::ostringstream os;
        os << "time grid: need at least 2 samples, got " << n;
        throw ConfigError(os.str());
    }
}

double TimeGrid::nyquist_omega() const noexcept { return std::numbers::pi / dt_; }

std::size_t TimeGrid::samples_in(double seconds, const char* what) const {
    if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
        std::ostringstream os;
        os << what << ": duration must be finite and >= 0, got " << seconds;
        throw ConfigError(os.str());
    }
    const double k = seconds / dt_;
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-9 * std::max(1.0, kr)) {
        std::ostringstream os;
        os.precision(17);
        os << what << " = " << seconds << " s is not a multiple of dt = " << dt_
           << " s; nearest valid value is " << kr * dt_ << " s";
        throw ConfigError(os.str());
    }
    return static_cast<std::size_t>(kr);
}

void TimeGrid::require_below_nyquist(double omega, const char* what) const {
    if (!(omega < nyquist_omega())) {
        std::ostringstream os;
        os << what << " = " << omega << " rad/s is not below the Nyquist limit "
           << nyquist_omega() << " rad/s";
        throw ConfigError(os.str());
    }
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* op) {
    if (!(a == b)) {
        std::ostringstream os;
        os << op << ": grid mismatch (dt " << a.dt() << " n " << a.n() << " vs dt "
           << b.dt() << " n " << b.n() << ")";
        throw ShapeError(os.str());
    }
}

RealTrace::RealTrace(TimeGrid grid, std::vector<double> samples)
    : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.n())
        throw ShapeError("real trace: sample count does not match grid");
    for (double x : samples_)
        if (!std::isfinite(x)) throw DomainError("real trace: non-finite sample");
}

RealTrace RealTrace::slice(std::size_t first, std::size_t count) const {
    if (first + count > samples_.size()) throw ShapeError("real trace: slice out of range");
    return RealTrace(TimeGrid(grid_.dt(), count),
                     std::vector<double>(samples_.begin() + first,
                                         samples_.begin() + first + count));
}

FieldTrace::FieldTrace(TimeGrid grid, cplx mean, std::vector<cplx> samples)
    : grid_(grid), mean_(mean), samples_(std::move(samples)) {
    if (samples_.size() != grid_.n())
        throw ShapeError("field trace: sample count does not match grid");
    for (const cplx& z : samples_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DomainError("field trace: non-finite sample");
}

RealTrace FieldTrace::in_phase() const {
    std::vector<double> v(samples_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples_[i].real() - mean_.real();
    return RealTrace(grid_, std::move(v));
}

RealTrace FieldTrace::quadrature() const {
    std::vector<double> v(samples_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples_[i].imag() - mean_.imag();
    return RealTrace(grid_, std::move(v));
}

FieldTrace FieldTrace::slice(std::size_t first, std::size_t count) const {
    if (first + count > samples_.size()) throw ShapeError("field trace: slice out of range");
    return FieldTrace(TimeGrid(grid_.dt(), count), mean_,
                      std::vector<cplx>(samples_.begin() + first,
                                        samples_.begin() + first + count));
}

PhotocurrentTrace make_photocurrent(TimeGrid grid, std::vector<double> samples) {
    return PhotocurrentTrace(RealTrace(grid, std::move(samples)));
}

}  // namespace lockbench
