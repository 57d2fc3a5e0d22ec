#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lockbench {

using cplx = std::complex<double>;

/// Uniform sampling grid: n samples spaced dt seconds apart.
class TimeGrid {
  public:
    /// Throws ConfigError unless dt > 0 (finite) and n >= 2.
    TimeGrid(double dt, std::size_t n);

    double dt() const noexcept { return dt_; }
    std::size_t n() const noexcept { return n_; }
    double duration() const noexcept { return dt_ * static_cast<double>(n_); }
    /// pi/dt, the largest representable baseband angular frequency.
    double nyquist_omega() const noexcept;
    double time(std::size_t i) const noexcept { return dt_ * static_cast<double>(i); }

    /// Number of whole samples in `seconds`; throws ConfigError (naming the
    /// nearest valid value) when `seconds` is not an integer multiple of dt.
    std::size_t samples_in(double seconds, const char* what) const;

    /// Throws ConfigError unless `omega` is strictly below the Nyquist limit.
    void require_below_nyquist(double omega, const char* what) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

  private:
    double dt_;
    std::size_t n_;
};

/// Real-valued sampled signal. Immutable once built.
class RealTrace {
  public:
    RealTrace(TimeGrid grid, std::vector<double> samples);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }

    /// Samples [first, first+count) on a grid of the same dt.
    RealTrace slice(std::size_t first, std::size_t count) const;

  private:
    TimeGrid grid_;
    std::vector<double> samples_;
};

/// Photon flux (Hz) out of a detector. Only detection operations build these.
class PhotocurrentTrace {
  public:
    const TimeGrid& grid() const noexcept { return trace_.grid(); }
    std::span<const double> samples() const noexcept { return trace_.samples(); }
    std::size_t size() const noexcept { return trace_.size(); }
    double operator[](std::size_t i) const noexcept { return trace_[i]; }
    const RealTrace& as_real() const noexcept { return trace_; }

  private:
    friend PhotocurrentTrace make_photocurrent(TimeGrid, std::vector<double>);
    explicit PhotocurrentTrace(RealTrace t) : trace_(std::move(t)) {}
    RealTrace trace_;
};

/// Complex photon-flux amplitude (sqrt(Hz)) in the rotating frame of the
/// fiducial reference. `mean` is the deterministic carrier the fluctuations
/// ride on; for a laser it is r0 (real), after optics it is whatever the
/// linear network makes of it.
class FieldTrace {
  public:
    FieldTrace(TimeGrid grid, cplx mean, std::vector<cplx> samples);

    const TimeGrid& grid() const noexcept { return grid_; }
    cplx mean() const noexcept { return mean_; }
    /// |mean|, the r0 of the flux expansion.
    double r0() const noexcept { return std::abs(mean_); }
    std::span<const cplx> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    cplx operator[](std::size_t i) const noexcept { return samples_[i]; }

    /// Re(sample - mean): in-phase fluctuation relative to the fiducial axis.
    RealTrace in_phase() const;
    /// Im(sample - mean): quadrature-phase fluctuation relative to the
    /// fiducial axis.
    RealTrace quadrature() const;

    FieldTrace slice(std::size_t first, std::size_t count) const;

  private:
    TimeGrid grid_;
    cplx mean_;
    std::vector<cplx> samples_;
};

PhotocurrentTrace make_photocurrent(TimeGrid grid, std::vector<double> samples);

/// Throws ShapeError when the two grids differ.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* op);

}  // namespace lockbench
