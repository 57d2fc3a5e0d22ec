#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lockbench/noise.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

enum class Detrend { none, mean };

/// Double-sided baseband PSD on the non-negative half of the frequency axis.
/// Bin k sits at omega_k = 2 pi k / (segment_len dt).
struct SpectrumEstimate {
    std::vector<double> omega;  // rad/s
    std::vector<double> psd;
    std::size_t n_segments = 0;
    std::size_t segment_len = 0;
    double resolution = 0.0;  // rad/s
    // Periodic Hann window metadata.
    std::string window = "hann";
    double coherent_gain = 0.5;
    double enbw_bins = 1.5;
};

/// Welch estimate with a periodic Hann window. A white sequence of
/// per-sample variance S0/dt reports psd ~ S0. Requires segment_len <= n,
/// segment_len >= 8 and overlap in [0, 0.9].
SpectrumEstimate welch_psd(const RealTrace& trace, std::size_t segment_len, double overlap,
                           Detrend detrend = Detrend::none);
SpectrumEstimate welch_psd(std::span<const double> samples, double dt, std::size_t segment_len,
                           double overlap, Detrend detrend = Detrend::none);

/// PSD of a process with stationary increments: Welch of the first
/// difference divided by 4 sin^2(omega dt / 2). The DC bin is dropped.
SpectrumEstimate increment_psd(const RealTrace& trace, std::size_t segment_len, double overlap);

struct CrossSpectrum {
    std::vector<double> omega;
    std::vector<std::complex<double>> csd;
    std::size_t n_segments = 0;
};

/// Welch cross-spectrum E[X_a conj(X_b)] with the same normalization as
/// welch_psd.
CrossSpectrum welch_cross_psd(const RealTrace& a, const RealTrace& b, std::size_t segment_len,
                              double overlap);

/// Mean PSD over bins with omega in [lo, hi].
double band_average(const SpectrumEstimate& est, double lo, double hi);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);
/// Least squares y = slope x (through the origin); r_squared is
/// 1 - SS_res/SS_tot about the mean of y.
LinearFit fit_line_through_origin(std::span<const double> x, std::span<const double> y);
/// Slope of log(value) against log(omega) over bins with omega in [lo, hi].
LinearFit loglog_slope(std::span<const double> omega, std::span<const double> value, double lo,
                       double hi);

struct QuadraticFit {
    double a = 0.0;  // curvature
    double b = 0.0;
    double c = 0.0;
    /// -b / (2a)
    double vertex() const noexcept { return -b / (2.0 * a); }
};
QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

struct SqrtGrowthFit {
    double c = 0.0;
    double r_squared = 0.0;
};
/// Fit value = c sqrt(t).
SqrtGrowthFit fit_sqrt_growth(std::span<const double> t, std::span<const double> value);

enum class CurveKind { coherent_quadrature, laser_quad2, locked_beat, delayed_homodyne_spectrum };

struct CurveParams {
    double gamma = 0.0;
    double t = 0.7071067811865476;
    double r = 0.7071067811865476;
    double a0 = 0.0;
    /// Master amplitude; when > 0 the locked beat includes the shared vacuum
    /// term 4 t^4 a0^4 / b0^2.
    double b0 = 0.0;
    double r0 = 0.0;
    double tau = 0.0;
    double T = 0.0;
};

/// Closed-form reference spectra:
///   coherent_quadrature        1/4
///   laser_quad2                (W^2 + gamma^2)/(4 W^2), +inf at W = 0
///   locked_beat                2 (t a0 / r)^2 [+ 4 t^4 a0^4 / b0^2]
///   delayed_homodyne_spectrum  4 r0^2 ((W^2+gamma^2)/W^2)
///                                   [sin(W tau/2) sin(W T/2)/(W/2)]^2
std::function<double(double)> analytic_curve(CurveKind kind, const CurveParams& params);

CurveKind parse_curve_kind(const std::string& name);
std::string to_string(CurveKind kind);

/// Delayed-homodyne variance as printed, r0^2 T [2 + sign T tau gamma^2 (1 - T/(6 tau))].
double delayed_homodyne_variance_printed(double r0, double gamma, double tau, double T,
                                         int sign);
/// Variance of the measurement for the linearized laser, exact for tau >= T:
/// r0^2 T [2 + T tau gamma^2 (1 - T/(3 tau))].
double delayed_homodyne_variance_exact(double r0, double gamma, double tau, double T);

struct ComparisonReport {
    std::string name;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::size_t n_bins = 0;
    std::size_t groups = 0;
};

/// Relative error |est - ref|/ref over bins in [lo, hi] (>= 10 bins and ref > 0
/// required). With groups > 0 the band is cut into that many log-spaced
/// sub-bands and band means are compared instead of single bins.
ComparisonReport compare_psd(const SpectrumEstimate& est, const std::function<double(double)>& ref,
                             double lo, double hi, double tolerance, std::string name = "",
                             std::size_t groups = 0);

struct CoherenceReport {
    double g1_modulus = 0.0;
    double condition_ratio = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::size_t n_blocks = 0;
};

/// First-order coherence of paired fields, built from block averages F, F'
/// over averaging_T:
///   g1 = |sum F conj F'| / sqrt(sum |F|^2 sum |F'|^2)
/// summed over members and over blocks whose start lies in [t_begin, t_end).
/// condition_ratio is the RMS of dF2/r0 - dF2'/r0', the block quadratures
/// taken relative to each field's mean direction. pass iff condition_ratio <
/// threshold. band is [0, pi/averaging_T], the noise-equivalent band of the
/// block average.
CoherenceReport coherence_metric(std::span<const FieldTrace> f, std::span<const FieldTrace> f2,
                                 double averaging_T, double threshold = 1e-2,
                                 double t_begin = 0.0, double t_end = -1.0);
CoherenceReport coherence_metric(const FieldTrace& f, const FieldTrace& f2, double averaging_T,
                                 double threshold = 1e-2);

/// Predicted condition ratio sqrt(S/T)/r0 for a quadrature difference with
/// white PSD S averaged over T, and the orders of magnitude by which it sits
/// below 1.
struct CoherenceMargin {
    double condition_ratio = 0.0;
    double orders = 0.0;
};
CoherenceMargin coherence_margin(double r0, double difference_psd, double averaging_T);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct TableStats {
    Estimate a1_mean, a2_mean, a1_var, a2_var, n_mean, n_var;
    std::size_t modes = 0;
};

struct TableOptions {
    /// Local oscillator amplitude as a multiple of max(r0, 1); 0 reads the
    /// quadratures straight off the field.
    double lo_ratio = 1e3;
};

/// The six single-mode statistics of the rectangular mode filter of
/// duration T, pooled over every complete mode of every run. Quadratures are
/// read by balanced homodyne against a strong real (and then pi/2 shifted)
/// local oscillator carrying its own vacuum noise; photon numbers come from
/// the integrated photocurrent with the c-number vacuum floor removed (1/2
/// from the mean and 1/4 from the variance per sample).
TableStats ensemble_table_stats(std::span<const FieldTrace> runs, double T,
                                const TableOptions& options, const SeedStream& seed);

/// Second-half over first-half variance of a trace.
struct StationarityReport {
    double first_var = 0.0;
    double second_var = 0.0;
    double ratio = 0.0;
    bool pass = false;
};
StationarityReport stationarity_check(std::span<const double> x, double tolerance = 0.25);

}  // namespace lockbench
