#pragma once

#include <vector>

#include "lockbench/noise.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

/// |field|^2 per sample. A c-number vacuum contributes 1/(2 dt) per sample,
/// which balanced detection cancels.
PhotocurrentTrace photocurrent(const FieldTrace& in);

struct DetectorPair {
    PhotocurrentTrace g;
    PhotocurrentTrace h;
};

/// Photocurrents behind a 50/50 splitter fed by sig (port a) and lo (port b).
DetectorPair homodyne_detectors(const FieldTrace& sig, const FieldTrace& lo);

/// g - h = 2 Re(conj(sig) lo), computed directly.
PhotocurrentTrace balanced_homodyne(const FieldTrace& sig, const FieldTrace& lo);

/// Balanced homodyne with the slave tap advanced by pi/2, scaled by 1/2:
/// Im(conj(d) k), which is d0 dk2 - k0 dd2 to first order.
PhotocurrentTrace error_signal(const FieldTrace& slave_tap, const FieldTrace& master_arm);

/// Integrate-and-dump over consecutive windows of duration T.
struct ModeSampleSeries {
    double T = 0.0;
    std::vector<double> values;
};

ModeSampleSeries mode_integrate(const RealTrace& in, double T);
ModeSampleSeries mode_integrate(const PhotocurrentTrace& in, double T);

/// Self-referenced homodyne on one realization: the window
/// [t0, t0+T) of `lo` is gated into a delay line of length tau and beaten
/// against the window [t0+tau, t0+tau+T) of `laser`. Returns
/// integral of 2 Im(conj(lo delayed) laser) over the second window, i.e.
/// 2 r0 (mode dr2 now - mode dr2 tau earlier) to first order.
/// Pass the same trace as `laser` and `lo` for the two-mode measurement.
double delayed_two_mode_homodyne(const FieldTrace& laser, const FieldTrace& lo, double t0,
                                 double tau, double T, const SeedStream& vacuum_seed);

}  // namespace lockbench
