#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lockbench/detection.hpp"
#include "lockbench/laser.hpp"
#include "lockbench/noise.hpp"
#include "lockbench/optics.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

struct FeedforwardSpec {
    /// BS2 angle; the tap reflectivity is r = sin(theta_tap).
    double theta_tap = 0.7853981633974483;
    /// Radians of correction per unit error signal.
    double gain = 0.0;
    /// +1 locks to the k arm of the master split, -1 to the k' arm.
    int master_split_sign = +1;
    /// Largest |phi| the actuator can apply, if limited.
    std::optional<double> actuator_range;

    void validate() const;
};

struct LockResult {
    FieldTrace output;            // f
    PhotocurrentTrace error;      // e
    RealTrace correction;         // phi = G e, radians
    FieldTrace slave_port;        // c, before correction
};

/// sqrt(2)/(r a0 b0) with r = sin(theta_tap) and b0 the master amplitude
/// before the 50/50 split.
double nominal_gain(double theta_tap, double a0, double b0);

/// Master b and vacuum u through a 50/50 splitter: k = (b+u)/sqrt(2),
/// k' = (b-u)/sqrt(2).
PortPair split_master(const FieldTrace& master, const SeedStream& u_seed);

/// Taps the slave on BS2 (fresh vacuum from `vacuum_seed`), forms the error
/// signal against master_arm and rotates the through port by G e.
/// Throws ActuatorRangeError at the first non-finite or out-of-range
/// correction.
LockResult feedforward_lock(const FieldTrace& slave, const FieldTrace& master_arm,
                            const FeedforwardSpec& spec, const SeedStream& vacuum_seed);

struct DualLockResult {
    LockResult first;
    LockResult second;
    PortPair master_arms;      // k, k'
    PhotocurrentTrace beat;    // balanced homodyne of f advanced by pi/2 against f'
    std::vector<std::string> warnings;
};

/// Locks slave_a to k and slave_b to k' of one master split. The two arms
/// share one vacuum u with opposite signs. Seeds: child "u" for the master
/// split, "v" and "v'" for the two taps.
DualLockResult dual_lock(const FieldTrace& slave_a, const FieldTrace& slave_b,
                         const FieldTrace& master, const FeedforwardSpec& spec,
                         const SeedStream& seed);

/// 2 Im(conj(f) f'): the beat of f advanced by pi/2 against f'.
PhotocurrentTrace quadrature_beat(const FieldTrace& f, const FieldTrace& f2);

/// Freezes the correction at its value at t_off; from then on the slave's own
/// diffusion passes through uncorrected.
FieldTrace unlock_and_coast(const LockResult& result, double t_off);
/// As above, with the through port replaced by `slave_continuation` from
/// t_off on.
FieldTrace unlock_and_coast(const LockResult& result, const FieldTrace& slave_continuation,
                            double t_off);

struct FeedbackSpec {
    /// K, (rad/s) of frequency correction per radian of filtered error.
    double loop_gain = 0.0;
    /// tau_f, seconds; a whole number of samples.
    double loop_delay = 0.0;
    /// Corner of the single-pole low-pass, rad/s.
    double filter_bandwidth = 1.0;
    double theta_tap = 0.7853981633974483;
    /// Divergence is declared when the windowed error RMS exceeds this
    /// multiple of the open-loop RMS.
    double divergence_factor = 1e3;

    void validate(const TimeGrid& grid) const;
};

struct FeedbackResult {
    LockResult lock;
    /// -K y, rad/s, one value per sample.
    RealTrace frequency_correction;
    /// RMS of the normalized error over the first loop delay, before any
    /// correction can act.
    double open_loop_rms = 0.0;
};

/// Closed-loop co-simulation of a frequency-actuated lock. Per step the
/// normalized error eps = -e/(k0 r a0) (the relative phase to first order)
/// passes a tau_f delay line and the low-pass, and the slave phase advances
/// by -K y dt. The actuator acts on the linearized field a + i a0 theta, so
/// an unstable loop grows without bound instead of wrapping.
///
/// Slave noise comes from child "slave" of `seed` (laser stream layout), the
/// tap vacuum from child "v". Throws InstabilityError on divergence.
FeedbackResult feedback_lock(const LinearLaserSpec& slave_spec, const FieldTrace& master_arm,
                             const FeedbackSpec& spec, const SeedStream& seed);

}  // namespace lockbench
