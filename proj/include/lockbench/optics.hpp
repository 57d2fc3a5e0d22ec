#pragma once

#include <utility>
#include <vector>

#include "lockbench/noise.hpp"
#include "lockbench/trace.hpp"

namespace lockbench {

/// Lossless splitter with r = sin(theta), t = cos(theta).
struct BeamSplitterSpec {
    double theta = 0.7853981633974483;

    double r() const noexcept;
    double t() const noexcept;
};

struct PortPair {
    FieldTrace out_a;
    FieldTrace out_b;
};

/// out_a = r in_a + t in_b, out_b = t in_a - r in_b. The map is its own
/// inverse: two identical splitters in cascade give back the inputs.
PortPair beam_splitter(const FieldTrace& in_a, const FieldTrace& in_b,
                       const BeamSplitterSpec& spec);

/// Exact rotation by e^{i phi}; the stored mean rotates too.
FieldTrace phase_shift(const FieldTrace& in, double phi);
/// Exact rotation by e^{i phi(t)}. The stored mean is left as is, since a
/// fluctuating correction has no single carrier phase.
FieldTrace phase_shift(const FieldTrace& in, const RealTrace& phi);

/// First-order form: sample + i * mean * phi.
FieldTrace phase_shift_linearized(const FieldTrace& in, double phi);
FieldTrace phase_shift_linearized(const FieldTrace& in, const RealTrace& phi);

/// Shift by tau seconds (a whole number of samples). The first tau/dt
/// samples are vacuum drawn from `vacuum_seed`.
FieldTrace delay(const FieldTrace& in, double tau, const SeedStream& vacuum_seed);

/// Half-open [start, stop) interval in seconds.
using TimeWindow = std::pair<double, double>;

/// Keeps samples inside the windows and substitutes vacuum elsewhere.
/// Window edges must fall on the grid; windows must not overlap.
FieldTrace time_gate(const FieldTrace& in, const std::vector<TimeWindow>& windows,
                     const SeedStream& vacuum_seed);

}  // namespace lockbench
